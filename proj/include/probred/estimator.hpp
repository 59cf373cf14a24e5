// estimator.hpp
//
// Estimation of catalog models by least squares, reported in the classical
// regression format: coefficient (standard error), R-squared, and the
// regression standard error s.
//
// The solver is the pivoted orthogonal decomposition from linalg.hpp rather
// than normal equations: some target datasets are nearly collinear in scale
// (tiny s), and conditioning matters. A normal-equations path exists only as
// an independent oracle in the test suite.

#ifndef PROBRED_ESTIMATOR_HPP
#define PROBRED_ESTIMATOR_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "probred/common.hpp"
#include "probred/dataset.hpp"
#include "probred/linalg.hpp"
#include "probred/model_catalog.hpp"

namespace probred {

/// A fitted model. Coefficients are ordered intercept first, matching
/// `column_names`. The design matrix, response, and (X'X)^{-1} are retained
/// because the misspecification battery and restriction tests refit pieces of
/// the same problem.
struct FitResult {
    StatisticalModel model;
    std::vector<std::string> column_names;  // design columns, intercept first
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> residuals;
    std::vector<double> fitted;
    double r_squared = 0.0;
    double s = 0.0;  // regression standard error, sqrt(SSR / (n - k))
    std::size_t n = 0;
    std::size_t k = 0;
    Matrix design;  // n x k
    std::vector<double> response;
    Matrix xtx_inverse;

    double ssr() const {
        double acc = 0.0;
        for (double e : residuals) acc += e * e;
        return acc;
    }
};

namespace detail {

// Shared least-squares core: fits y on the columns of X and fills every
// derived field. Degrees of freedom: SSR / (n - k) throughout. R-squared is
// centered, 1 - SSR/SST, and defined as 0 when the response has no variance.
inline FitResult fit_design(const Matrix& X, const std::vector<double>& y,
                            std::vector<std::string> column_names, StatisticalModel model) {
    const std::size_t n = X.rows(), k = X.cols();
    if (n <= k)
        throw Error("need more observations than parameters: n = " + std::to_string(n) +
                    ", k = " + std::to_string(k));
    const LeastSquaresResult ls = least_squares(X, y, column_names);

    FitResult fit;
    fit.model = std::move(model);
    fit.column_names = std::move(column_names);
    fit.coefficients = ls.coefficients;
    fit.xtx_inverse = ls.xtx_inverse;
    fit.design = X;
    fit.response = y;
    fit.n = n;
    fit.k = k;

    fit.fitted = X * fit.coefficients;
    fit.residuals.resize(n);
    double ssr = 0.0, ymean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = y[i] - fit.fitted[i];
        ssr += fit.residuals[i] * fit.residuals[i];
        ymean += y[i];
    }
    ymean /= static_cast<double>(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sst += (y[i] - ymean) * (y[i] - ymean);

    fit.s = std::sqrt(ssr / static_cast<double>(n - k));
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    if (fit.r_squared < 0.0) fit.r_squared = 0.0;  // round-off guard
    if (fit.r_squared > 1.0) fit.r_squared = 1.0;

    fit.standard_errors.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        fit.standard_errors[j] = fit.s * std::sqrt(fit.xtx_inverse(j, j));
    return fit;
}

}  // namespace detail

/// Ordinary least squares of the response on an intercept plus the named
/// regressors. Errors: rank-deficient design (named column), n <= k.
inline FitResult fit_ols(const DataTable& table, const VariableRoles& roles,
                         StatisticalModel model) {
    validate_roles(table, roles);
    const std::size_t n = table.n();
    const std::size_t k = roles.regressors.size() + 1;

    Matrix X(n, k);
    std::vector<std::string> names;
    names.reserve(k);
    names.emplace_back("intercept");
    for (std::size_t i = 0; i < n; ++i) X(i, 0) = 1.0;
    for (std::size_t j = 0; j < roles.regressors.size(); ++j) {
        const std::vector<double>& col = table.values(roles.regressors[j]);
        for (std::size_t i = 0; i < n; ++i) X(i, j + 1) = col[i];
        names.push_back(roles.regressors[j]);
    }
    return detail::fit_design(X, table.values(roles.response), std::move(names),
                              std::move(model));
}

inline FitResult fit_ols(const DataTable& table, const VariableRoles& roles) {
    StatisticalModel model;
    model.kind = roles.regressors.empty() ? ModelKind::SimpleNormal
                                          : ModelKind::LinearRegression;
    model.roles = roles;
    return fit_ols(table, roles, std::move(model));
}

/// Fits the simple Normal model x_t = mu + u_t: mu-hat is the sample mean,
/// sigma-hat^2 = SSR/(n-1), and the standard error of mu-hat is s/sqrt(n).
inline FitResult fit_simple_normal(const std::vector<double>& series,
                                   const std::string& name = "y") {
    const std::size_t n = series.size();
    if (n < 2) throw Error("fit_simple_normal: need at least 2 observations");

    Matrix X(n, 1, 1.0);
    VariableRoles roles;
    roles.response = name;
    StatisticalModel model;
    model.kind = ModelKind::SimpleNormal;
    model.roles = roles;
    return detail::fit_design(X, series, {"intercept"}, std::move(model));
}

/// Fits an AR(p) model: OLS of y_t on (1, y_{t-1}, ..., y_{t-p}) over the
/// complete cases of the lagged design.
inline FitResult fit_ar(const std::vector<double>& series, int p,
                        const std::string& name = "y") {
    if (p < 1) throw Error("fit_ar: order must be >= 1");
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(p) + 2)
        throw Error("fit_ar: need n > p + 2 observations (n = " + std::to_string(n) +
                    ", p = " + std::to_string(p) + ")");

    const DataTable base(std::vector<Column>{Column{name, series}}, /*time_ordered=*/true);
    const DataTable lagged = add_lags(base, name, p);

    VariableRoles roles;
    roles.response = name;
    for (int lag = 1; lag <= p; ++lag)
        roles.regressors.push_back(name + "_lag" + std::to_string(lag));

    StatisticalModel model;
    model.kind = ModelKind::AutoRegressive;
    model.ar_order = p;
    model.roles = roles;
    model.reduction.dependence = Dependence::Markov;
    model.reduction.markov_order = p;
    model.reduction.heterogeneity = Heterogeneity::Stationary;
    return fit_ols(lagged, roles, std::move(model));
}

/// Fits a declared catalog model against a table.
inline FitResult fit_model(const DataTable& table, const StatisticalModel& model) {
    switch (model.kind) {
        case ModelKind::SimpleNormal:
            validate_roles(table, model.roles);
            return fit_simple_normal(table.values(model.roles.response), model.roles.response);
        case ModelKind::GaussLinear:
        case ModelKind::LinearRegression:
            return fit_ols(table, model.roles, model);
        case ModelKind::AutoRegressive: {
            validate_roles(table, model.roles);
            if (!table.time_ordered())
                throw Error("autoregressive models require a time-ordered table");
            return fit_ar(table.values(model.roles.response), model.ar_order,
                          model.roles.response);
        }
    }
    throw Error("unknown model kind");
}

namespace detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string compact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace detail

/// Classical report: the fitted equation with each standard error printed in
/// parentheses directly beneath its coefficient, followed by R^2, s, and n.
inline std::string format_report(const FitResult& fit) {
    std::string line1 = fit.model.roles.response + " = ";
    std::vector<std::size_t> offsets;
    for (std::size_t j = 0; j < fit.k; ++j) {
        if (j > 0) line1 += " + ";
        offsets.push_back(line1.size());
        line1 += detail::fixed6(fit.coefficients[j]);
        if (j > 0) line1 += "*" + fit.column_names[j];
    }

    std::string line2;
    for (std::size_t j = 0; j < fit.k; ++j) {
        std::size_t start = offsets[j];
        if (j > 0 && start < line2.size() + 1) start = line2.size() + 1;  // keep one space
        line2.resize(start, ' ');
        line2 += "(" + detail::fixed6(fit.standard_errors[j]) + ")";
    }

    std::string line3 = "R^2 = " + detail::compact(fit.r_squared) +
                        ", s = " + detail::compact(fit.s) + ", n = " + std::to_string(fit.n);
    return line1 + "\n" + line2 + "\n" + line3 + "\n";
}

}  // namespace probred

#endif  // PROBRED_ESTIMATOR_HPP
