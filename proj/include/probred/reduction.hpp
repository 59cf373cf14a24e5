// reduction.hpp
//
// The probabilistic reduction from a joint Normal specification to the
// conditional (regression) parameterization:
//   beta1  = Sigma_22^{-1} sigma_21
//   beta0  = mu_y - beta1' mu_x
//   sigma2 = sigma_yy - sigma_21' Sigma_22^{-1} sigma_21
// plus construction of conditioning sets (contemporaneous regressors and
// lags) and the empirical martingale-difference orthogonality check on
// least-squares residuals.

#ifndef PROBRED_REDUCTION_HPP
#define PROBRED_REDUCTION_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "probred/common.hpp"
#include "probred/dataset.hpp"
#include "probred/estimator.hpp"
#include "probred/linalg.hpp"

namespace probred {

/// A joint Normal distribution over m variables. The covariance must be
/// symmetric (within 1e-12) and positive definite.
struct JointNormalSpec {
    std::vector<double> mean;
    Matrix covariance;

    std::size_t dimension() const { return mean.size(); }

    /// Full validity check: square symmetric covariance of matching size with
    /// all pivots of a symmetric factorization positive.
    void validate() const {
        require_shape();
        cholesky(covariance);  // throws if any pivot is not positive
    }

    void require_shape() const {
        detail::require(covariance.rows() == mean.size() && covariance.cols() == mean.size(),
                        "covariance shape does not match mean length");
        for (std::size_t i = 0; i < covariance.rows(); ++i)
            for (std::size_t j = i + 1; j < covariance.cols(); ++j)
                if (std::fabs(covariance(i, j) - covariance(j, i)) > 1e-12)
                    throw Error("covariance not symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
    }
};

/// Parameters of the conditional regression induced by the reduction.
struct RegressionParams {
    double beta0 = 0.0;
    std::vector<double> beta1;
    double sigma2 = 0.0;
};

/// Derives E(y | X = x) = beta0 + beta1' x and Var(y | X = x) = sigma2 from
/// the joint Normal distribution, conditioning the `target` variable on the
/// `conditioning` index set.
inline RegressionParams conditional_regression(const JointNormalSpec& joint, std::size_t target,
                                               const std::vector<std::size_t>& conditioning) {
    joint.require_shape();
    const std::size_t m = joint.dimension();
    detail::require(target < m, "target index out of range");
    detail::require(!conditioning.empty(), "conditioning set must be non-empty");
    for (std::size_t idx : conditioning) {
        detail::require(idx < m, "conditioning index out of range");
        detail::require(idx != target, "target cannot appear in the conditioning set");
    }

    const std::size_t q = conditioning.size();
    Matrix sigma22(q, q);
    std::vector<double> sigma21(q);
    for (std::size_t a = 0; a < q; ++a) {
        sigma21[a] = joint.covariance(conditioning[a], target);
        for (std::size_t b = 0; b < q; ++b)
            sigma22(a, b) = joint.covariance(conditioning[a], conditioning[b]);
    }

    RegressionParams params;
    try {
        params.beta1 = solve_spd(sigma22, sigma21);
    } catch (const Error&) {
        throw Error("conditioning covariance singular");
    }

    params.beta0 = joint.mean[target];
    for (std::size_t a = 0; a < q; ++a) params.beta0 -= params.beta1[a] * joint.mean[conditioning[a]];

    params.sigma2 = joint.covariance(target, target) - dot(sigma21, params.beta1);
    if (!(params.sigma2 > 0.0))
        throw Error("conditional variance not positive; joint covariance is not positive definite");
    return params;
}

/// One entry of the martingale-difference orthogonality report: the sample
/// correlation between the residuals and a named column. `defined` is false
/// when either series has zero variance.
struct MdCorrelation {
    std::string name;
    double correlation = 0.0;
    bool defined = false;
};

/// Sample correlations between a fit's residuals and the named columns.
/// For columns included in the fit, least-squares orthogonality forces the
/// correlation to zero (within round-off); excluded candidate columns are
/// reported as diagnostics for the conditioning-set choice.
inline std::vector<MdCorrelation> md_orthogonality(const FitResult& fit, const DataTable& table,
                                                   const std::vector<std::string>& conditioning) {
    detail::require(fit.residuals.size() == table.n(),
                    "residual length does not match table rows");
    const std::size_t n = table.n();
    double umean = 0.0;
    for (double u : fit.residuals) umean += u;
    umean /= static_cast<double>(n);
    double uvar = 0.0;
    for (double u : fit.residuals) uvar += (u - umean) * (u - umean);

    std::vector<MdCorrelation> out;
    for (const std::string& name : conditioning) {
        const std::vector<double>& x = table.values(name);
        MdCorrelation entry;
        entry.name = name;
        double xmean = 0.0;
        for (double v : x) xmean += v;
        xmean /= static_cast<double>(n);
        double xvar = 0.0, cross = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xvar += (x[i] - xmean) * (x[i] - xmean);
            cross += (x[i] - xmean) * (fit.residuals[i] - umean);
        }
        if (xvar > 0.0 && uvar > 0.0) {
            entry.correlation = cross / std::sqrt(xvar * uvar);
            entry.defined = true;
        }
        out.push_back(entry);
    }
    return out;
}

/// Builds the conditioning design for a model: contemporaneous regressors
/// X_t, then lags of y, then lags of each regressor, up to `lag_order`. Rows
/// are trimmed to the n - lag_order complete cases. With lag_order 0 the
/// design is the static regressor set.
inline DataTable build_conditioning(const DataTable& table, const VariableRoles& roles,
                                    int lag_order) {
    validate_roles(table, roles);
    detail::require(lag_order >= 0, "lag_order must be >= 0");
    if (lag_order == 0) {
        detail::require(!roles.regressors.empty(),
                        "conditioning set is empty: no regressors and no lags");
        std::vector<Column> cols;
        for (const std::string& r : roles.regressors) cols.push_back(Column{r, table.values(r)});
        return DataTable(std::move(cols), table.time_ordered());
    }

    if (!table.time_ordered()) throw Error("lagged conditioning requires a time-ordered table");
    const std::size_t n = table.n();
    if (static_cast<std::size_t>(lag_order) >= n)
        throw Error("max_lag " + std::to_string(lag_order) + " leaves no complete rows (n = " +
                    std::to_string(n) + ")");
    const std::size_t m = n - static_cast<std::size_t>(lag_order);

    std::vector<Column> cols;
    auto tail_of = [&](const std::vector<double>& v) {
        return std::vector<double>(v.end() - static_cast<std::ptrdiff_t>(m), v.end());
    };
    auto lag_of = [&](const std::vector<double>& v, int lag) {
        std::vector<double> out(m);
        for (std::size_t i = 0; i < m; ++i)
            out[i] = v[i + static_cast<std::size_t>(lag_order - lag)];
        return out;
    };

    for (const std::string& r : roles.regressors)
        cols.push_back(Column{r, tail_of(table.values(r))});
    const std::vector<double>& y = table.values(roles.response);
    for (int lag = 1; lag <= lag_order; ++lag)
        cols.push_back(Column{roles.response + "_lag" + std::to_string(lag), lag_of(y, lag)});
    for (const std::string& r : roles.regressors) {
        const std::vector<double>& x = table.values(r);
        for (int lag = 1; lag <= lag_order; ++lag)
            cols.push_back(Column{r + "_lag" + std::to_string(lag), lag_of(x, lag)});
    }
    return DataTable(std::move(cols), table.time_ordered());
}

}  // namespace probred

#endif  // PROBRED_REDUCTION_HPP
