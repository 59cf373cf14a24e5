// structural.hpp
//
// Structural models enter as linear restrictions R theta = r on the
// coefficients of an already-specified statistical model. This module
// checks whether the structural parameters are identified by the
// statistical ones, fits under the restrictions, and tests the
// over-identifying restrictions against the unrestricted fit.
//
// Only linear restrictions and linear parameter maps are computed on;
// a nonlinear structural map can be recorded as documentation, and
// identification then reports "manual verification required" rather than
// silently passing. Claims about unmodeled outside factors are likewise
// carried as text: they restrict no moments, so nothing about them can be
// computed.

#ifndef PROBRED_STRUCTURAL_HPP
#define PROBRED_STRUCTURAL_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "probred/common.hpp"
#include "probred/dataset.hpp"
#include "probred/estimator.hpp"
#include "probred/linalg.hpp"
#include "probred/misspec.hpp"
#include "probred/model_catalog.hpp"

namespace probred {

// ---------------------------------------------------------------------------
// Specification types
// ---------------------------------------------------------------------------

/// A system of linear equations M phi = N theta + d relating the structural
/// parameters phi to the statistical coefficients theta. Rows are equations;
/// M has one column per structural parameter, N one per coefficient.
struct LinearParameterMap {
    Matrix phi_coefficients;    // M
    Matrix theta_coefficients;  // N
    std::vector<double> offset;  // d
    std::vector<std::string> phi_names;  // optional labels, for messages
};

enum class PhiMapKind { None, Linear, NonlinearDocumented };

/// A structural model expressed against a statistical parameterization:
/// linear restrictions R theta = r, an optional parameter map, and the
/// textual clauses that are recorded but not computed on.
struct StructuralSpec {
    std::string description;
    Matrix restriction_matrix;                // R, q x k
    std::vector<double> restriction_values;   // r, length q
    PhiMapKind phi_map_kind = PhiMapKind::None;
    LinearParameterMap phi_map;               // used when kind == Linear
    std::string phi_map_note;                 // the mapping as documented text
    std::string unmodeled_factors_note;       // recorded, never computed
};

struct IdentificationReport {
    bool identified = false;
    std::string reason;
};

/// An estimate under R theta = r, with the over-identifying F test against
/// the unrestricted fit. `fit.s` uses the restricted degrees of freedom
/// n - k + q (q constraints give back q degrees of freedom); `fit.ssr()`
/// sums the residuals directly and is exact either way.
struct RestrictedFit {
    FitResult fit;
    double ssr = 0.0;           // restricted sum of squared residuals
    double f_statistic = 0.0;   // [(SSR_R - SSR_U)/q] / [SSR_U/(n-k)]
    ProbValue p_value{1.0};
    int df1 = 0;                // q
    int df2 = 0;                // n - k
};

// ---------------------------------------------------------------------------
// Identification
// ---------------------------------------------------------------------------

namespace detail {

// Number of coefficients the statistical model estimates.
inline std::size_t coefficient_count(const StatisticalModel& model) {
    switch (model.kind) {
        case ModelKind::SimpleNormal:
            return 1;
        case ModelKind::GaussLinear:
        case ModelKind::LinearRegression:
            return model.roles.regressors.size() + 1;
        case ModelKind::AutoRegressive:
            return static_cast<std::size_t>(model.ar_order) + 1;
    }
    throw Error("unknown model kind");
}

// Column rank check by modified Gram-Schmidt with a relative tolerance;
// returns the index of the first dependent column, or cols() if full rank.
inline std::size_t first_dependent_column(const Matrix& m, double tol) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::vector<double>> basis;
    for (std::size_t j = 0; j < cols; ++j) {
        std::vector<double> v(rows);
        for (std::size_t i = 0; i < rows; ++i) v[i] = m(i, j);
        const double orig = std::sqrt(dot(v, v));
        for (const std::vector<double>& b : basis) {
            const double d = dot(v, b);
            for (std::size_t i = 0; i < rows; ++i) v[i] -= d * b[i];
        }
        const double rn = std::sqrt(dot(v, v));
        if (orig <= 0.0 || rn <= tol * orig) return j;
        for (double& x : v) x /= rn;
        basis.push_back(std::move(v));
    }
    return cols;
}

}  // namespace detail

/// Decides whether the structural parameters are pinned down by the
/// statistical ones: phi is identified exactly when the phi-side matrix of
/// the map has full column rank (unique solution of M phi = N theta + d for
/// phi, tolerance 1e-10). A documented nonlinear map yields a "manual
/// verification required" report, never a silent pass. Errors: no map at
/// all; map dimensions that do not match the model.
inline IdentificationReport check_identification(const StructuralSpec& spec,
                                                 const StatisticalModel& model) {
    switch (spec.phi_map_kind) {
        case PhiMapKind::None:
            throw Error("check_identification: the structural spec has no parameter map");
        case PhiMapKind::NonlinearDocumented:
            return {false,
                    "manual verification required: the parameter map is nonlinear (" +
                        (spec.phi_map_note.empty() ? std::string("undocumented")
                                                   : spec.phi_map_note) +
                        "); identification was not checked"};
        case PhiMapKind::Linear:
            break;
    }

    const LinearParameterMap& map = spec.phi_map;
    const std::size_t eqs = map.phi_coefficients.rows();
    const std::size_t n_phi = map.phi_coefficients.cols();
    const std::size_t k = detail::coefficient_count(model);
    if (map.theta_coefficients.rows() != eqs || map.offset.size() != eqs)
        throw Error("parameter map is inconsistent: " + std::to_string(eqs) +
                    " phi equations, " + std::to_string(map.theta_coefficients.rows()) +
                    " theta rows, offset length " + std::to_string(map.offset.size()));
    if (map.theta_coefficients.cols() != k)
        throw Error("parameter map expects " + std::to_string(map.theta_coefficients.cols()) +
                    " coefficients, model has " + std::to_string(k));
    if (n_phi == 0) throw Error("parameter map has no structural parameters");

    if (eqs < n_phi)
        return {false, "not identified: " + std::to_string(eqs) + " equations cannot pin down " +
                           std::to_string(n_phi) + " structural parameters"};

    const std::size_t dep = detail::first_dependent_column(map.phi_coefficients, 1e-10);
    if (dep < n_phi) {
        const std::string label = dep < map.phi_names.size()
                                      ? map.phi_names[dep]
                                      : "phi[" + std::to_string(dep) + "]";
        return {false, "not identified: " + label +
                           " is not pinned down (its column of the map is linearly dependent "
                           "on the preceding ones)"};
    }
    return {true, "identified: the map solves uniquely for all " + std::to_string(n_phi) +
                      " structural parameters"};
}

// ---------------------------------------------------------------------------
// Restricted estimation
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_restrictions(const Matrix& R, const std::vector<double>& r,
                                  std::size_t k) {
    const std::size_t q = R.rows();
    if (q == 0) throw Error("restriction set is empty");
    if (R.cols() != k)
        throw Error("restriction matrix has " + std::to_string(R.cols()) +
                    " columns, the design has " + std::to_string(k));
    if (r.size() != q)
        throw Error("restriction values length " + std::to_string(r.size()) +
                    " does not match " + std::to_string(q) + " restriction rows");
    if (q > k)
        throw Error("more restrictions than coefficients (q = " + std::to_string(q) +
                    ", k = " + std::to_string(k) + ")");
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < k; ++j) require_finite(R(i, j), "restriction matrix entry");
        require_finite(r[i], "restriction value");
    }
}

}  // namespace detail

/// Least squares under R theta = r, solved through the constrained normal
/// equations with multipliers. The returned fit carries restricted standard
/// errors (a pinned coefficient has standard error 0); the over-identifying
/// F statistic compares restricted and unrestricted residual sums.
/// Errors: empty/oversized/rank-deficient restriction sets; everything
/// fit_ols rejects (rank-deficient design, n <= k).
inline RestrictedFit fit_restricted(const DataTable& table, const VariableRoles& roles,
                                    const Matrix& R, const std::vector<double>& r) {
    const FitResult base = fit_ols(table, roles);
    const std::size_t n = base.n, k = base.k, q = R.rows();
    detail::validate_restrictions(R, r, k);

    // Full row rank of R <=> R (X'X)^{-1} R' is positive definite, so the
    // Cholesky attempt doubles as the rank check.
    Matrix rar(q, q);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b)
                    acc += R(i, a) * base.xtx_inverse(a, b) * R(j, b);
            rar(i, j) = acc;
        }
    }
    try {
        cholesky(rar);
    } catch (const Error&) {
        throw Error("restriction matrix is rank deficient: the restrictions are linearly "
                    "dependent");
    }

    // Constrained normal equations: [X'X R'; R 0] [theta; lambda] = [X'y; r].
    Matrix xtx(k, k);
    std::vector<double> xty(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += base.design(i, a) * base.design(i, b);
            xtx(a, b) = acc;
        }
        for (std::size_t i = 0; i < n; ++i) xty[a] += base.design(i, a) * base.response[i];
    }
    Matrix kkt(k + q, k + q);
    std::vector<double> rhs(k + q);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) kkt(a, b) = xtx(a, b);
        for (std::size_t i = 0; i < q; ++i) {
            kkt(a, k + i) = R(i, a);
            kkt(k + i, a) = R(i, a);
        }
        rhs[a] = xty[a];
    }
    for (std::size_t i = 0; i < q; ++i) rhs[k + i] = r[i];
    const std::vector<double> sol = solve_general(kkt, rhs);

    std::vector<double> theta(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < q; ++i) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < k; ++j) lhs += R(i, j) * theta[j];
        if (std::fabs(lhs - r[i]) > 1e-10 * (1.0 + std::fabs(r[i])))
            throw Error("restricted solution violates constraint row " + std::to_string(i));
    }

    RestrictedFit out;
    out.fit = base;
    out.fit.coefficients = theta;
    out.fit.fitted = base.design * theta;
    out.fit.residuals.resize(n);
    double ssr_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.fit.residuals[i] = base.response[i] - out.fit.fitted[i];
        ssr_r += out.fit.residuals[i] * out.fit.residuals[i];
    }
    out.ssr = ssr_r;
    out.fit.s = std::sqrt(ssr_r / static_cast<double>(n - k + q));

    const double sst = detail::sum_squared_deviations(base.response);
    out.fit.r_squared = sst > 0.0 ? std::min(1.0, std::max(0.0, 1.0 - ssr_r / sst)) : 0.0;

    // Restricted covariance factor: C = A - A R' (R A R')^{-1} R A with
    // A = (X'X)^{-1}; a pinned direction has zero variance.
    Matrix ra(q, k);  // R A
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t b = 0; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t a = 0; a < k; ++a) acc += R(i, a) * base.xtx_inverse(a, b);
            ra(i, b) = acc;
        }
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> col(q);
        for (std::size_t i = 0; i < q; ++i) col[i] = ra(i, j);
        const std::vector<double> w = solve_spd(rar, col);  // (RAR')^{-1} (RA)_j
        double cjj = base.xtx_inverse(j, j);
        for (std::size_t i = 0; i < q; ++i) cjj -= ra(i, j) * w[i];
        // The subtraction cancels exactly for a pinned direction; snap the
        // roundoff remnant to the zero variance it represents.
        if (cjj <= 1e-12 * base.xtx_inverse(j, j)) cjj = 0.0;
        out.fit.standard_errors[j] = out.fit.s * std::sqrt(cjj);
    }

    // Over-identifying F against the unrestricted fit, with the same
    // exact-fit floor the battery checks use.
    const double ssr_u = base.ssr();
    const double floor = 1e-20 * sst;
    out.df1 = static_cast<int>(q);
    out.df2 = static_cast<int>(n - k);
    if (ssr_u <= floor) {
        if (ssr_r > floor)
            throw Error("unrestricted fit is exact; restriction F statistic undefined");
        out.f_statistic = 0.0;
    } else {
        const double num = std::max(0.0, ssr_r - ssr_u) / static_cast<double>(q);
        out.f_statistic = num / (ssr_u / static_cast<double>(n - k));
    }
    out.p_value = p_value_for(out.f_statistic, NullDistribution::f_ratio(out.df1, out.df2),
                              Tail::Upper);
    return out;
}

/// Over-identifying restriction test: rejects when the restricted fit loses
/// significantly more than the unrestricted one. Pass the model's latest
/// battery report when available: if that report was not adequate, a warning
/// is attached to the result, since restriction p-values borrow the error
/// assumptions the battery just rejected. Errors: as fit_restricted, plus
/// n <= k + q.
inline TestResult test_overidentifying(const DataTable& table, const VariableRoles& roles,
                                       const Matrix& R, const std::vector<double>& r,
                                       double alpha = 0.01,
                                       const MisSpecReport* adequacy = nullptr) {
    const std::size_t n = table.n();
    const std::size_t k = roles.regressors.size() + 1;
    const std::size_t q = R.rows();
    if (n <= k + q)
        throw Error("over-identifying test needs n > k + q (n = " + std::to_string(n) +
                    ", k = " + std::to_string(k) + ", q = " + std::to_string(q) + ")");

    const RestrictedFit rf = fit_restricted(table, roles, R, r);
    std::string details = std::to_string(q) + " restriction(s) against " + std::to_string(k) +
                          " coefficients";
    if (adequacy != nullptr && !adequacy->adequate)
        details += "; warning: the embedding model failed its misspecification battery, so "
                   "this p-value is built on rejected assumptions";
    return detail::make_test_result("overidentifying_restrictions", rf.f_statistic,
                                    NullDistribution::f_ratio(rf.df1, rf.df2), Tail::Upper,
                                    alpha, std::move(details));
}

}  // namespace probred

#endif  // PROBRED_STRUCTURAL_HPP
