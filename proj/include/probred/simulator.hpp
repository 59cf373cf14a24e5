// simulator.hpp
//
// Monte Carlo engine for studying error probabilities. A DGPSpec describes
// how artificial data are generated — a clean Gaussian benchmark plus four
// controlled departures (autocorrelated errors, variance tied to the
// regressor, a drifting mean, skewed errors). A SimDesign pairs a
// generating process with a testing procedure and a nominal level;
// actual_size estimates the procedure's true rejection frequency, so the
// gap between nominal and actual error probabilities becomes a measured
// quantity instead of a hope.
//
// Replications are independent: replication i draws every variate from
// RandomStream(seed, i), and results aggregate by commutative integer
// counts, so any thread partition reproduces the serial run bit for bit.

#ifndef PROBRED_SIMULATOR_HPP
#define PROBRED_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "probred/common.hpp"
#include "probred/dataset.hpp"
#include "probred/estimator.hpp"
#include "probred/linalg.hpp"
#include "probred/misspec.hpp"
#include "probred/rng.hpp"
#include "probred/special_fns.hpp"
#include "probred/structural.hpp"

namespace probred {

// ---------------------------------------------------------------------------
// Generating processes
// ---------------------------------------------------------------------------

// How the regressor column is laid out when a regression backbone is present.
enum class XDesign {
    Equispaced,   // x_i fixed on a grid over [-2, 2]; identical across replications
    NormalDraws,  // x_i drawn standard normal from the replication's stream
};

// Optional mean structure y = beta0 + beta1 * x + error. Without it the
// series is just a location plus error, matching the simple-normal model.
struct RegressionBackbone {
    double beta0 = 0.0;
    double beta1 = 0.0;
    XDesign x_design = XDesign::Equispaced;
};

enum class DGPKind {
    NIIDNormal,          // independent N(mu, sigma2) errors
    ARErrors,            // errors follow u_t = rho * u_{t-1} + e_t
    HeteroskedasticByX,  // error sd = sigma * (1 + gamma * |x|)
    MeanTrend,           // mean shifted by delta * (t / n)
    SkewedErrors,        // standardized gamma(shape) errors, skewness 2/sqrt(shape)
};

struct DGPSpec {
    DGPKind kind = DGPKind::NIIDNormal;
    std::size_t n = 100;
    double mu = 0.0;      // location when no backbone is present
    double sigma2 = 1.0;  // error variance (innovation variance for ARErrors)

    double rho = 0.0;    // ARErrors persistence, |rho| < 1
    double gamma = 0.0;  // HeteroskedasticByX slope of the sd in |x|
    double delta = 0.0;  // MeanTrend total drift over the sample
    double shape = 3.0;  // SkewedErrors gamma shape, > 0

    std::size_t ar_burn_in = 100;  // discarded start-up draws for ARErrors

    std::optional<RegressionBackbone> backbone;
};

// ---------------------------------------------------------------------------
// Study designs
// ---------------------------------------------------------------------------

enum class ProcedureKind {
    CoefficientSignificance,  // two-sided t test of one fitted coefficient
    MisSpecTest,              // one named test from the misspecification battery
    OverIdentifying,          // F test of linear restrictions R theta = r
};

struct Procedure {
    ProcedureKind kind = ProcedureKind::CoefficientSignificance;

    // CoefficientSignificance: H0 is coefficients[coefficient] = null_value.
    std::size_t coefficient = 0;
    double null_value = 0.0;

    // MisSpecTest: "jarque_bera", "shapiro_wilk", "ljung_box", "reset",
    // "white", "goldfeld_quandt" or "chow".
    std::string test_name;

    // OverIdentifying restrictions.
    Matrix restriction_matrix;
    std::vector<double> restriction_values;
};

struct SimDesign {
    DGPSpec dgp;
    Procedure procedure;
    double nominal_alpha = 0.05;
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
};

struct SimResult {
    double rejection_rate = 0.0;
    double mc_standard_error = 0.0;  // sqrt(p(1-p)/replications)
    std::size_t replications = 0;
    std::vector<double> p_values;  // one per replication when requested
};

struct SimOptions {
    std::size_t threads = 0;    // 0: PR_ADEQUACY_THREADS, else hardware count
    bool keep_p_values = false;
};

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_dgp(const DGPSpec& dgp) {
    require(dgp.n >= 20, "simulated sample size must be at least 20 (got " +
                             std::to_string(dgp.n) + ")");
    require_finite(dgp.sigma2, "sigma2");
    // sigma2 = 0 collapses the series onto its mean; permitted so tests can
    // exercise degenerate inputs, but negative variance is always a bug.
    require(dgp.sigma2 >= 0.0, "sigma2 must be nonnegative");
    require_finite(dgp.mu, "mu");
    if (dgp.backbone) {
        require_finite(dgp.backbone->beta0, "beta0");
        require_finite(dgp.backbone->beta1, "beta1");
    }
    switch (dgp.kind) {
        case DGPKind::ARErrors:
            require_finite(dgp.rho, "rho");
            require(std::fabs(dgp.rho) < 1.0, "AR parameter must satisfy |rho| < 1");
            break;
        case DGPKind::HeteroskedasticByX:
            require_finite(dgp.gamma, "gamma");
            require(dgp.gamma >= 0.0, "heteroskedasticity slope gamma must be nonnegative");
            require(dgp.backbone.has_value(),
                    "HeteroskedasticByX needs a regression backbone to supply x");
            break;
        case DGPKind::MeanTrend:
            require_finite(dgp.delta, "delta");
            break;
        case DGPKind::SkewedErrors:
            require_finite(dgp.shape, "shape");
            require(dgp.shape > 0.0, "gamma shape must be positive");
            break;
        case DGPKind::NIIDNormal:
            break;
    }
}

// Draw one artificial sample. When the backbone uses random x, the x column
// is drawn first and the errors after it, so the draw order is part of the
// documented stream layout.
inline DataTable generate_with(const DGPSpec& dgp, RandomStream& stream) {
    const std::size_t n = dgp.n;
    const double sigma = std::sqrt(dgp.sigma2);

    std::vector<double> x;
    if (dgp.backbone) {
        x.resize(n);
        if (dgp.backbone->x_design == XDesign::Equispaced) {
            for (std::size_t i = 0; i < n; ++i)
                x[i] = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        } else {
            for (std::size_t i = 0; i < n; ++i) x[i] = stream.normal();
        }
    }

    std::vector<double> u(n);
    switch (dgp.kind) {
        case DGPKind::NIIDNormal:
        case DGPKind::MeanTrend:
            for (std::size_t i = 0; i < n; ++i) u[i] = sigma * stream.normal();
            break;
        case DGPKind::ARErrors: {
            double prev = 0.0;
            for (std::size_t t = 0; t < dgp.ar_burn_in + n; ++t) {
                prev = dgp.rho * prev + sigma * stream.normal();
                if (t >= dgp.ar_burn_in) u[t - dgp.ar_burn_in] = prev;
            }
            break;
        }
        case DGPKind::HeteroskedasticByX:
            for (std::size_t i = 0; i < n; ++i)
                u[i] = sigma * (1.0 + dgp.gamma * std::fabs(x[i])) * stream.normal();
            break;
        case DGPKind::SkewedErrors: {
            // Standardized gamma: mean 0, variance sigma2, skewness
            // 2/sqrt(shape). sigma = 0 keeps the degenerate convention.
            const double scale = sigma / std::sqrt(dgp.shape);
            for (std::size_t i = 0; i < n; ++i)
                u[i] = scale * (stream.gamma(dgp.shape) - dgp.shape);
            break;
        }
    }

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = dgp.backbone ? dgp.backbone->beta0 + dgp.backbone->beta1 * x[i]
                                   : dgp.mu;
        if (dgp.kind == DGPKind::MeanTrend)
            mean += dgp.delta * static_cast<double>(i + 1) / static_cast<double>(n);
        y[i] = mean + u[i];
    }

    std::vector<Column> cols{Column{"y", std::move(y)}};
    if (dgp.backbone) cols.push_back(Column{"x", std::move(x)});
    return DataTable(std::move(cols));
}

inline VariableRoles roles_for(const DGPSpec& dgp) {
    VariableRoles roles;
    roles.response = "y";
    if (dgp.backbone) roles.regressors.push_back("x");
    return roles;
}

}  // namespace detail

/// Generates one artificial sample from the process description.
inline DataTable generate(const DGPSpec& dgp, std::uint64_t seed) {
    detail::validate_dgp(dgp);
    RandomStream stream(seed, 0);
    return detail::generate_with(dgp, stream);
}

// ---------------------------------------------------------------------------
// Procedures under study
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_procedure(const SimDesign& design) {
    const Procedure& proc = design.procedure;
    const std::size_t k = design.dgp.backbone ? 2 : 1;
    switch (proc.kind) {
        case ProcedureKind::CoefficientSignificance:
            require(proc.coefficient < k,
                    "coefficient index " + std::to_string(proc.coefficient) +
                        " out of range for " + std::to_string(k) + " fitted coefficient(s)");
            require_finite(proc.null_value, "null value");
            break;
        case ProcedureKind::MisSpecTest: {
            const std::string& t = proc.test_name;
            const bool known = t == "jarque_bera" || t == "shapiro_wilk" ||
                               t == "ljung_box" || t == "reset" || t == "white" ||
                               t == "goldfeld_quandt" || t == "chow";
            require(known, "unknown misspecification test '" + t + "'");
            const bool needs_regressor =
                t == "reset" || t == "white" || t == "goldfeld_quandt";
            if (needs_regressor)
                require(design.dgp.backbone.has_value(),
                        "test '" + t + "' needs a regression backbone in the data");
            break;
        }
        case ProcedureKind::OverIdentifying:
            require(design.dgp.backbone.has_value(),
                    "over-identifying study needs a regression backbone");
            break;
    }
}

// The p-value the procedure produces on one artificial sample.
inline double replication_p_value(const SimDesign& design, const DataTable& table) {
    const Procedure& proc = design.procedure;
    const VariableRoles roles = roles_for(design.dgp);

    switch (proc.kind) {
        case ProcedureKind::CoefficientSignificance: {
            const FitResult fit = design.dgp.backbone
                                      ? fit_ols(table, roles)
                                      : fit_simple_normal(table.values("y"));
            const double se = fit.standard_errors[proc.coefficient];
            const double diff = fit.coefficients[proc.coefficient] - proc.null_value;
            if (se == 0.0) return diff == 0.0 ? 1.0 : 0.0;  // degenerate sigma2 = 0
            const double t = diff / se;
            const double cdf = student_t_cdf(t, static_cast<int>(fit.n - fit.k));
            return std::min(1.0, 2.0 * std::min(cdf, 1.0 - cdf));
        }
        case ProcedureKind::MisSpecTest: {
            const std::string& t = proc.test_name;
            const double alpha = design.nominal_alpha;
            if (t == "chow") return test_t_invariance(table, roles, 0.5, alpha).p_value;
            const FitResult fit = design.dgp.backbone
                                      ? fit_ols(table, roles)
                                      : fit_simple_normal(table.values("y"));
            if (t == "jarque_bera") return test_normality(fit.residuals, alpha).p_value;
            if (t == "shapiro_wilk")
                return shapiro_wilk_normality(fit.residuals, alpha).p_value;
            if (t == "ljung_box") return test_independence(fit.residuals, 0, alpha).p_value;
            if (t == "reset") return test_linearity(fit, alpha).p_value;
            if (t == "white") return test_homoskedasticity(fit, alpha).p_value;
            return goldfeld_quandt_homoskedasticity(fit, alpha).p_value;
        }
        case ProcedureKind::OverIdentifying:
            return test_overidentifying(table, roles, proc.restriction_matrix,
                                        proc.restriction_values, design.nominal_alpha)
                .p_value;
    }
    throw Error("unreachable procedure kind");
}

inline std::size_t resolve_threads(const SimOptions& options, std::size_t replications) {
    std::size_t threads = options.threads;
    if (threads == 0) {
        if (const char* env = std::getenv("PR_ADEQUACY_THREADS")) {
            const long parsed = std::strtol(env, nullptr, 10);
            if (parsed > 0) threads = static_cast<std::size_t>(parsed);
        }
    }
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    return std::min(threads, replications);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Error-probability estimation
// ---------------------------------------------------------------------------

/// Estimates the procedure's actual rejection frequency under the design's
/// generating process. With the null true this is the actual size, to be
/// compared against the nominal level.
inline SimResult actual_size(const SimDesign& design, const SimOptions& options = {}) {
    detail::require(design.replications >= 100,
                    "need at least 100 replications (got " +
                        std::to_string(design.replications) + ")");
    detail::require(design.nominal_alpha > 0.0 && design.nominal_alpha < 1.0,
                    "nominal alpha must lie in (0,1)");
    detail::validate_dgp(design.dgp);
    detail::validate_procedure(design);

    const std::size_t reps = design.replications;
    SimResult out;
    out.replications = reps;
    if (options.keep_p_values) out.p_values.assign(reps, 0.0);

    // Each worker owns a disjoint index range and a private rejection count;
    // replication i is fully determined by (seed, i), so the partition does
    // not affect the result.
    const std::size_t threads = detail::resolve_threads(options, reps);
    std::vector<std::size_t> counts(threads, 0);
    std::vector<std::exception_ptr> failures(threads);

    auto worker = [&](std::size_t w) {
        const std::size_t lo = w * reps / threads;
        const std::size_t hi = (w + 1) * reps / threads;
        try {
            for (std::size_t i = lo; i < hi; ++i) {
                RandomStream stream(design.seed, i);
                const DataTable table = detail::generate_with(design.dgp, stream);
                const double p = detail::replication_p_value(design, table);
                if (p < design.nominal_alpha) ++counts[w];
                if (options.keep_p_values) out.p_values[i] = p;
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& failure : failures)
        if (failure) std::rethrow_exception(failure);

    std::size_t rejections = 0;
    for (std::size_t c : counts) rejections += c;
    out.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
    out.mc_standard_error = std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) /
                                      static_cast<double>(reps));
    return out;
}

namespace detail {

// Moves the generating process away from the procedure's null by d:
// significance tests shift the true value of the tested coefficient,
// restriction tests shift the slope, and misspecification studies grow
// their departure parameter. Deviation 0 always returns the design as is.
inline SimDesign shift_alternative(const SimDesign& design, double d) {
    require_finite(d, "deviation");
    SimDesign shifted = design;
    if (d == 0.0) return shifted;
    switch (design.procedure.kind) {
        case ProcedureKind::CoefficientSignificance:
            if (!shifted.dgp.backbone) {
                shifted.dgp.mu += d;
            } else if (design.procedure.coefficient == 0) {
                shifted.dgp.backbone->beta0 += d;
            } else {
                shifted.dgp.backbone->beta1 += d;
            }
            break;
        case ProcedureKind::OverIdentifying:
            shifted.dgp.backbone->beta1 += d;
            break;
        case ProcedureKind::MisSpecTest:
            switch (design.dgp.kind) {
                case DGPKind::ARErrors:
                    shifted.dgp.rho += d;
                    break;
                case DGPKind::HeteroskedasticByX:
                    shifted.dgp.gamma += d;
                    break;
                case DGPKind::MeanTrend:
                    shifted.dgp.delta += d;
                    break;
                default:
                    throw Error(
                        "this generating process has no departure parameter to "
                        "scale; use ARErrors, HeteroskedasticByX or MeanTrend");
            }
            break;
    }
    return shifted;
}

}  // namespace detail

/// Rejection rates along a grid of departures from the null. The first
/// entry of a grid containing 0 reproduces actual_size exactly.
inline std::vector<SimResult> power_curve(const SimDesign& design,
                                          const std::vector<double>& deviations,
                                          const SimOptions& options = {}) {
    detail::require(!deviations.empty(), "deviation grid is empty");
    std::vector<SimResult> out;
    out.reserve(deviations.size());
    for (double d : deviations)
        out.push_back(actual_size(detail::shift_alternative(design, d), options));
    return out;
}

}  // namespace probred

#endif  // PROBRED_SIMULATOR_HPP
