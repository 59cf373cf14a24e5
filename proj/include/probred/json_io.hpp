// json_io.hpp
//
// JSON interchange for the library's external interfaces: model
// declarations, restriction sets, and simulation designs come in as JSON;
// fit results, misspecification reports, simulation results, and the
// Kepler study go out as JSON. Serialization uses ordered maps so a given
// value always dumps to the same byte sequence — simulation results rerun
// with the same seed compare byte-identical.
//
// Parse failures and missing/ill-typed fields are reported as probred::Error
// with the offending file and key named, so the CLI can map every input
// problem to its operational-error exit code.

#ifndef PROBRED_JSON_IO_HPP
#define PROBRED_JSON_IO_HPP

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "probred/common.hpp"
#include "probred/estimator.hpp"
#include "probred/kepler.hpp"
#include "probred/misspec.hpp"
#include "probred/model_catalog.hpp"
#include "probred/reduction.hpp"
#include "probred/simulator.hpp"
#include "probred/structural.hpp"

namespace probred {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

namespace detail {

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("failed to parse JSON from " + origin + ": " + e.what());
    }
}

template <typename T>
T json_field(const Json& j, const char* key) {
    if (!j.contains(key)) throw Error("missing JSON field '" + std::string(key) + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("JSON field '" + std::string(key) + "' has the wrong type: " + e.what());
    }
}

template <typename T>
T json_field_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return json_field<T>(j, key);
}

}  // namespace detail

/// Reads and parses a JSON document from disk.
inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return detail::parse_json_text(text, "'" + path + "'");
}

// ---------------------------------------------------------------------------
// Model declarations
// ---------------------------------------------------------------------------
//
// {
//   "distribution":   "Normal",
//   "dependence":     "Independent" | "Markov",
//   "markov_order":   1,                     // required for Markov
//   "heterogeneity":  "Identical" | "Stationary",
//   "response":       "y",
//   "regressors":     ["x1", "x2"],          // optional, default []
//   "x_interpretation": "jointly_random" | "fixed_design"   // optional
// }

inline StatisticalModel model_from_json(const Json& j) {
    ReductionAssumptions reduction;

    const std::string dist = detail::json_field<std::string>(j, "distribution");
    if (dist == "Normal") {
        reduction.distribution = Distribution::Normal;
    } else {
        throw Error("unknown distribution '" + dist + "' (supported: Normal)");
    }

    const std::string dep = detail::json_field<std::string>(j, "dependence");
    if (dep == "Independent") {
        reduction.dependence = Dependence::Independent;
    } else if (dep == "Markov") {
        reduction.dependence = Dependence::Markov;
        reduction.markov_order = detail::json_field<int>(j, "markov_order");
    } else {
        throw Error("unknown dependence '" + dep + "' (supported: Independent, Markov)");
    }

    const std::string het = detail::json_field<std::string>(j, "heterogeneity");
    if (het == "Identical") {
        reduction.heterogeneity = Heterogeneity::Identical;
    } else if (het == "Stationary") {
        reduction.heterogeneity = Heterogeneity::Stationary;
    } else {
        throw Error("unknown heterogeneity '" + het +
                    "' (supported: Identical, Stationary)");
    }

    VariableRoles roles;
    roles.response = detail::json_field<std::string>(j, "response");
    roles.regressors =
        detail::json_field_or<std::vector<std::string>>(j, "regressors", {});

    XInterpretation xi = XInterpretation::JointlyRandom;
    const std::string xs =
        detail::json_field_or<std::string>(j, "x_interpretation", "jointly_random");
    if (xs == "fixed_design") {
        xi = XInterpretation::FixedDesign;
    } else if (xs != "jointly_random") {
        throw Error("unknown x_interpretation '" + xs +
                    "' (supported: jointly_random, fixed_design)");
    }

    return specify_model(reduction, roles, xi);
}

inline StatisticalModel load_model(const std::string& path) {
    return model_from_json(load_json(path));
}

inline Json model_to_json(const StatisticalModel& model) {
    Json j;
    j["kind"] = to_string(model.kind);
    j["distribution"] = to_string(model.reduction.distribution);
    j["dependence"] = to_string(model.reduction.dependence);
    if (model.reduction.dependence == Dependence::Markov)
        j["markov_order"] = model.reduction.markov_order;
    j["heterogeneity"] = to_string(model.reduction.heterogeneity);
    j["response"] = model.roles.response;
    j["regressors"] = model.roles.regressors;
    j["x_interpretation"] = model.x_interpretation == XInterpretation::FixedDesign
                                ? "fixed_design"
                                : "jointly_random";
    return j;
}

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

inline Json fit_to_json(const FitResult& fit) {
    Json j;
    j["model"] = to_string(fit.model.kind);
    Json coeffs = Json::array();
    for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
        Json c;
        c["name"] = i < fit.column_names.size() ? fit.column_names[i]
                                                : "coef" + std::to_string(i);
        c["estimate"] = fit.coefficients[i];
        c["standard_error"] = fit.standard_errors[i];
        coeffs.push_back(std::move(c));
    }
    j["coefficients"] = std::move(coeffs);
    j["s"] = fit.s;
    j["r_squared"] = fit.r_squared;
    j["n"] = fit.n;
    j["ssr"] = fit.ssr();
    return j;
}

// ---------------------------------------------------------------------------
// Misspecification reports
// ---------------------------------------------------------------------------

namespace detail {

inline std::string null_family_name(NullFamily family) {
    switch (family) {
        case NullFamily::ChiSquare: return "chi_square";
        case NullFamily::FRatio: return "f";
        case NullFamily::StdNormal: return "std_normal";
    }
    return "?";
}

}  // namespace detail

inline Json test_result_to_json(const TestResult& result) {
    Json j;
    j["name"] = result.name;
    j["statistic"] = result.statistic;
    j["null"] = Json{{"family", detail::null_family_name(result.null_distribution.family)},
                     {"df1", result.null_distribution.df1},
                     {"df2", result.null_distribution.df2}};
    j["tail"] = result.tail == Tail::Upper ? "upper" : "two_sided";
    j["p_value"] = result.p_value.value();
    j["reject"] = result.reject_at_alpha;
    j["alpha"] = result.alpha;
    j["details"] = result.details;
    return j;
}

inline Json report_to_json(const MisSpecReport& report) {
    Json j;
    j["alpha"] = report.alpha;
    j["forms"] = report.forms;
    j["adequate"] = report.adequate;
    Json tests = Json::array();
    for (const BatteryEntry& entry : report.tests) {
        Json t;
        t["assumption"] = to_string(entry.assumption);
        t["applicable"] = entry.applicable;
        if (entry.applicable) {
            t["result"] = test_result_to_json(entry.result);
        }
        if (!entry.note.empty()) t["note"] = entry.note;
        tests.push_back(std::move(t));
    }
    j["tests"] = std::move(tests);
    return j;
}

// ---------------------------------------------------------------------------
// Restriction sets
// ---------------------------------------------------------------------------
//
// { "R": [[0, 1]], "r": [0.5], "description": "unit slope" }

struct RestrictionSet {
    Matrix R;
    std::vector<double> r;
    std::string description;
};

inline RestrictionSet restrictions_from_json(const Json& j) {
    const auto rows = detail::json_field<std::vector<std::vector<double>>>(j, "R");
    if (rows.empty()) throw Error("restriction matrix 'R' is empty");
    const std::size_t cols = rows.front().size();
    if (cols == 0) throw Error("restriction matrix 'R' has empty rows");
    Matrix R(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols)
            throw Error("restriction matrix 'R' is ragged: row " + std::to_string(i + 1) +
                        " has " + std::to_string(rows[i].size()) + " entries, expected " +
                        std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c) R(i, c) = rows[i][c];
    }
    RestrictionSet set;
    set.R = std::move(R);
    set.r = detail::json_field<std::vector<double>>(j, "r");
    if (set.r.size() != rows.size())
        throw Error("restriction values 'r' has " + std::to_string(set.r.size()) +
                    " entries, expected " + std::to_string(rows.size()));
    set.description = detail::json_field_or<std::string>(j, "description", "");
    return set;
}

inline RestrictionSet load_restrictions(const std::string& path) {
    return restrictions_from_json(load_json(path));
}

// ---------------------------------------------------------------------------
// Joint-Normal reduction requests
// ---------------------------------------------------------------------------
//
// {
//   "mean": [0.0, 1.0],
//   "covariance": [[1.0, 0.5], [0.5, 2.0]],
//   "target": 0,
//   "conditioning": [1]
// }

struct JointReduction {
    JointNormalSpec joint;
    std::size_t target = 0;
    std::vector<std::size_t> conditioning;
};

inline JointReduction joint_from_json(const Json& j) {
    JointReduction req;
    req.joint.mean = detail::json_field<std::vector<double>>(j, "mean");
    const auto rows = detail::json_field<std::vector<std::vector<double>>>(j, "covariance");
    const std::size_t m = req.joint.mean.size();
    if (rows.size() != m)
        throw Error("covariance has " + std::to_string(rows.size()) + " rows, mean has " +
                    std::to_string(m) + " entries");
    Matrix cov(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].size() != m)
            throw Error("covariance row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[i].size()) + " entries, expected " +
                        std::to_string(m));
        for (std::size_t c = 0; c < m; ++c) cov(i, c) = rows[i][c];
    }
    req.joint.covariance = std::move(cov);
    req.target = detail::json_field<std::size_t>(j, "target");
    req.conditioning = detail::json_field<std::vector<std::size_t>>(j, "conditioning");
    return req;
}

inline JointReduction load_joint(const std::string& path) {
    return joint_from_json(load_json(path));
}

// ---------------------------------------------------------------------------
// Simulation designs and results
// ---------------------------------------------------------------------------
//
// {
//   "dgp": {
//     "kind": "niid_normal" | "ar_errors" | "heteroskedastic_by_x"
//             | "mean_trend" | "skewed_errors",
//     "n": 100, "mu": 0.0, "sigma2": 1.0,
//     "rho": 0.5, "gamma": 1.0, "delta": 1.0, "shape": 3.0,
//     "ar_burn_in": 100,
//     "backbone": { "beta0": 1.0, "beta1": 0.5,
//                   "x_design": "equispaced" | "normal_draws" }   // optional
//   },
//   "procedure": {
//     "kind": "coefficient_significance" | "misspec_test" | "over_identifying",
//     "coefficient": 0, "null_value": 0.0,      // coefficient_significance
//     "test_name": "ljung_box",                 // misspec_test
//     "R": [[0, 1]], "r": [0.5]                 // over_identifying
//   },
//   "alpha": 0.05, "replications": 10000, "seed": 42
// }

namespace detail {

inline DGPKind dgp_kind_from_string(const std::string& s) {
    if (s == "niid_normal") return DGPKind::NIIDNormal;
    if (s == "ar_errors") return DGPKind::ARErrors;
    if (s == "heteroskedastic_by_x") return DGPKind::HeteroskedasticByX;
    if (s == "mean_trend") return DGPKind::MeanTrend;
    if (s == "skewed_errors") return DGPKind::SkewedErrors;
    throw Error("unknown dgp kind '" + s +
                "' (supported: niid_normal, ar_errors, heteroskedastic_by_x, "
                "mean_trend, skewed_errors)");
}

inline std::string dgp_kind_to_string(DGPKind kind) {
    switch (kind) {
        case DGPKind::NIIDNormal: return "niid_normal";
        case DGPKind::ARErrors: return "ar_errors";
        case DGPKind::HeteroskedasticByX: return "heteroskedastic_by_x";
        case DGPKind::MeanTrend: return "mean_trend";
        case DGPKind::SkewedErrors: return "skewed_errors";
    }
    return "?";
}

}  // namespace detail

inline SimDesign design_from_json(const Json& j) {
    SimDesign design;

    if (!j.contains("dgp")) throw Error("missing JSON field 'dgp'");
    const Json& dj = j.at("dgp");
    design.dgp.kind =
        detail::dgp_kind_from_string(detail::json_field<std::string>(dj, "kind"));
    design.dgp.n = detail::json_field<std::size_t>(dj, "n");
    design.dgp.mu = detail::json_field_or<double>(dj, "mu", 0.0);
    design.dgp.sigma2 = detail::json_field_or<double>(dj, "sigma2", 1.0);
    design.dgp.rho = detail::json_field_or<double>(dj, "rho", 0.0);
    design.dgp.gamma = detail::json_field_or<double>(dj, "gamma", 0.0);
    design.dgp.delta = detail::json_field_or<double>(dj, "delta", 0.0);
    design.dgp.shape = detail::json_field_or<double>(dj, "shape", 3.0);
    design.dgp.ar_burn_in =
        detail::json_field_or<std::size_t>(dj, "ar_burn_in", 100);
    if (dj.contains("backbone")) {
        const Json& bj = dj.at("backbone");
        RegressionBackbone backbone;
        backbone.beta0 = detail::json_field_or<double>(bj, "beta0", 0.0);
        backbone.beta1 = detail::json_field_or<double>(bj, "beta1", 0.0);
        const std::string xs =
            detail::json_field_or<std::string>(bj, "x_design", "equispaced");
        if (xs == "equispaced") {
            backbone.x_design = XDesign::Equispaced;
        } else if (xs == "normal_draws") {
            backbone.x_design = XDesign::NormalDraws;
        } else {
            throw Error("unknown x_design '" + xs +
                        "' (supported: equispaced, normal_draws)");
        }
        design.dgp.backbone = backbone;
    }

    if (!j.contains("procedure")) throw Error("missing JSON field 'procedure'");
    const Json& pj = j.at("procedure");
    const std::string pk = detail::json_field<std::string>(pj, "kind");
    if (pk == "coefficient_significance") {
        design.procedure.kind = ProcedureKind::CoefficientSignificance;
        design.procedure.coefficient =
            detail::json_field_or<std::size_t>(pj, "coefficient", 0);
        design.procedure.null_value = detail::json_field_or<double>(pj, "null_value", 0.0);
    } else if (pk == "misspec_test") {
        design.procedure.kind = ProcedureKind::MisSpecTest;
        design.procedure.test_name = detail::json_field<std::string>(pj, "test_name");
    } else if (pk == "over_identifying") {
        design.procedure.kind = ProcedureKind::OverIdentifying;
        const RestrictionSet set = restrictions_from_json(pj);
        design.procedure.restriction_matrix = set.R;
        design.procedure.restriction_values = set.r;
    } else {
        throw Error("unknown procedure kind '" + pk +
                    "' (supported: coefficient_significance, misspec_test, "
                    "over_identifying)");
    }

    design.nominal_alpha = detail::json_field_or<double>(j, "alpha", 0.05);
    design.replications = detail::json_field<std::size_t>(j, "replications");
    design.seed = detail::json_field<std::uint64_t>(j, "seed");
    return design;
}

inline SimDesign load_design(const std::string& path) {
    return design_from_json(load_json(path));
}

inline Json design_to_json(const SimDesign& design) {
    Json dj;
    dj["kind"] = detail::dgp_kind_to_string(design.dgp.kind);
    dj["n"] = design.dgp.n;
    dj["mu"] = design.dgp.mu;
    dj["sigma2"] = design.dgp.sigma2;
    switch (design.dgp.kind) {
        case DGPKind::ARErrors:
            dj["rho"] = design.dgp.rho;
            dj["ar_burn_in"] = design.dgp.ar_burn_in;
            break;
        case DGPKind::HeteroskedasticByX:
            dj["gamma"] = design.dgp.gamma;
            break;
        case DGPKind::MeanTrend:
            dj["delta"] = design.dgp.delta;
            break;
        case DGPKind::SkewedErrors:
            dj["shape"] = design.dgp.shape;
            break;
        case DGPKind::NIIDNormal:
            break;
    }
    if (design.dgp.backbone) {
        dj["backbone"] =
            Json{{"beta0", design.dgp.backbone->beta0},
                 {"beta1", design.dgp.backbone->beta1},
                 {"x_design", design.dgp.backbone->x_design == XDesign::Equispaced
                                  ? "equispaced"
                                  : "normal_draws"}};
    }

    Json pj;
    switch (design.procedure.kind) {
        case ProcedureKind::CoefficientSignificance:
            pj["kind"] = "coefficient_significance";
            pj["coefficient"] = design.procedure.coefficient;
            pj["null_value"] = design.procedure.null_value;
            break;
        case ProcedureKind::MisSpecTest:
            pj["kind"] = "misspec_test";
            pj["test_name"] = design.procedure.test_name;
            break;
        case ProcedureKind::OverIdentifying: {
            pj["kind"] = "over_identifying";
            const Matrix& R = design.procedure.restriction_matrix;
            Json rows = Json::array();
            for (std::size_t i = 0; i < R.rows(); ++i) {
                Json row = Json::array();
                for (std::size_t c = 0; c < R.cols(); ++c) row.push_back(R(i, c));
                rows.push_back(std::move(row));
            }
            pj["R"] = std::move(rows);
            pj["r"] = design.procedure.restriction_values;
            break;
        }
    }

    Json j;
    j["dgp"] = std::move(dj);
    j["procedure"] = std::move(pj);
    j["alpha"] = design.nominal_alpha;
    j["replications"] = design.replications;
    j["seed"] = design.seed;
    return j;
}

/// Result document: the design echoed back plus the estimates. Runtime is
/// deliberately not included — the document must be byte-identical across
/// reruns and thread counts for a fixed seed.
inline Json sim_result_to_json(const SimDesign& design, const SimResult& result) {
    Json j;
    j["design"] = design_to_json(design);
    j["rejection_rate"] = result.rejection_rate;
    j["mc_standard_error"] = result.mc_standard_error;
    j["replications"] = result.replications;
    return j;
}

// ---------------------------------------------------------------------------
// Kepler study
// ---------------------------------------------------------------------------

inline Json kepler_to_json(const KeplerReport& report) {
    Json j;
    j["synthetic"] = report.synthetic;
    j["fit"] = fit_to_json(report.fit);
    j["battery"] = report_to_json(report.battery);
    if (report.structure) {
        j["structure"] = Json{{"alpha0", report.structure->alpha0},
                              {"alpha1", report.structure->alpha1},
                              {"kappa", report.structure->kappa},
                              {"d", report.structure->d},
                              {"mg", report.structure->mg}};
    } else {
        j["structure"] = nullptr;
    }
    j["text"] = report.text;
    return j;
}

}  // namespace probred

#endif  // PROBRED_JSON_IO_HPP
