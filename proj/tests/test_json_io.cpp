// Tests for the JSON interchange layer: model declarations, restriction
// sets, joint-Normal requests, and simulation designs parse with precise
// error reporting; fit results, battery reports, simulation results, and
// the Kepler study serialize deterministically.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "probred/json_io.hpp"

namespace {

using probred::DataTable;
using probred::Error;
using probred::Json;
using probred::ModelKind;
using probred::StatisticalModel;

// Runs `fn`, requires that it throws probred::Error, and hands back the
// message so the caller can check that the offending key or value is named.
template <typename Fn>
std::string error_message(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected a probred::Error");
    return "";
}

// Writes `text` to a fresh file in the system temp directory and returns its
// path; each call uses a distinct name.
std::string write_temp_file(const std::string& text) {
    static int counter = 0;
    const std::string path =
        (std::filesystem::temp_directory_path() /
         ("probred_json_test_" + std::to_string(++counter) + ".json"))
            .string();
    std::ofstream out(path);
    out << text;
    return path;
}

// A deterministic regression sample large enough for every battery test.
DataTable battery_sample() {
    probred::DGPSpec dgp;
    dgp.kind = probred::DGPKind::NIIDNormal;
    dgp.n = 60;
    dgp.backbone = probred::RegressionBackbone{1.0, 0.5, probred::XDesign::Equispaced};
    return probred::generate(dgp, 20260815);
}

}  // namespace

// ---------------------------------------------------------------------------
// Model declarations
// ---------------------------------------------------------------------------

TEST_CASE("model declarations parse into their catalog models") {
    const Json lr = Json::parse(R"({
        "distribution": "Normal",
        "dependence": "Independent",
        "heterogeneity": "Identical",
        "response": "y",
        "regressors": ["x1", "x2"]
    })");
    const StatisticalModel m = probred::model_from_json(lr);
    REQUIRE(m.kind == ModelKind::LinearRegression);
    REQUIRE(m.roles.response == "y");
    REQUIRE(m.roles.regressors == std::vector<std::string>{"x1", "x2"});
    REQUIRE(m.x_interpretation == probred::XInterpretation::JointlyRandom);

    Json fixed = lr;
    fixed["x_interpretation"] = "fixed_design";
    REQUIRE(probred::model_from_json(fixed).kind == ModelKind::GaussLinear);

    Json univariate = lr;
    univariate.erase("regressors");
    REQUIRE(probred::model_from_json(univariate).kind == ModelKind::SimpleNormal);
}

TEST_CASE("a Markov declaration parses into an autoregression") {
    const Json decl = Json::parse(R"({
        "distribution": "Normal",
        "dependence": "Markov",
        "markov_order": 2,
        "heterogeneity": "Stationary",
        "response": "y"
    })");
    const StatisticalModel m = probred::model_from_json(decl);
    REQUIRE(m.kind == ModelKind::AutoRegressive);
    REQUIRE(m.ar_order == 2);

    Json missing_order = decl;
    missing_order.erase("markov_order");
    const std::string msg =
        error_message([&] { (void)probred::model_from_json(missing_order); });
    REQUIRE(msg.find("markov_order") != std::string::npos);
}

TEST_CASE("declaration errors name the offending field or value") {
    const Json good = Json::parse(R"({
        "distribution": "Normal",
        "dependence": "Independent",
        "heterogeneity": "Identical",
        "response": "y",
        "regressors": ["x"]
    })");

    Json no_response = good;
    no_response.erase("response");
    REQUIRE(error_message([&] { (void)probred::model_from_json(no_response); })
                .find("'response'") != std::string::npos);

    Json bad_dist = good;
    bad_dist["distribution"] = "Cauchy";
    REQUIRE(error_message([&] { (void)probred::model_from_json(bad_dist); })
                .find("Cauchy") != std::string::npos);

    Json bad_dep = good;
    bad_dep["dependence"] = "Exchangeable";
    REQUIRE(error_message([&] { (void)probred::model_from_json(bad_dep); })
                .find("Exchangeable") != std::string::npos);

    Json bad_het = good;
    bad_het["heterogeneity"] = "Trending";
    REQUIRE(error_message([&] { (void)probred::model_from_json(bad_het); })
                .find("Trending") != std::string::npos);

    Json bad_xi = good;
    bad_xi["x_interpretation"] = "mystery";
    REQUIRE(error_message([&] { (void)probred::model_from_json(bad_xi); })
                .find("mystery") != std::string::npos);

    // A wrong-typed field reports the key, not just the library's cast error.
    Json bad_type = good;
    bad_type["regressors"] = 7;
    REQUIRE(error_message([&] { (void)probred::model_from_json(bad_type); })
                .find("'regressors'") != std::string::npos);
}

TEST_CASE("model_to_json echoes a declaration that parses back to the same model") {
    const Json decl = Json::parse(R"({
        "distribution": "Normal",
        "dependence": "Markov",
        "markov_order": 3,
        "heterogeneity": "Stationary",
        "response": "rate"
    })");
    const StatisticalModel m = probred::model_from_json(decl);
    const Json echoed = probred::model_to_json(m);
    REQUIRE(echoed.at("kind") == "AutoRegressive");
    REQUIRE(echoed.at("markov_order") == 3);

    const StatisticalModel again = probred::model_from_json(echoed);
    REQUIRE(again.kind == m.kind);
    REQUIRE(again.ar_order == m.ar_order);
    REQUIRE(again.roles.response == m.roles.response);
}

// ---------------------------------------------------------------------------
// Restriction sets and joint-Normal requests
// ---------------------------------------------------------------------------

TEST_CASE("restriction sets parse and validate their shape") {
    const probred::RestrictionSet set = probred::restrictions_from_json(
        Json::parse(R"({"R": [[0, 1]], "r": [0.5], "description": "unit slope"})"));
    REQUIRE(set.R.rows() == 1);
    REQUIRE(set.R.cols() == 2);
    REQUIRE(set.R(0, 0) == 0.0);
    REQUIRE(set.R(0, 1) == 1.0);
    REQUIRE(set.r == std::vector<double>{0.5});
    REQUIRE(set.description == "unit slope");

    REQUIRE(error_message([] {
                (void)probred::restrictions_from_json(
                    Json::parse(R"({"R": [[0, 1], [1]], "r": [0, 0]})"));
            }).find("ragged") != std::string::npos);
    REQUIRE(error_message([] {
                (void)probred::restrictions_from_json(
                    Json::parse(R"({"R": [[0, 1]], "r": [0.5, 1.0]})"));
            }).find("expected 1") != std::string::npos);
    REQUIRE(error_message([] {
                (void)probred::restrictions_from_json(Json::parse(R"({"R": [], "r": []})"));
            }).find("empty") != std::string::npos);
}

TEST_CASE("joint-Normal requests parse into a reduction the engine accepts") {
    const probred::JointReduction req = probred::joint_from_json(Json::parse(R"({
        "mean": [1.0, 2.0, 0.0],
        "covariance": [[2.0, 0.5, 0.2], [0.5, 1.0, 0.1], [0.2, 0.1, 1.5]],
        "target": 0,
        "conditioning": [1, 2]
    })"));
    REQUIRE(req.joint.dimension() == 3);
    REQUIRE(req.target == 0);
    REQUIRE(req.conditioning == std::vector<std::size_t>{1, 2});

    // The parsed request feeds straight into the reduction engine.
    const probred::RegressionParams params =
        probred::conditional_regression(req.joint, req.target, req.conditioning);
    REQUIRE(params.beta1.size() == 2);
    REQUIRE(params.sigma2 > 0.0);

    REQUIRE(error_message([] {
                (void)probred::joint_from_json(Json::parse(
                    R"({"mean": [0, 0], "covariance": [[1, 0]], "target": 0, "conditioning": [1]})"));
            }).find("rows") != std::string::npos);
    REQUIRE(error_message([] {
                (void)probred::joint_from_json(Json::parse(
                    R"({"mean": [0, 0], "covariance": [[1, 0], [0]], "target": 0, "conditioning": [1]})"));
            }).find("row 2") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Simulation designs
// ---------------------------------------------------------------------------

TEST_CASE("simulation designs round-trip through their JSON echo") {
    // One design per procedure kind; parse -> echo -> parse must reproduce
    // the same document byte for byte.
    const std::vector<std::string> documents = {
        R"({
            "dgp": {"kind": "ar_errors", "n": 100, "rho": 0.5},
            "procedure": {"kind": "coefficient_significance", "coefficient": 0},
            "alpha": 0.05, "replications": 500, "seed": 7
        })",
        R"({
            "dgp": {"kind": "niid_normal", "n": 80,
                    "backbone": {"beta0": 1.0, "beta1": 0.5, "x_design": "equispaced"}},
            "procedure": {"kind": "misspec_test", "test_name": "reset"},
            "replications": 200, "seed": 11
        })",
        R"({
            "dgp": {"kind": "heteroskedastic_by_x", "n": 60, "gamma": 2.0,
                    "backbone": {"beta0": 0.0, "beta1": 1.0, "x_design": "normal_draws"}},
            "procedure": {"kind": "over_identifying", "R": [[0, 1]], "r": [1.0]},
            "alpha": 0.01, "replications": 300, "seed": 13
        })",
    };
    for (const std::string& text : documents) {
        const probred::SimDesign design =
            probred::design_from_json(Json::parse(text));
        const Json echo = probred::design_to_json(design);
        const probred::SimDesign reparsed = probred::design_from_json(echo);
        REQUIRE(probred::design_to_json(reparsed).dump() == echo.dump());
    }

    // Defaults fill in when optional fields are absent.
    const probred::SimDesign d =
        probred::design_from_json(Json::parse(documents[1]));
    REQUIRE(d.nominal_alpha == 0.05);
    REQUIRE(d.dgp.mu == 0.0);
    REQUIRE(d.dgp.sigma2 == 1.0);
    REQUIRE(d.procedure.kind == probred::ProcedureKind::MisSpecTest);
    REQUIRE(d.procedure.test_name == "reset");
}

TEST_CASE("design parsing reports missing and unknown pieces by name") {
    const std::string base = R"({
        "dgp": {"kind": "niid_normal", "n": 100},
        "procedure": {"kind": "coefficient_significance"},
        "replications": 100, "seed": 1
    })";

    Json no_dgp = Json::parse(base);
    no_dgp.erase("dgp");
    REQUIRE(error_message([&] { (void)probred::design_from_json(no_dgp); })
                .find("'dgp'") != std::string::npos);

    Json no_procedure = Json::parse(base);
    no_procedure.erase("procedure");
    REQUIRE(error_message([&] { (void)probred::design_from_json(no_procedure); })
                .find("'procedure'") != std::string::npos);

    Json no_reps = Json::parse(base);
    no_reps.erase("replications");
    REQUIRE(error_message([&] { (void)probred::design_from_json(no_reps); })
                .find("'replications'") != std::string::npos);

    Json no_seed = Json::parse(base);
    no_seed.erase("seed");
    REQUIRE(error_message([&] { (void)probred::design_from_json(no_seed); })
                .find("'seed'") != std::string::npos);

    Json bad_kind = Json::parse(base);
    bad_kind["dgp"]["kind"] = "lognormal";
    REQUIRE(error_message([&] { (void)probred::design_from_json(bad_kind); })
                .find("lognormal") != std::string::npos);

    Json bad_proc = Json::parse(base);
    bad_proc["procedure"]["kind"] = "bootstrap";
    REQUIRE(error_message([&] { (void)probred::design_from_json(bad_proc); })
                .find("bootstrap") != std::string::npos);

    Json bad_x = Json::parse(base);
    bad_x["dgp"]["backbone"] = Json{{"beta0", 0.0}, {"beta1", 1.0}, {"x_design", "latin"}};
    REQUIRE(error_message([&] { (void)probred::design_from_json(bad_x); })
                .find("latin") != std::string::npos);
}

TEST_CASE("simulation results serialize without runtime and byte-identically") {
    const probred::SimDesign design = probred::design_from_json(Json::parse(R"({
        "dgp": {"kind": "niid_normal", "n": 40},
        "procedure": {"kind": "coefficient_significance", "coefficient": 0},
        "alpha": 0.05, "replications": 200, "seed": 4242
    })"));

    probred::SimOptions serial;
    serial.threads = 1;
    probred::SimOptions parallel;
    parallel.threads = 3;
    const probred::SimResult a = probred::actual_size(design, serial);
    const probred::SimResult b = probred::actual_size(design, parallel);

    const std::string dump_a = probred::sim_result_to_json(design, a).dump(2);
    const std::string dump_b = probred::sim_result_to_json(design, b).dump(2);
    REQUIRE(dump_a == dump_b);
    REQUIRE(dump_a.find("runtime") == std::string::npos);
    REQUIRE(dump_a.find("\"rejection_rate\"") != std::string::npos);
    REQUIRE(dump_a.find("\"seed\": 4242") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Fit results and battery reports
// ---------------------------------------------------------------------------

TEST_CASE("fit results serialize with named coefficients and the fit summary") {
    const DataTable table = battery_sample();
    const probred::VariableRoles roles{"y", {"x"}};
    const probred::FitResult fit = probred::fit_ols(table, roles);

    const Json j = probred::fit_to_json(fit);
    REQUIRE(j.at("model") == "LinearRegression");
    REQUIRE(j.at("coefficients").size() == 2);
    REQUIRE(j.at("coefficients")[0].at("name") == "intercept");
    REQUIRE(j.at("coefficients")[1].at("name") == "x");
    REQUIRE(j.at("coefficients")[1].at("estimate").get<double>() ==
            fit.coefficients[1]);
    REQUIRE(j.at("coefficients")[1].at("standard_error").get<double>() ==
            fit.standard_errors[1]);
    REQUIRE(j.at("n").get<std::size_t>() == 60);
    REQUIRE(j.at("ssr").get<double>() == fit.ssr());
}

TEST_CASE("battery reports serialize one entry per assumption") {
    const DataTable table = battery_sample();
    const probred::VariableRoles roles{"y", {"x"}};
    const probred::FitResult fit = probred::fit_ols(table, roles);
    const probred::MisSpecReport report = probred::run_battery(fit, table);

    const Json j = probred::report_to_json(report);
    REQUIRE(j.at("alpha").get<double>() == 0.01);
    REQUIRE(j.at("forms") == "calibrated");
    REQUIRE(j.at("adequate").get<bool>() == report.adequate);
    REQUIRE(j.at("tests").size() == 5);
    REQUIRE(j.at("tests")[0].at("assumption") == "normality");
    for (const Json& t : j.at("tests")) {
        // `result` is present exactly when the test ran.
        REQUIRE(t.contains("result") == t.at("applicable").get<bool>());
        if (t.at("applicable").get<bool>()) {
            const Json& r = t.at("result");
            REQUIRE(r.at("p_value").get<double>() >= 0.0);
            REQUIRE(r.at("p_value").get<double>() <= 1.0);
            REQUIRE((r.at("null").at("family") == "chi_square" ||
                     r.at("null").at("family") == "f" ||
                     r.at("null").at("family") == "std_normal"));
        }
    }
}

// ---------------------------------------------------------------------------
// Files and the Kepler study
// ---------------------------------------------------------------------------

TEST_CASE("load_json reports unreadable and malformed files") {
    REQUIRE(error_message([] {
                (void)probred::load_json("/nonexistent/probred.json");
            }).find("cannot open") != std::string::npos);

    const std::string path = write_temp_file("{\"mean\": [1, ");
    const std::string msg = error_message([&] { (void)probred::load_json(path); });
    REQUIRE(msg.find("failed to parse JSON") != std::string::npos);
    REQUIRE(msg.find(path) != std::string::npos);
}

TEST_CASE("load_model and load_restrictions read their documents from disk") {
    const std::string model_path = write_temp_file(R"({
        "distribution": "Normal",
        "dependence": "Independent",
        "heterogeneity": "Identical",
        "response": "y",
        "regressors": ["x"]
    })");
    REQUIRE(probred::load_model(model_path).kind == ModelKind::LinearRegression);

    const std::string set_path = write_temp_file(R"({"R": [[1, 0]], "r": [0]})");
    REQUIRE(probred::load_restrictions(set_path).R.rows() == 1);
}

TEST_CASE("the Kepler study serializes with and without a structural reading") {
    const probred::KeplerReport clean = probred::run_kepler_study(0.0, 0, 0.01);
    const Json j = probred::kepler_to_json(clean);
    REQUIRE(j.at("synthetic").get<bool>());
    REQUIRE(j.at("structure").is_object());
    REQUIRE(j.at("structure").at("mg").get<double>() == clean.structure->mg);
    REQUIRE(j.at("battery").at("adequate").get<bool>());
    REQUIRE(j.at("text").get<std::string>() == clean.text);

    // A fit whose coefficients admit no positive shortest distance reports
    // a null structure instead.
    const std::size_t n = 28;
    std::vector<double> theta(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -0.5 + static_cast<double>(i) / static_cast<double>(n - 1);
        theta[i] = std::acos(x);
        r[i] = 1.0 / (0.5 - 0.6 * x);
    }
    const probred::KeplerReport broken = probred::run_kepler_study(
        DataTable({probred::Column{"theta", theta}, probred::Column{"r", r}}), 0.01);
    const Json jb = probred::kepler_to_json(broken);
    REQUIRE(jb.at("structure").is_null());
    REQUIRE_FALSE(jb.at("synthetic").get<bool>());
}
