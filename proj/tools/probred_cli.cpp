// probred — command-line front door for the probabilistic-reduction library.
//
// Subcommands: fit, diagnose, reduce, restrict, simulate, kepler.
// Exit codes: 0 success (and adequate/accepted where a verdict applies),
//             1 inadequate/rejected verdict (a result, not a failure),
//             2 operational error (bad input, parse failure, rank deficiency).
// All randomness is seeded explicitly (--seed or the design document); there
// is no wall-clock seeding. Runtime is reported on stderr only, so output
// documents are byte-stable for a fixed seed.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "probred/json_io.hpp"

namespace {

using probred::BatteryEntry;
using probred::BatteryOptions;
using probred::DataTable;
using probred::Error;
using probred::FitResult;
using probred::Json;
using probred::MisSpecReport;
using probred::StatisticalModel;
using probred::TestForms;
using probred::VariableRoles;

struct Options {
    std::string data;
    std::string model;
    std::string restrictions;
    std::string design;
    std::string joint;
    std::string format = "text";
    std::string out;
    std::string forms = "calibrated";
    double alpha = 0.01;
    double split = 0.5;
    double noise_sd = probred::kKeplerNoiseSd;
    std::size_t lags = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool fail_on_inadequate = false;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

// Writes the chosen rendering to --out or stdout.
void emit(const Options& opt, const std::string& text, const Json& json) {
    const std::string payload = opt.format == "json" ? json.dump(2) + "\n" : text;
    if (opt.out.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream file(opt.out);
    if (!file) throw Error("cannot write file: " + opt.out);
    file << payload;
}

// The fitted equation with standard errors beneath the estimates.
std::string fit_text(const FitResult& fit) {
    std::string eq = "  " + fit.model.roles.response + " =";
    std::string se = "   ";
    for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
        const std::string term = fmt("%.6g", fit.coefficients[i]) +
                                 (fit.column_names[i] == "intercept"
                                      ? ""
                                      : " " + fit.column_names[i]);
        eq += (i == 0 ? " " : " + ") + term;
        std::string band = "(" + fmt("%.3g", fit.standard_errors[i]) + ")";
        se += std::string(eq.size() > se.size() + band.size()
                              ? eq.size() - se.size() - band.size()
                              : 1,
                          ' ') +
              band;
    }
    eq += " + u";

    std::string text = "model: " + to_string(fit.model.kind) + " " +
                       describe(fit.model.reduction) + "\n";
    text += eq + "\n" + se + "\n";
    text += "  R^2 = " + fmt("%.5f", fit.r_squared) + ", s = " + fmt("%.6g", fit.s) +
            ", n = " + std::to_string(fit.n) + "\n";
    return text;
}

std::string report_text(const MisSpecReport& report) {
    std::string text = "misspecification battery (alpha = " + fmt("%g", report.alpha) +
                       ", " + report.forms + " forms)\n";
    for (const BatteryEntry& entry : report.tests) {
        text += "  " + to_string(entry.assumption) + ": ";
        if (!entry.applicable) {
            text += "inapplicable (" + entry.note + ")\n";
            continue;
        }
        text += entry.result.name + ", statistic = " + fmt("%.6g", entry.result.statistic) +
                ", p = " + fmt("%.4f", entry.result.p_value.value()) +
                (entry.result.reject_at_alpha ? "  [reject]" : "") + "\n";
    }
    text += std::string("verdict: ") + (report.adequate ? "adequate" : "NOT adequate") + "\n";
    return text;
}

int cmd_fit(const Options& opt) {
    const DataTable table = probred::load_csv(opt.data);
    const StatisticalModel model = probred::load_model(opt.model);
    const FitResult fit = probred::fit_model(table, model);
    emit(opt, fit_text(fit), probred::fit_to_json(fit));
    return 0;
}

int cmd_diagnose(const Options& opt) {
    const DataTable table = probred::load_csv(opt.data);
    const StatisticalModel model = probred::load_model(opt.model);
    const FitResult fit = probred::fit_model(table, model);
    BatteryOptions battery_options;
    battery_options.forms =
        opt.forms == "classic" ? TestForms::Classic : TestForms::Calibrated;
    battery_options.lags = opt.lags;
    battery_options.split = opt.split;
    const MisSpecReport report =
        probred::run_battery(fit, table, opt.alpha, battery_options);
    emit(opt, fit_text(fit) + report_text(report), probred::report_to_json(report));
    return report.adequate ? 0 : 1;
}

int cmd_reduce(const Options& opt) {
    if (!opt.joint.empty()) {
        // Population mode: conditional regression implied by a joint-Normal
        // specification.
        const probred::JointReduction req = probred::load_joint(opt.joint);
        const probred::RegressionParams params =
            probred::conditional_regression(req.joint, req.target, req.conditioning);

        std::string text = "conditional regression of z" + std::to_string(req.target) +
                           " given {";
        for (std::size_t i = 0; i < req.conditioning.size(); ++i)
            text += (i ? ", " : "") + ("z" + std::to_string(req.conditioning[i]));
        text += "}\n  E = " + fmt("%.10g", params.beta0);
        for (std::size_t i = 0; i < params.beta1.size(); ++i)
            text += " + " + fmt("%.10g", params.beta1[i]) + " z" +
                    std::to_string(req.conditioning[i]);
        text += "\n  conditional variance = " + fmt("%.10g", params.sigma2) + "\n";

        Json j;
        j["target"] = req.target;
        j["conditioning"] = req.conditioning;
        j["beta0"] = params.beta0;
        j["beta1"] = params.beta1;
        j["sigma2"] = params.sigma2;
        emit(opt, text, j);
        return 0;
    }

    // Sample mode: map the declared reduction to its catalog model, fit it,
    // and check residual orthogonality against the conditioning columns.
    const DataTable table = probred::load_csv(opt.data);
    const StatisticalModel model = probred::load_model(opt.model);
    const FitResult fit = probred::fit_model(table, model);

    std::string text = "declared reduction " + describe(model.reduction) + " -> " +
                       to_string(model.kind) + "\n";
    text += "testable assumptions:";
    Json assumptions = Json::array();
    for (const probred::Assumption a : probred::assumption_list(model)) {
        text += " " + to_string(a) + ";";
        assumptions.push_back(to_string(a));
    }
    text.back() = '\n';

    Json j;
    j["model"] = probred::model_to_json(model);
    j["assumptions"] = std::move(assumptions);
    j["fit"] = probred::fit_to_json(fit);

    const int lag_order =
        model.kind == probred::ModelKind::AutoRegressive ? model.ar_order : 0;
    if (model.roles.regressors.empty() && lag_order == 0) {
        text += "conditioning set is empty: the conditional mean reduces to the "
                "unconditional mean\n";
        j["orthogonality"] = Json::array();
    } else {
        const DataTable conditioning =
            probred::build_conditioning(table, model.roles, lag_order);
        std::vector<std::string> names;
        for (const probred::Column& c : conditioning.columns()) names.push_back(c.name);
        const auto rows = probred::md_orthogonality(fit, conditioning, names);
        text += "residual orthogonality against the conditioning set:\n";
        Json orth = Json::array();
        for (const probred::MdCorrelation& row : rows) {
            text += "  corr(u, " + row.name + ") = " +
                    (row.defined ? fmt("%.3e", row.correlation) : "undefined") + "\n";
            Json o;
            o["name"] = row.name;
            o["defined"] = row.defined;
            if (row.defined) o["correlation"] = row.correlation;
            orth.push_back(std::move(o));
        }
        j["orthogonality"] = std::move(orth);
    }
    emit(opt, text + fit_text(fit), j);
    return 0;
}

int cmd_restrict(const Options& opt) {
    const DataTable table = probred::load_csv(opt.data);
    const StatisticalModel model = probred::load_model(opt.model);
    if (model.kind == probred::ModelKind::AutoRegressive)
        throw Error("restrictions on autoregressive fits are not supported");
    const probred::RestrictionSet set = probred::load_restrictions(opt.restrictions);

    const FitResult unrestricted = probred::fit_model(table, model);
    const MisSpecReport battery = probred::run_battery(unrestricted, table, opt.alpha);
    const probred::RestrictedFit restricted =
        probred::fit_restricted(table, model.roles, set.R, set.r);
    const probred::TestResult over = probred::test_overidentifying(
        table, model.roles, set.R, set.r, opt.alpha, &battery);

    std::string text;
    if (!set.description.empty()) text += "restrictions: " + set.description + "\n";
    text += "unrestricted fit\n" + fit_text(unrestricted);
    text += "restricted fit (" + std::to_string(set.R.rows()) + " restriction(s))\n" +
            fit_text(restricted.fit);
    text += "over-identifying F = " + fmt("%.6g", over.statistic) + " ~ F(" +
            std::to_string(over.null_distribution.df1) + ", " +
            std::to_string(over.null_distribution.df2) +
            "), p = " + fmt("%.4f", over.p_value.value()) + "\n";
    text += std::string("verdict at alpha = ") + fmt("%g", opt.alpha) + ": " +
            (over.reject_at_alpha ? "restrictions REJECTED" : "restrictions not rejected") +
            "\n";
    if (!battery.adequate)
        text += "warning: the embedding model failed its misspecification battery; "
                "this p-value is built on rejected assumptions\n";

    Json j;
    j["description"] = set.description;
    j["unrestricted"] = probred::fit_to_json(unrestricted);
    j["restricted"] = probred::fit_to_json(restricted.fit);
    j["restricted"]["ssr"] = restricted.ssr;
    j["test"] = probred::test_result_to_json(over);
    j["embedding_adequate"] = battery.adequate;
    emit(opt, text, j);

    if (over.reject_at_alpha) return 1;
    if (opt.fail_on_inadequate && !battery.adequate) return 1;
    return 0;
}

int cmd_simulate(const Options& opt) {
    probred::SimDesign design = probred::load_design(opt.design);
    if (opt.seed_given) design.seed = opt.seed;

    const auto start = std::chrono::steady_clock::now();
    const probred::SimResult result = probred::actual_size(design);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::fprintf(stderr, "simulate: %zu replications in %.3fs\n", result.replications,
                 elapsed.count());

    const std::string text =
        "rejection_rate = " + fmt("%.6g", result.rejection_rate) + " (mc se " +
        fmt("%.3g", result.mc_standard_error) + "), replications = " +
        std::to_string(result.replications) + ", seed = " + std::to_string(design.seed) +
        "\n";
    emit(opt, text, probred::sim_result_to_json(design, result));
    return 0;
}

int cmd_kepler(const Options& opt) {
    const probred::KeplerReport report =
        opt.data.empty()
            ? probred::run_kepler_study(opt.noise_sd, opt.seed, opt.alpha)
            : probred::run_kepler_study(probred::load_csv(opt.data), opt.alpha);
    emit(opt, report.text, probred::kepler_to_json(report));
    if (opt.fail_on_inadequate && !report.battery.adequate) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probred: statistical models as probabilistic reductions"};
    app.require_subcommand(1);
    Options opt;

    const auto add_io = [&](CLI::App* cmd) {
        cmd->add_option("--format", opt.format, "output format")
            ->check(CLI::IsMember({"text", "json"}));
        cmd->add_option("--out", opt.out, "write the report to this file");
    };
    const auto add_frame = [&](CLI::App* cmd, bool data_required = true) {
        auto* d = cmd->add_option("--data", opt.data, "CSV data file");
        auto* m = cmd->add_option("--model", opt.model, "model declaration (JSON)");
        if (data_required) {
            d->required();
            m->required();
        }
    };
    // RunConfig invariant: alpha in (0, 0.5].
    const auto add_alpha = [&](CLI::App* cmd) {
        cmd->add_option("--alpha", opt.alpha, "test level, in (0, 0.5]")
            ->check(CLI::Range(1e-12, 0.5));
    };

    CLI::App* fit = app.add_subcommand("fit", "estimate a declared model");
    add_frame(fit);
    add_io(fit);

    CLI::App* diagnose = app.add_subcommand(
        "diagnose", "run the misspecification battery (exit 1 when inadequate)");
    add_frame(diagnose);
    add_alpha(diagnose);
    add_io(diagnose);
    diagnose->add_option("--lags", opt.lags, "autocorrelation lags (0 = automatic)");
    diagnose->add_option("--split", opt.split, "t-invariance split fraction")
        ->check(CLI::Range(1e-6, 1.0 - 1e-6));
    diagnose->add_option("--forms", opt.forms, "battery test forms")
        ->check(CLI::IsMember({"calibrated", "classic"}));

    CLI::App* reduce = app.add_subcommand(
        "reduce", "reduction targets: conditional regression or declared-model check");
    reduce->add_option("--joint", opt.joint,
                       "joint-Normal specification (JSON) for the population reduction");
    add_frame(reduce, false);
    add_io(reduce);

    CLI::App* restrict_cmd = app.add_subcommand(
        "restrict", "fit and test linear restrictions (exit 1 when rejected)");
    add_frame(restrict_cmd);
    restrict_cmd->add_option("--restrictions", opt.restrictions, "restriction set (JSON)")
        ->required();
    add_alpha(restrict_cmd);
    add_io(restrict_cmd);
    restrict_cmd->add_flag("--fail-on-inadequate", opt.fail_on_inadequate,
                           "also exit 1 when the embedding model is inadequate");

    CLI::App* simulate = app.add_subcommand(
        "simulate", "estimate actual error probabilities for a simulation design");
    simulate->add_option("--design", opt.design, "simulation design (JSON)")->required();
    auto* seed_opt =
        simulate->add_option("--seed", opt.seed, "override the design's seed");
    add_io(simulate);

    CLI::App* kepler = app.add_subcommand(
        "kepler", "first-law case study (synthetic by default, or --data theta,r CSV)");
    kepler->add_option("--data", opt.data, "CSV with columns theta,r");
    kepler->add_option("--seed", opt.seed, "seed for the synthetic sample");
    kepler->add_option("--noise-sd", opt.noise_sd, "noise level of the synthetic sample");
    add_alpha(kepler);
    add_io(kepler);
    kepler->add_flag("--fail-on-inadequate", opt.fail_on_inadequate,
                     "exit 1 when the battery verdict is not adequate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    opt.seed_given = seed_opt->count() > 0;

    try {
        if (app.got_subcommand(fit)) return cmd_fit(opt);
        if (app.got_subcommand(diagnose)) return cmd_diagnose(opt);
        if (app.got_subcommand(reduce)) {
            if (opt.joint.empty() && (opt.data.empty() || opt.model.empty()))
                throw Error("reduce needs either --joint, or --data with --model");
            return cmd_reduce(opt);
        }
        if (app.got_subcommand(restrict_cmd)) return cmd_restrict(opt);
        if (app.got_subcommand(simulate)) return cmd_simulate(opt);
        if (app.got_subcommand(kepler)) return cmd_kepler(opt);
        throw Error("no subcommand selected");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
