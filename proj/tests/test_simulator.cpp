// Tests for the Monte Carlo engine: data generation, actual-size
// estimation, power curves, and bit-level reproducibility.
//
// Most checks here are self-oracled simulations: the expected values follow
// from the law of large numbers with the stated Monte Carlo error, so the
// bounds are wide enough that a correct implementation passes for any seed
// and an incorrect one (wrong variance convention, broken stream split,
// biased quantile transform) lands far outside. The skewness constant
// 2/sqrt(3) for standardized gamma(3) errors is textbook.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "probred/simulator.hpp"

namespace {

using probred::DataTable;
using probred::DGPKind;
using probred::DGPSpec;
using probred::Procedure;
using probred::ProcedureKind;
using probred::RegressionBackbone;
using probred::SimDesign;
using probred::SimOptions;
using probred::SimResult;
using probred::XDesign;

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Biased central moments, matching the convention of the normality test.
double central_moment(const std::vector<double>& v, int order) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += std::pow(x - m, order);
    return s / static_cast<double>(v.size());
}

double sample_skewness(const std::vector<double>& v) {
    return central_moment(v, 3) / std::pow(central_moment(v, 2), 1.5);
}

double sample_kurtosis(const std::vector<double>& v) {
    const double m2 = central_moment(v, 2);
    return central_moment(v, 4) / (m2 * m2);
}

double lag1_autocorrelation(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        den += (v[i] - m) * (v[i] - m);
        if (i + 1 < v.size()) num += (v[i] - m) * (v[i + 1] - m);
    }
    return num / den;
}

SimDesign mean_test_design() {
    SimDesign design;
    design.dgp.kind = DGPKind::NIIDNormal;
    design.dgp.n = 100;
    design.procedure.kind = ProcedureKind::CoefficientSignificance;
    design.procedure.coefficient = 0;
    design.procedure.null_value = 0.0;
    design.nominal_alpha = 0.05;
    design.replications = 10000;
    design.seed = 71119;
    return design;
}

}  // namespace

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

TEST_CASE("zero error variance collapses the series onto its mean") {
    DGPSpec dgp;
    dgp.sigma2 = 0.0;
    dgp.mu = 3.25;
    dgp.n = 25;
    const DataTable t = probred::generate(dgp, 1);
    for (double y : t.values("y")) REQUIRE(y == 3.25);

    dgp.backbone = RegressionBackbone{1.0, -0.5, XDesign::Equispaced};
    const DataTable tb = probred::generate(dgp, 1);
    const auto& x = tb.values("x");
    const auto& y = tb.values("y");
    REQUIRE(x.front() == -2.0);
    REQUIRE(x.back() == 2.0);
    for (std::size_t i = 0; i < tb.n(); ++i)
        REQUIRE(std::fabs(y[i] - (1.0 - 0.5 * x[i])) < 1e-15);
}

TEST_CASE("generation rejects invalid process parameters") {
    DGPSpec dgp;
    dgp.n = 19;
    REQUIRE_THROWS_AS(probred::generate(dgp, 0), probred::Error);

    dgp.n = 50;
    dgp.sigma2 = -1.0;
    REQUIRE_THROWS_AS(probred::generate(dgp, 0), probred::Error);

    dgp.sigma2 = 1.0;
    dgp.kind = DGPKind::ARErrors;
    dgp.rho = 1.0;
    REQUIRE_THROWS_AS(probred::generate(dgp, 0), probred::Error);

    dgp.kind = DGPKind::HeteroskedasticByX;
    dgp.gamma = 0.5;  // no backbone to supply x
    REQUIRE_THROWS_AS(probred::generate(dgp, 0), probred::Error);

    dgp.kind = DGPKind::SkewedErrors;
    dgp.shape = 0.0;
    REQUIRE_THROWS_AS(probred::generate(dgp, 0), probred::Error);
}

TEST_CASE("the same seed reproduces the same sample exactly") {
    DGPSpec dgp;
    dgp.kind = DGPKind::ARErrors;
    dgp.rho = 0.4;
    dgp.n = 60;
    dgp.backbone = RegressionBackbone{0.0, 1.0, XDesign::NormalDraws};

    const DataTable a = probred::generate(dgp, 987654321);
    const DataTable b = probred::generate(dgp, 987654321);
    REQUIRE(a.values("y") == b.values("y"));
    REQUIRE(a.values("x") == b.values("x"));

    const DataTable c = probred::generate(dgp, 987654322);
    REQUIRE(a.values("y") != c.values("y"));
}

TEST_CASE("independent normal draws have the right moments") {
    DGPSpec dgp;
    dgp.n = 100000;
    const DataTable t = probred::generate(dgp, 20260815);
    const auto& y = t.values("y");
    REQUIRE(std::fabs(sample_mean(y)) < 4.0 / std::sqrt(100000.0));
    REQUIRE(std::fabs(sample_kurtosis(y) - 3.0) < 0.1);
}

TEST_CASE("autoregressive errors show the requested persistence") {
    DGPSpec dgp;
    dgp.kind = DGPKind::ARErrors;
    dgp.rho = 0.5;
    dgp.n = 100000;
    const DataTable t = probred::generate(dgp, 5150);
    REQUIRE(std::fabs(lag1_autocorrelation(t.values("y")) - 0.5) < 0.02);
}

TEST_CASE("heteroskedastic errors scale with the regressor") {
    DGPSpec dgp;
    dgp.kind = DGPKind::HeteroskedasticByX;
    dgp.gamma = 2.0;
    dgp.n = 100000;
    dgp.backbone = RegressionBackbone{0.0, 0.0, XDesign::Equispaced};
    const DataTable t = probred::generate(dgp, 424242);
    const auto& x = t.values("x");
    const auto& y = t.values("y");  // mean is 0, so y is the error itself

    double inner = 0.0, outer = 0.0;
    std::size_t n_inner = 0, n_outer = 0;
    for (std::size_t i = 0; i < t.n(); ++i) {
        if (std::fabs(x[i]) < 1.0) {
            inner += y[i] * y[i];
            ++n_inner;
        } else {
            outer += y[i] * y[i];
            ++n_outer;
        }
    }
    // E[(1 + 2|x|)^2] with |x| uniform: 13/3 on [0,1), 49/3 on [1,2];
    // the variance ratio is 49/13 = 3.77.
    const double ratio = (outer / n_outer) / (inner / n_inner);
    REQUIRE(ratio > 3.0);
    REQUIRE(ratio < 4.6);
}

TEST_CASE("a mean trend drifts by delta over the sample") {
    DGPSpec dgp;
    dgp.kind = DGPKind::MeanTrend;
    dgp.delta = 5.0;
    dgp.n = 100000;
    const DataTable t = probred::generate(dgp, 31337);
    const auto& y = t.values("y");
    const std::size_t half = y.size() / 2;
    const std::vector<double> first(y.begin(), y.begin() + half);
    const std::vector<double> second(y.begin() + half, y.end());
    // Trend mean is delta/4 in the first half and 3*delta/4 in the second.
    REQUIRE(std::fabs((sample_mean(second) - sample_mean(first)) - 2.5) < 0.05);
}

TEST_CASE("skewed errors have zero mean, unit variance and gamma skewness") {
    DGPSpec dgp;
    dgp.kind = DGPKind::SkewedErrors;
    dgp.shape = 3.0;
    dgp.n = 200000;
    const DataTable t = probred::generate(dgp, 777);
    const auto& y = t.values("y");
    REQUIRE(std::fabs(sample_mean(y)) < 0.02);
    REQUIRE(std::fabs(central_moment(y, 2) - 1.0) < 0.03);
    // Standardized gamma(3): skewness 2/sqrt(3).
    REQUIRE(std::fabs(sample_skewness(y) - 1.1547005383792517) < 0.08);
}

// ---------------------------------------------------------------------------
// actual_size
// ---------------------------------------------------------------------------

TEST_CASE("the mean t test recovers its nominal size under the true model") {
    const SimResult r = probred::actual_size(mean_test_design());
    REQUIRE(r.replications == 10000);
    REQUIRE(r.rejection_rate > 0.04);
    REQUIRE(r.rejection_rate < 0.06);
    REQUIRE(r.mc_standard_error ==
            std::sqrt(r.rejection_rate * (1.0 - r.rejection_rate) / 10000.0));
}

TEST_CASE("autocorrelated errors inflate the t test far beyond its nominal size") {
    SimDesign design = mean_test_design();
    design.dgp.kind = DGPKind::ARErrors;
    design.dgp.rho = 0.5;
    const SimResult r = probred::actual_size(design);
    REQUIRE(r.rejection_rate >= 0.10);  // nominal 0.05 badly understates it
}

TEST_CASE("simulation designs are validated before any work starts") {
    SimDesign design = mean_test_design();

    design.replications = 0;
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);
    design.replications = 99;
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);

    design = mean_test_design();
    design.nominal_alpha = 0.0;
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);

    design = mean_test_design();
    design.procedure.coefficient = 1;  // no backbone: only the mean is fitted
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);

    design = mean_test_design();
    design.procedure.kind = ProcedureKind::MisSpecTest;
    design.procedure.test_name = "white";  // needs a regressor
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);
    design.procedure.test_name = "banana";
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);

    design = mean_test_design();
    design.procedure.kind = ProcedureKind::OverIdentifying;
    REQUIRE_THROWS_AS(probred::actual_size(design), probred::Error);
}

TEST_CASE("retained p-values are consistent with the rejection rate") {
    SimDesign design = mean_test_design();
    design.replications = 500;
    SimOptions options;
    options.keep_p_values = true;
    const SimResult r = probred::actual_size(design, options);

    REQUIRE(r.p_values.size() == 500);
    std::size_t below = 0;
    for (double p : r.p_values) {
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
        if (p < design.nominal_alpha) ++below;
    }
    REQUIRE(r.rejection_rate == static_cast<double>(below) / 500.0);
    REQUIRE(r.p_values[0] != r.p_values[1]);  // streams are independent
}

TEST_CASE("results are identical for any thread partition") {
    SimDesign design = mean_test_design();
    design.replications = 400;

    SimOptions serial;
    serial.threads = 1;
    serial.keep_p_values = true;
    SimOptions four;
    four.threads = 4;
    four.keep_p_values = true;
    SimOptions seven;
    seven.threads = 7;
    seven.keep_p_values = true;

    const SimResult a = probred::actual_size(design, serial);
    const SimResult b = probred::actual_size(design, four);
    const SimResult c = probred::actual_size(design, seven);

    REQUIRE(a.rejection_rate == b.rejection_rate);
    REQUIRE(a.rejection_rate == c.rejection_rate);
    REQUIRE(a.p_values == b.p_values);
    REQUIRE(a.p_values == c.p_values);
}

TEST_CASE("generated normal samples pass the normality test at the nominal rate") {
    SimDesign design = mean_test_design();
    design.procedure.kind = ProcedureKind::MisSpecTest;
    design.procedure.test_name = "shapiro_wilk";
    design.replications = 2000;
    design.seed = 90210;
    const SimResult r = probred::actual_size(design);
    // 3 MC standard errors around 0.05 with 2000 replications.
    REQUIRE(r.rejection_rate > 0.035);
    REQUIRE(r.rejection_rate < 0.065);
}

TEST_CASE("the over-identifying test keeps its size through the simulator") {
    SimDesign design;
    design.dgp.n = 30;
    design.dgp.backbone = RegressionBackbone{1.0, 0.5, XDesign::NormalDraws};
    design.procedure.kind = ProcedureKind::OverIdentifying;
    design.procedure.restriction_matrix = probred::Matrix(1, 2);
    design.procedure.restriction_matrix(0, 0) = 0.0;
    design.procedure.restriction_matrix(0, 1) = 1.0;
    design.procedure.restriction_values = {0.5};  // true slope
    design.nominal_alpha = 0.05;
    design.replications = 2000;
    design.seed = 1847;
    const SimResult r = probred::actual_size(design);
    REQUIRE(r.rejection_rate > 0.035);
    REQUIRE(r.rejection_rate < 0.065);
}

// ---------------------------------------------------------------------------
// power_curve
// ---------------------------------------------------------------------------

TEST_CASE("a zero deviation reproduces the size run bit for bit") {
    SimDesign design = mean_test_design();
    design.replications = 1000;
    const SimResult base = probred::actual_size(design);
    const auto curve = probred::power_curve(design, {0.0, 0.3});
    REQUIRE(curve[0].rejection_rate == base.rejection_rate);
    REQUIRE(curve[0].mc_standard_error == base.mc_standard_error);
    REQUIRE(curve[1].rejection_rate > base.rejection_rate);
}

TEST_CASE("a deviation of ten standard errors is essentially always caught") {
    SimDesign design = mean_test_design();
    design.replications = 2000;
    // SE of the sample mean is sigma/sqrt(n) = 0.1, so deviate by 1.0.
    const auto curve = probred::power_curve(design, {1.0});
    REQUIRE(curve[0].rejection_rate >= 0.99);
}

TEST_CASE("power grows with the deviation within Monte Carlo error") {
    SimDesign design = mean_test_design();
    design.replications = 2000;
    const std::vector<double> grid{0.0, 0.025, 0.05, 0.1, 0.2, 0.4};
    const auto curve = probred::power_curve(design, grid);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double slack = 2.0 * (curve[i].mc_standard_error +
                                    curve[i + 1].mc_standard_error);
        REQUIRE(curve[i + 1].rejection_rate >= curve[i].rejection_rate - slack);
    }
    REQUIRE(curve.back().rejection_rate > curve.front().rejection_rate + 0.5);
}

TEST_CASE("misspecification-test power curves scale the departure parameter") {
    SimDesign design;
    design.dgp.kind = DGPKind::ARErrors;
    design.dgp.rho = 0.0;
    design.dgp.n = 100;
    design.procedure.kind = ProcedureKind::MisSpecTest;
    design.procedure.test_name = "ljung_box";
    design.nominal_alpha = 0.05;
    design.replications = 1000;
    design.seed = 62217;

    const auto curve = probred::power_curve(design, {0.0, 0.3, 0.6});
    REQUIRE(curve[0].rejection_rate < 0.10);   // size at rho = 0
    REQUIRE(curve[2].rejection_rate >= 0.80);  // strong persistence is caught
    REQUIRE(curve[2].rejection_rate >= curve[1].rejection_rate);
}

TEST_CASE("power curves reject degenerate requests") {
    SimDesign design = mean_test_design();
    REQUIRE_THROWS_AS(probred::power_curve(design, {}), probred::Error);

    design.procedure.kind = ProcedureKind::MisSpecTest;
    design.procedure.test_name = "jarque_bera";  // NIIDNormal has no departure knob
    REQUIRE_THROWS_AS(probred::power_curve(design, {0.0, 0.5}), probred::Error);
}
