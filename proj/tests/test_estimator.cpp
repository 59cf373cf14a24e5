// test_estimator.cpp
//
// Unit tests for model estimation:
//  - probred::fit_ols against exact constructions, an externally
//    cross-checked problem (statsmodels OLS), and the long-double
//    normal-equations oracle
//  - probred::fit_simple_normal and probred::fit_ar
//  - shared invariants: orthogonality, scale equivariance, rank-deficiency
//    rejection, report formatting

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "probred/estimator.hpp"
#include "support/oracles.hpp"

using Catch::Approx;
using probred::Column;
using probred::DataTable;
using probred::Error;
using probred::FitResult;
using probred::Matrix;
using probred::VariableRoles;

namespace {

// Fixed regression problem; reference outputs cross-checked externally
// (statsmodels OLS, SciPy 1.15).
const double kX30[30] = {
    -0.033076, -1.625886, -0.54621,  1.531817,  -0.516607, -0.378788, 1.155685, 0.181142,
    0.947789,  -0.470199, 0.269511,  0.601933,  0.639547,  1.601902,  -1.884665, 2.27037,
    0.121773,  -0.678914, -0.074462, 0.737016,  -0.067659, -0.912198, -2.225044, 0.690368,
    0.543755,  0.091876,  -1.034814, 0.331358,  -0.364947, -1.944285};

const double kY30[30] = {
    1.135114,  0.515959, 1.039739,  1.453484,  1.793719,  -0.313494, 0.884618,  0.056427,
    2.628988,  0.993519, 1.20933,   1.027073,  2.459472,  -0.180407, 1.318666,  2.91914,
    2.662069,  -0.532317, 0.205794, -0.602814, -0.442713, 0.43225,   -0.695691, 0.816467,
    1.546225,  2.405686, 0.114443,  1.678436,  -0.546748, 1.242094};

// Fixed AR(1)-like series; reference fit cross-checked externally
// (statsmodels OLS on the lagged design).
const double kAR40[40] = {
    -0.030376, 0.15217,  0.626685, 1.310241, 1.811878, 0.886994, 0.653809, 0.565165,
    0.485451,  0.81889,  0.920368, 1.158477, 1.66641,  1.588047, 1.47073,  1.322276,
    1.267411,  1.1412,   0.711359, -0.013454, 0.260454, 0.519096, 0.338055, 0.029405,
    0.381825,  0.803202, 0.712396, 0.604058, 1.414492, 1.182337, 0.097776, 0.429609,
    0.361085,  0.107825, 0.532861, 0.037849, 0.431186, -0.237366, 0.21952,  0.851207};

DataTable table30() {
    return DataTable({Column{"y", {kY30, kY30 + 30}}, Column{"x", {kX30, kX30 + 30}}});
}

}  // namespace

// ============================================================================
// fit_ols
// ============================================================================

TEST_CASE("fit_ols: exact linear data is interpolated", "[estimator][ols]")
{
    std::vector<double> x, y;
    for (int i = 0; i < 9; ++i) {
        x.push_back(0.5 * i - 2.0);
        y.push_back(2.0 + 3.0 * x.back());
    }
    const DataTable t({Column{"y", y}, Column{"x", x}});
    const FitResult fit = probred::fit_ols(t, {"y", {"x"}});

    REQUIRE(fit.coefficients[0] == Approx(2.0).margin(1e-12));
    REQUIRE(fit.coefficients[1] == Approx(3.0).margin(1e-12));
    REQUIRE(fit.s == Approx(0.0).margin(1e-12));
    REQUIRE(fit.r_squared == Approx(1.0).margin(1e-12));
}

TEST_CASE("fit_ols: constant response gives slope 0 and R^2 = 0", "[estimator][ols]")
{
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) {
        x.push_back(std::sin(1.1 * i));
        y.push_back(4.0);
    }
    const DataTable t({Column{"y", y}, Column{"x", x}});
    const FitResult fit = probred::fit_ols(t, {"y", {"x"}});
    REQUIRE(fit.coefficients[0] == Approx(4.0).margin(1e-12));
    REQUIRE(fit.coefficients[1] == Approx(0.0).margin(1e-12));
    REQUIRE(fit.r_squared == 0.0);
}

TEST_CASE("fit_ols: externally cross-checked regression report", "[estimator][ols]")
{
    const FitResult fit = probred::fit_ols(table30(), {"y", {"x"}});
    REQUIRE(fit.n == 30);
    REQUIRE(fit.k == 2);
    REQUIRE(fit.coefficients[0] == Approx(0.91971408939755).margin(1e-10));
    REQUIRE(fit.coefficients[1] == Approx(0.3521359595882402).margin(1e-10));
    REQUIRE(fit.standard_errors[0] == Approx(0.18582663810266603).margin(1e-10));
    REQUIRE(fit.standard_errors[1] == Approx(0.1772029788867039).margin(1e-10));
    REQUIRE(fit.s == Approx(1.017256068745194).margin(1e-10));
    REQUIRE(fit.r_squared == Approx(0.12360114329183092).margin(1e-10));
}

TEST_CASE("fit_ols: random 50x3 problem matches the oracle to 1e-8 relative",
          "[estimator][ols][oracle]")
{
    std::mt19937_64 rng(20260815);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t n = 50;
    DataTable t = [&] {
        std::vector<double> x1(n), x2(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = normal(rng);
            x2[i] = 0.4 * x1[i] + normal(rng);
            y[i] = 1.0 - 2.0 * x1[i] + 0.5 * x2[i] + normal(rng);
        }
        return DataTable({Column{"y", y}, Column{"x1", x1}, Column{"x2", x2}});
    }();

    const FitResult fit = probred::fit_ols(t, {"y", {"x1", "x2"}});

    std::vector<std::vector<double>> X(n, std::vector<double>(3));
    for (std::size_t i = 0; i < n; ++i) {
        X[i][0] = 1.0;
        X[i][1] = t.values("x1")[i];
        X[i][2] = t.values("x2")[i];
    }
    const oracle::OlsOracle ref = oracle::ols(X, t.values("y"));
    for (std::size_t j = 0; j < 3; ++j) {
        REQUIRE(fit.coefficients[j] == Approx(ref.coefficients[j]).epsilon(1e-8));
        REQUIRE(fit.standard_errors[j] == Approx(ref.standard_errors[j]).epsilon(1e-8));
    }
    REQUIRE(fit.s == Approx(ref.s).epsilon(1e-8));
    REQUIRE(fit.r_squared == Approx(ref.r_squared).epsilon(1e-8));
}

TEST_CASE("fit_ols: error cases", "[estimator][ols]")
{
    SECTION("redundant regressor copy is rejected, never silently fit")
    {
        std::vector<double> x(10), y(10);
        for (int i = 0; i < 10; ++i) {
            x[static_cast<std::size_t>(i)] = i;
            y[static_cast<std::size_t>(i)] = 2 * i + 1;
        }
        const DataTable t({Column{"y", y}, Column{"x", x}, Column{"x_copy", x}});
        try {
            probred::fit_ols(t, {"y", {"x", "x_copy"}});
            FAIL("expected a rank-deficiency error");
        } catch (const Error& e) {
            REQUIRE(std::string(e.what()).find("rank deficient") != std::string::npos);
        }
    }

    SECTION("n <= k is rejected")
    {
        const DataTable t({Column{"y", {1.0, 2.0}}, Column{"x", {0.0, 1.0}}});
        REQUIRE_THROWS_AS(probred::fit_ols(t, {"y", {"x"}}), Error);
    }
}

TEST_CASE("fit_ols: invariants", "[estimator][ols][property]")
{
    const DataTable t = table30();
    const FitResult fit = probred::fit_ols(t, {"y", {"x"}});

    SECTION("residual mean is 0 and X'u = 0 (orthogonality)")
    {
        double rsum = 0.0, xu = 0.0;
        for (std::size_t i = 0; i < fit.n; ++i) {
            rsum += fit.residuals[i];
            xu += kX30[i] * fit.residuals[i];
        }
        REQUIRE(std::fabs(rsum) / fit.n < 1e-10);
        REQUIRE(std::fabs(xu) / fit.n < 1e-10);
    }

    SECTION("fitted + residuals reproduce the response")
    {
        for (std::size_t i = 0; i < fit.n; ++i)
            REQUIRE(fit.fitted[i] + fit.residuals[i] == Approx(kY30[i]).margin(1e-12));
    }

    SECTION("scale equivariance in y")
    {
        const double c = -3.7;
        std::vector<double> scaled(kY30, kY30 + 30);
        for (double& v : scaled) v *= c;
        const DataTable ts({Column{"y", scaled}, Column{"x", {kX30, kX30 + 30}}});
        const FitResult sf = probred::fit_ols(ts, {"y", {"x"}});
        for (std::size_t j = 0; j < 2; ++j) {
            REQUIRE(sf.coefficients[j] == Approx(c * fit.coefficients[j]).epsilon(1e-12));
            REQUIRE(sf.standard_errors[j] ==
                    Approx(std::fabs(c) * fit.standard_errors[j]).epsilon(1e-12));
        }
        REQUIRE(sf.s == Approx(std::fabs(c) * fit.s).epsilon(1e-12));
        REQUIRE(sf.r_squared == Approx(fit.r_squared).epsilon(1e-12));
    }
}

// ============================================================================
// fit_simple_normal
// ============================================================================

TEST_CASE("fit_simple_normal: hand computations", "[estimator][simple_normal]")
{
    SECTION("constant sample")
    {
        const FitResult fit = probred::fit_simple_normal({5.0, 5.0, 5.0, 5.0});
        REQUIRE(fit.coefficients[0] == 5.0);
        REQUIRE(fit.s == 0.0);
        REQUIRE(fit.k == 1);
    }

    SECTION("two points")
    {
        const FitResult fit = probred::fit_simple_normal({-1.0, 1.0});
        REQUIRE(fit.coefficients[0] == Approx(0.0).margin(1e-15));
        REQUIRE(fit.s * fit.s == Approx(2.0).margin(1e-13));  // SSR/(n-1) = 2/1
        REQUIRE(fit.standard_errors[0] == Approx(fit.s / std::sqrt(2.0)).margin(1e-13));
    }

    SECTION("n < 2 is rejected")
    {
        REQUIRE_THROWS_AS(probred::fit_simple_normal({1.0}), Error);
    }
}

TEST_CASE("fit_simple_normal: recovers the mean of simulated draws",
          "[estimator][simple_normal][simulation]")
{
    std::mt19937_64 rng(7211);
    std::normal_distribution<double> normal(3.0, 2.0);
    const std::size_t n = 10000;
    std::vector<double> sample(n);
    for (double& v : sample) v = normal(rng);
    const FitResult fit = probred::fit_simple_normal(sample);
    REQUIRE(std::fabs(fit.coefficients[0] - 3.0) < 4.0 * 2.0 / std::sqrt(n));
    REQUIRE(fit.s == Approx(2.0).margin(0.1));
}

// ============================================================================
// fit_ar
// ============================================================================

TEST_CASE("fit_ar: exact recursion is recovered with s = 0", "[estimator][ar]")
{
    std::vector<double> y = {1.0};
    for (int i = 1; i < 15; ++i) y.push_back(0.5 * y.back());
    const FitResult fit = probred::fit_ar(y, 1);
    REQUIRE(fit.coefficients[0] == Approx(0.0).margin(1e-12));
    REQUIRE(fit.coefficients[1] == Approx(0.5).margin(1e-12));
    REQUIRE(fit.s == Approx(0.0).margin(1e-12));
    REQUIRE(fit.n == 14);  // one row lost to the lag
    REQUIRE(fit.column_names[1] == "y_lag1");
}

TEST_CASE("fit_ar: constant series is rank deficient", "[estimator][ar]")
{
    const std::vector<double> y(20, 2.5);
    try {
        probred::fit_ar(y, 1);
        FAIL("expected a rank-deficiency error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("rank deficient") != std::string::npos);
    }
}

TEST_CASE("fit_ar: externally cross-checked AR(1) fit", "[estimator][ar]")
{
    const FitResult fit = probred::fit_ar({kAR40, kAR40 + 40}, 1);
    REQUIRE(fit.n == 39);
    REQUIRE(fit.coefficients[0] == Approx(0.2737798683212116).margin(1e-10));
    REQUIRE(fit.coefficients[1] == Approx(0.633655454875374).margin(1e-10));
    REQUIRE(fit.s == Approx(0.40056664551408516).margin(1e-10));
}

TEST_CASE("fit_ar: recovers the coefficient of a simulated AR(1)",
          "[estimator][ar][simulation]")
{
    std::mt19937_64 rng(40991);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y = {0.0};
    for (int i = 1; i < 5000; ++i) y.push_back(0.7 * y.back() + normal(rng));
    const FitResult fit = probred::fit_ar(y, 1);
    REQUIRE(std::fabs(fit.coefficients[1] - 0.7) < 0.05);
}

TEST_CASE("fit_ar: preconditions", "[estimator][ar]")
{
    REQUIRE_THROWS_AS(probred::fit_ar({1.0, 2.0, 3.0}, 1), Error);  // n <= p + 2
    REQUIRE_THROWS_AS(probred::fit_ar({1.0, 2.0, 3.0, 4.0, 5.0}, 0), Error);
}

// ============================================================================
// fit_model dispatch and report formatting
// ============================================================================

TEST_CASE("fit_model: dispatches on the declared kind", "[estimator][dispatch]")
{
    const DataTable t = table30();

    probred::StatisticalModel lr;
    lr.kind = probred::ModelKind::LinearRegression;
    lr.roles = {"y", {"x"}};
    REQUIRE(probred::fit_model(t, lr).k == 2);

    probred::StatisticalModel sn;
    sn.kind = probred::ModelKind::SimpleNormal;
    sn.roles = {"y", {}};
    REQUIRE(probred::fit_model(t, sn).k == 1);

    probred::StatisticalModel ar;
    ar.kind = probred::ModelKind::AutoRegressive;
    ar.ar_order = 1;
    ar.roles = {"y", {}};
    const FitResult arfit = probred::fit_model(t, ar);
    REQUIRE(arfit.n == 29);
    REQUIRE(arfit.column_names[1] == "y_lag1");
}

TEST_CASE("format_report: equation with standard errors beneath", "[estimator][report]")
{
    const FitResult fit = probred::fit_ols(table30(), {"y", {"x"}});
    const std::string report = probred::format_report(fit);

    REQUIRE(report.find("y = 0.919714 + 0.352136*x") != std::string::npos);
    REQUIRE(report.find("(0.185827)") != std::string::npos);
    REQUIRE(report.find("(0.177203)") != std::string::npos);
    REQUIRE(report.find("R^2 = ") != std::string::npos);
    REQUIRE(report.find("s = ") != std::string::npos);
    REQUIRE(report.find("n = 30") != std::string::npos);

    // The first standard error opens directly beneath its coefficient.
    const std::string line1 = report.substr(0, report.find('\n'));
    const std::string line2 = report.substr(report.find('\n') + 1);
    REQUIRE(line1.find("0.919714") == line2.find("(0.185827)"));
}
