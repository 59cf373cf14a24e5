// model_catalog.hpp
//
// Statistical models declared as parameterizations induced by reduction
// assumptions drawn from three categories:
//   (D) Distribution    -- Normal
//   (M) Dependence      -- Independent | Markov(p)
//   (H) Heterogeneity   -- Identical | Stationary
//
// The catalog maps supported combinations to a model kind and enumerates each
// model's testable assumptions, which drive the misspecification battery.

#ifndef PROBRED_MODEL_CATALOG_HPP
#define PROBRED_MODEL_CATALOG_HPP

#include <string>
#include <vector>

#include "probred/common.hpp"
#include "probred/dataset.hpp"

namespace probred {

enum class Distribution { Normal };
enum class Dependence { Independent, Markov };
enum class Heterogeneity { Identical, Stationary };

/// How the regressors arose: fixed by an experimenter (Gauss Linear reading)
/// or jointly random with the response (Linear Regression reading). The two
/// share the estimator; they differ in the recorded provenance.
enum class XInterpretation { JointlyRandom, FixedDesign };

/// One choice from each reduction category. `markov_order` is meaningful only
/// when dependence == Markov.
struct ReductionAssumptions {
    Distribution distribution = Distribution::Normal;
    Dependence dependence = Dependence::Independent;
    Heterogeneity heterogeneity = Heterogeneity::Identical;
    int markov_order = 0;
};

enum class ModelKind { SimpleNormal, GaussLinear, LinearRegression, AutoRegressive };

/// Testable assumptions; each maps to exactly one battery test.
enum class Assumption {
    Normality,
    LinearityOfConditionalMean,
    Homoskedasticity,
    Independence,
    ParameterTInvariance,
};

inline std::string to_string(Distribution d) {
    switch (d) {
        case Distribution::Normal: return "Normal";
    }
    return "?";
}

inline std::string to_string(Dependence d) {
    switch (d) {
        case Dependence::Independent: return "Independent";
        case Dependence::Markov: return "Markov";
    }
    return "?";
}

inline std::string to_string(Heterogeneity h) {
    switch (h) {
        case Heterogeneity::Identical: return "Identical";
        case Heterogeneity::Stationary: return "Stationary";
    }
    return "?";
}

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::SimpleNormal: return "SimpleNormal";
        case ModelKind::GaussLinear: return "GaussLinear";
        case ModelKind::LinearRegression: return "LinearRegression";
        case ModelKind::AutoRegressive: return "AutoRegressive";
    }
    return "?";
}

inline std::string to_string(Assumption a) {
    switch (a) {
        case Assumption::Normality: return "normality";
        case Assumption::LinearityOfConditionalMean: return "linearity of conditional mean";
        case Assumption::Homoskedasticity: return "homoskedasticity";
        case Assumption::Independence: return "independence";
        case Assumption::ParameterTInvariance: return "parameter t-invariance";
    }
    return "?";
}

inline std::string describe(const ReductionAssumptions& r) {
    std::string dep = to_string(r.dependence);
    if (r.dependence == Dependence::Markov) dep += "(" + std::to_string(r.markov_order) + ")";
    return "(" + to_string(r.distribution) + ", " + dep + ", " + to_string(r.heterogeneity) + ")";
}

/// A declared statistical model: the kind, the variable roles it binds, and
/// the reduction assumptions that induced it. Parameter values are unknown
/// until the model is fit; their dimension is fixed by `kind` and the number
/// of regressors (SimpleNormal: mu, sigma^2; GaussLinear/LinearRegression:
/// beta0, beta1 vector, sigma^2; AR(p): intercept, p lag coefficients,
/// sigma^2).
struct StatisticalModel {
    ModelKind kind = ModelKind::SimpleNormal;
    int ar_order = 0;  // p, for AutoRegressive
    VariableRoles roles;
    ReductionAssumptions reduction;
    XInterpretation x_interpretation = XInterpretation::JointlyRandom;
};

/// Maps a reduction-assumption triple plus variable roles to a catalog model:
///   (Normal, Independent, Identical), no regressors        -> SimpleNormal
///   (Normal, Independent, Identical), fixed regressors     -> GaussLinear
///   (Normal, Independent, Identical), random regressors    -> LinearRegression
///   (Normal, Markov(p), Stationary), univariate            -> AutoRegressive(p)
/// Every other combination is rejected.
inline StatisticalModel specify_model(const ReductionAssumptions& reduction,
                                      const VariableRoles& roles,
                                      XInterpretation x_interpretation =
                                          XInterpretation::JointlyRandom) {
    detail::require(!roles.response.empty(), "roles must name a response column");
    const bool univariate = roles.regressors.empty();

    auto not_in_catalog = [&]() -> Error {
        return Error(
            "model not in catalog: " + describe(reduction) +
            (univariate ? " univariate" : " with regressors") +
            "; supported reductions: (Normal, Independent, Identical) univariate -> "
            "SimpleNormal; (Normal, Independent, Identical) with regressors -> GaussLinear "
            "(fixed design) or LinearRegression (jointly random); (Normal, Markov(p), "
            "Stationary) univariate -> AutoRegressive(p)");
    };

    StatisticalModel model;
    model.roles = roles;
    model.reduction = reduction;
    model.x_interpretation = x_interpretation;

    if (reduction.dependence == Dependence::Independent &&
        reduction.heterogeneity == Heterogeneity::Identical) {
        if (univariate) {
            model.kind = ModelKind::SimpleNormal;
        } else {
            model.kind = (x_interpretation == XInterpretation::FixedDesign)
                             ? ModelKind::GaussLinear
                             : ModelKind::LinearRegression;
        }
        return model;
    }
    if (reduction.dependence == Dependence::Markov &&
        reduction.heterogeneity == Heterogeneity::Stationary && univariate) {
        if (reduction.markov_order < 1)
            throw Error("Markov dependence requires order >= 1");
        model.kind = ModelKind::AutoRegressive;
        model.ar_order = reduction.markov_order;
        return model;
    }
    throw not_in_catalog();
}

/// The ordered list of testable assumptions for a catalog model. Each entry
/// is probed by one battery test; for AutoRegressive models the independence
/// entry refers to the residuals (martingale-difference check).
inline std::vector<Assumption> assumption_list(const StatisticalModel& model) {
    switch (model.kind) {
        case ModelKind::SimpleNormal:
            return {Assumption::Normality, Assumption::Independence,
                    Assumption::ParameterTInvariance};
        case ModelKind::GaussLinear:
        case ModelKind::LinearRegression:
            return {Assumption::Normality, Assumption::LinearityOfConditionalMean,
                    Assumption::Homoskedasticity, Assumption::Independence,
                    Assumption::ParameterTInvariance};
        case ModelKind::AutoRegressive:
            return {Assumption::Normality, Assumption::Independence,
                    Assumption::ParameterTInvariance, Assumption::LinearityOfConditionalMean};
    }
    throw Error("unknown model kind");
}

}  // namespace probred

#endif  // PROBRED_MODEL_CATALOG_HPP
