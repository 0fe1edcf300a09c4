#pragma once

#include <filesystem>

#include "mrident/lifting.hpp"

#include <nlohmann/json_fwd.hpp>

namespace mrident {

/// Synthetic perturbation of a lifted closed-loop pair for first-order bias
/// structure checks: the estimated pair is (J + eps*Jd, S + eps*Sd).
struct PerturbationProbe {
    LiftedFrf J;
    LiftedFrf S;
    LiftedFrf Jdelta;
    LiftedFrf Sdelta;
    double eps;
};

struct BiasCheckResult {
    std::vector<Eigen::MatrixXcd> predicted;  ///< eps*(Jd - P Sd) S^{-1} per bin
    std::vector<Eigen::MatrixXcd> actual;     ///< (J+eps Jd)(S+eps Sd)^{-1} - J S^{-1}
    double predicted_norm;
    double actual_norm;
    double remainder_ratio;  ///< ||actual - predicted|| / eps^2
};

/// First-order bias identity on the lifted plant: predicted vs actual
/// perturbation of J S^{-1}.
BiasCheckResult first_order_bias_lifted(const PerturbationProbe& probe);

/// Maps the predicted lifted first-order bias through the inverse lift to the
/// high-rate grid; p selects the diagonal for frequency lifts.
struct HighrateBias {
    Eigen::VectorXd grid;
    std::vector<Eigen::MatrixXcd> values;
};
HighrateBias highrate_bias_from_lifted(const PerturbationProbe& probe, LiftKind kind, int p);

/// Random probe around an analytic lifted pair; deterministic in the seed.
PerturbationProbe make_random_probe(const LiftedFrf& J, const LiftedFrf& S, double eps,
                                    std::uint64_t seed);

/// Runs the built-in bias-structure checks on the pair and reports per-check
/// name, predicted/actual norms, remainder ratios, and pass/fail.
nlohmann::json diagnostics_report(const LiftedFrf& J, const LiftedFrf& S, std::uint64_t seed);

}  // namespace mrident
