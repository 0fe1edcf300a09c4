#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "mrident/lifting.hpp"
#include "mrident/lpm.hpp"
#include "mrident/multirate.hpp"

namespace mrident {

struct ExcitationSpec {
    enum class Type { Multisine, WhiteNoise };
    Type type = Type::Multisine;
    std::uint64_t seed = 1;
    double amplitude = 1.0;

    static Type type_from_name(const std::string& name);
    std::string type_name() const;
};

/// Deterministic excitation at the high rate: either a full-grid random-phase
/// multisine (every bin excited, |R(k)| equal) or white noise, scaled to the
/// requested RMS amplitude.
Signal generate_excitation(const ExcitationSpec& spec, Eigen::Index num_samples,
                           double sample_period);

/// One closed-loop experiment: reference, plant input and output at the high
/// rate, with the lift factor they were produced under.
struct ExperimentRecord {
    Signal reference;
    Signal input;
    Signal output;
    int factor;
    ExcitationSpec excitation;

    double sample_period() const { return reference.sample_period(); }
    Eigen::Index length() const { return reference.length(); }
    double duration() const { return reference.duration(); }
};

ExperimentRecord run_experiment(const MultirateLoop& loop, const ExcitationSpec& excitation,
                                double duration_seconds,
                                const std::optional<Signal>& noise = std::nullopt);

enum class Method { Etfe, NaiveLpm, TimeLifted, FrequencyLifted };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

/// High-rate plant FRF estimate with per-bin condition diagnostics; bins that
/// could not be resolved are NaN.
struct PlantEstimate {
    Method method;
    Frf frf;
    Eigen::VectorXd condition;  ///< per-bin cond of the limiting inversion
    Eigen::Index nan_bins = 0;
};

/// Lift r->y and r->u per the chosen kind, DFT, and LPM-estimate the lifted
/// closed-loop transfers J and S.
std::pair<LiftedFrf, LiftedFrf> estimate_lifted_JS(const ExperimentRecord& record,
                                                   LiftKind kind, const LpmConfig& config);

/// Indirect recovery P = J S^{-1} per bin; bins where S is ill-conditioned
/// (cond > 1e12) are flagged NaN rather than failing. condition_out, when
/// given, receives per-bin cond(S).
LiftedFrf recover_plant(const LiftedFrf& J, const LiftedFrf& S,
                        Eigen::VectorXd* condition_out = nullptr);

/// Inverse-lift a recovered lifted plant to the high-rate grid. For frequency
/// lifts p selects the diagonal used; p = -1 averages over all p.
/// lifted_condition, when given, is spread onto the high-rate bins.
PlantEstimate recover_highrate_frf(const LiftedFrf& plant, int p_choice = 0,
                                   const Eigen::VectorXd* lifted_condition = nullptr);

/// Per-bin DFT ratio baseline (indirect: Y/R over U/R collapses to Y/U).
PlantEstimate etfe(const ExperimentRecord& record);

/// LPM on the unlifted high-rate data, ignoring the LPTV structure.
PlantEstimate naive_lpm(const ExperimentRecord& record, const LpmConfig& config);

/// Analytic lifted closed-loop transfers of a loop on the low-rate bin grid;
/// the reference truth for estimate_lifted_JS.
std::pair<LiftedFrf, LiftedFrf> analytic_lifted_JS(const MultirateLoop& loop, LiftKind kind,
                                                   Eigen::Index num_high_bins);

void write_csv(const PlantEstimate& estimate, const std::filesystem::path& path);

}  // namespace mrident
