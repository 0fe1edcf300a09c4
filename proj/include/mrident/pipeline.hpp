#pragma once

#include <map>
#include <vector>

#include "mrident/ident.hpp"
#include "mrident/pfg.hpp"

namespace mrident {

struct PipelineConfig {
    int lpm_order = 2;
    int lpm_half_width = 8;
    std::vector<Method> methods = {Method::Etfe, Method::NaiveLpm, Method::TimeLifted,
                                   Method::FrequencyLifted};
    double duration_seconds = 100.0;
    std::vector<Eigen::Index> probe_bins;  ///< PFG brute-force probes; empty = skip
    double probe_duration_seconds = 0.0;   ///< 0 = derive from duration
    int freq_lift_p = 0;                   ///< diagonal choice; -1 = average
};

struct PipelineResult {
    ExperimentRecord record;
    std::vector<PlantEstimate> estimates;
    Frf true_plant;                     ///< analytic FRF on the experiment grid
    PfgCurve true_pfg;                  ///< closed form from the analytic FRF
    std::map<Method, PfgCurve> pfg;     ///< closed form from each estimate
    std::vector<Eigen::Index> probe_bins;
    Eigen::VectorXd brute_force_pfg;    ///< one value per probe bin
};

/// Full identification run: excite, lift, estimate, recover, inverse-lift,
/// and compute PFG curves per method plus brute-force probes.
PipelineResult run_pipeline(const MultirateLoop& loop, const ExcitationSpec& excitation,
                            const PipelineConfig& config,
                            const std::optional<Signal>& noise = std::nullopt);

/// Median / maximum of |estimate - truth| over all finite bins.
double median_abs_error(const Frf& estimate, const Frf& truth);
double median_abs_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);
double max_abs_error(const Frf& estimate, const Frf& truth);
double max_abs_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

}  // namespace mrident
