#include "mrident/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrident {

PipelineResult run_pipeline(const MultirateLoop& loop, const ExcitationSpec& excitation,
                            const PipelineConfig& config, const std::optional<Signal>& noise) {
    const int F = loop.factor();
    ExperimentRecord record = run_experiment(loop, excitation, config.duration_seconds, noise);
    const Eigen::Index n = record.length();

    std::vector<PlantEstimate> estimates;
    estimates.reserve(config.methods.size());
    for (Method method : config.methods) {
        switch (method) {
            case Method::Etfe:
                estimates.push_back(etfe(record));
                break;
            case Method::NaiveLpm: {
                const LpmConfig cfg(config.lpm_order, config.lpm_half_width,
                                    record.input.channels(), record.output.channels());
                estimates.push_back(naive_lpm(record, cfg));
                break;
            }
            case Method::TimeLifted:
            case Method::FrequencyLifted: {
                const LiftKind kind = method == Method::TimeLifted ? LiftKind::TimeLifted
                                                                   : LiftKind::FrequencyLifted;
                const LpmConfig cfg(config.lpm_order, config.lpm_half_width,
                                    F * record.input.channels(), F * record.output.channels());
                auto [J, S] = estimate_lifted_JS(record, kind, cfg);
                Eigen::VectorXd cond;
                const LiftedFrf plant = recover_plant(J, S, &cond);
                estimates.push_back(recover_highrate_frf(
                    plant, kind == LiftKind::FrequencyLifted ? config.freq_lift_p : 0, &cond));
                break;
            }
        }
    }

    PipelineResult result{std::move(record),
                          std::move(estimates),
                          frf_bin_grid(loop.plant(), n),
                          PfgCurve{},
                          {},
                          config.probe_bins,
                          Eigen::VectorXd()};
    result.true_pfg = pfg_closed_form(result.true_plant, loop.controller(), F);
    for (const PlantEstimate& est : result.estimates)
        result.pfg.emplace(est.method, pfg_from_estimate(est, loop.controller(), F));

    if (!config.probe_bins.empty()) {
        const double probe_duration =
            config.probe_duration_seconds > 0.0
                ? config.probe_duration_seconds
                : config.duration_seconds +
                      double(loop.settle_samples()) * loop.high_rate_period();
        result.brute_force_pfg.resize(Eigen::Index(config.probe_bins.size()));
        for (size_t i = 0; i < config.probe_bins.size(); ++i) {
            const Eigen::Index bin = config.probe_bins[i];
            if (bin < 0 || bin >= n) throw BadIndex("probe bin out of range");
            result.brute_force_pfg[Eigen::Index(i)] =
                pfg_brute_force(loop, result.true_plant.grid()[bin], n, probe_duration);
        }
    }
    return result;
}

double median_abs_error(const Frf& estimate, const Frf& truth) {
    if (estimate.size() != truth.size())
        throw DimensionMismatch("estimate and truth grids differ");
    std::vector<double> errors;
    errors.reserve(static_cast<size_t>(estimate.size()));
    for (Eigen::Index k = 0; k < estimate.size(); ++k) {
        const double e = (estimate.at(k) - truth.at(k)).norm();
        if (std::isfinite(e)) errors.push_back(e);
    }
    if (errors.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::nth_element(errors.begin(), errors.begin() + Eigen::Index(errors.size()) / 2,
                     errors.end());
    return errors[errors.size() / 2];
}

double median_abs_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size())
        throw DimensionMismatch("estimate and truth grids differ");
    std::vector<double> errors;
    errors.reserve(static_cast<size_t>(estimate.size()));
    for (Eigen::Index k = 0; k < estimate.size(); ++k) {
        const double e = std::abs(estimate[k] - truth[k]);
        if (std::isfinite(e)) errors.push_back(e);
    }
    if (errors.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::nth_element(errors.begin(), errors.begin() + Eigen::Index(errors.size()) / 2,
                     errors.end());
    return errors[errors.size() / 2];
}

double max_abs_error(const Frf& estimate, const Frf& truth) {
    if (estimate.size() != truth.size())
        throw DimensionMismatch("estimate and truth grids differ");
    double worst = 0.0;
    bool any = false;
    for (Eigen::Index k = 0; k < estimate.size(); ++k) {
        const double e = (estimate.at(k) - truth.at(k)).norm();
        if (std::isfinite(e)) {
            worst = std::max(worst, e);
            any = true;
        }
    }
    return any ? worst : std::numeric_limits<double>::quiet_NaN();
}

double max_abs_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size())
        throw DimensionMismatch("estimate and truth grids differ");
    double worst = 0.0;
    bool any = false;
    for (Eigen::Index k = 0; k < estimate.size(); ++k) {
        const double e = std::abs(estimate[k] - truth[k]);
        if (std::isfinite(e)) {
            worst = std::max(worst, e);
            any = true;
        }
    }
    return any ? worst : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace mrident
