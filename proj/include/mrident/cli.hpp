#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrident/pipeline.hpp"

namespace mrident {

/// Parsed experiment configuration; see configs/benchmark.json for the schema.
struct ExperimentConfig {
    LtiSystem plant;
    LtiSystem controller;
    int factor = 1;
    double fs_high = 0.0;
    double duration = 0.0;
    ExcitationSpec excitation;
    int lpm_order = 2;
    int lpm_half_width = 8;
    std::vector<Method> methods;
    std::filesystem::path out_dir;
    std::vector<Eigen::Index> probe_bins;

    Eigen::Index num_samples() const;
    MultirateLoop make_loop() const;
};

struct CliOverrides {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::string>> methods;
    bool desk_scale = false;
};

/// Loads and validates a config file. Throws ConfigError with the offending
/// key path (or parse position) on any schema violation.
ExperimentConfig load_config(const std::filesystem::path& path, const CliOverrides& overrides);

int cmd_simulate(const ExperimentConfig& config);
int cmd_identify(const ExperimentConfig& config);
int cmd_pfg(const ExperimentConfig& config);
int cmd_compare(const ExperimentConfig& config);
int cmd_selftest();

/// Exit codes: 0 ok, 2 config error, 3 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace mrident
