#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vmpomc/optimizer.hpp"

namespace vmpomc {

// One experiment as described by a config file: model, ansatz, optimizer
// settings, output plumbing and an optional one-parameter sweep.
struct ExperimentConfig {
    ModelSpec model;
    OptimizerConfig optimizer;
    int chi = 2;
    double init_scale = 0.2;
    std::uint64_t init_seed = 1;
    std::filesystem::path init_checkpoint;  // empty = random init

    std::filesystem::path out_dir = ".";
    int checkpoint_every = 0;  // 0 = final checkpoint only
    std::vector<std::string> observables{"sz"};
    bool ed_compare = false;
    bool check_convergence = false;

    std::string sweep_parameter;  // empty = no sweep
    std::vector<double> sweep_values;

    void validate() const;
};

// Line-oriented `[section]` / `key = value` config parser. Unknown sections or
// keys, or unparseable values, raise ConfigError naming the offending key.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config_text(const std::string& text);

// Assigns a sweepable model parameter by name (h, J, gamma_minus,
// gamma_dephasing_local, gamma_dephasing_collective, alpha).
void set_model_parameter(ModelSpec& model, const std::string& name, double value);

// One-body observable matrix by name: sx, sy, sz, id.
Eigen::Matrix2cd observable_by_name(const std::string& name);

// %.17g rendering used for all CSV floats.
std::string fmt17(double value);

}  // namespace vmpomc
