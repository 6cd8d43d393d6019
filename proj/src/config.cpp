#include "vmpomc/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vmpomc/observables.hpp"

namespace vmpomc {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    if (value == "inf" || value == "infinity")
        return std::numeric_limits<double>::infinity();
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad numeric value '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const std::int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer value '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': bad boolean value '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void assign(ExperimentConfig& cfg, const std::string& section, const std::string& key,
            const std::string& value) {
    const std::string full = section + "." + key;
    if (section == "model") {
        if (key == "n_sites")
            cfg.model.n_sites = static_cast<int>(parse_int(full, value));
        else if (key == "J")
            cfg.model.J = parse_double(full, value);
        else if (key == "h")
            cfg.model.h = parse_double(full, value);
        else if (key == "gamma_minus")
            cfg.model.gamma_minus = parse_double(full, value);
        else if (key == "gamma_dephasing_local")
            cfg.model.gamma_d_loc = parse_double(full, value);
        else if (key == "gamma_dephasing_collective")
            cfg.model.gamma_d_col = parse_double(full, value);
        else if (key == "alpha")
            cfg.model.alpha = parse_double(full, value);
        else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "ansatz") {
        if (key == "chi")
            cfg.chi = static_cast<int>(parse_int(full, value));
        else if (key == "init_scale")
            cfg.init_scale = parse_double(full, value);
        else if (key == "init_seed")
            cfg.init_seed = static_cast<std::uint64_t>(parse_int(full, value));
        else if (key == "init_checkpoint")
            cfg.init_checkpoint = value;
        else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "optimizer") {
        if (key == "method") {
            if (value == "sr")
                cfg.optimizer.method = OptimizerConfig::Method::SR;
            else if (value == "sgd")
                cfg.optimizer.method = OptimizerConfig::Method::SGD;
            else
                throw ConfigError("config key '" + full + "': expected sr or sgd, got '" +
                                  value + "'");
        } else if (key == "epsilon")
            cfg.optimizer.epsilon = parse_double(full, value);
        else if (key == "delta0")
            cfg.optimizer.delta0 = parse_double(full, value);
        else if (key == "decay")
            cfg.optimizer.decay = parse_double(full, value);
        else if (key == "n_iterations")
            cfg.optimizer.n_iterations = static_cast<int>(parse_int(full, value));
        else if (key == "n_mc")
            cfg.optimizer.n_mc = static_cast<int>(parse_int(full, value));
        else if (key == "n_workers")
            cfg.optimizer.n_workers = static_cast<int>(parse_int(full, value));
        else if (key == "seed")
            cfg.optimizer.seed = static_cast<std::uint64_t>(parse_int(full, value));
        else if (key == "hermitize")
            cfg.optimizer.hermitize = parse_bool(full, value);
        else if (key == "burn_in_sweeps")
            cfg.optimizer.burn_in_sweeps = static_cast<int>(parse_int(full, value));
        else if (key == "n_threads")
            cfg.optimizer.n_threads = static_cast<int>(parse_int(full, value));
        else if (key == "mc_schedule") {
            cfg.optimizer.mc_schedule.clear();
            for (const auto& entry : split_list(value)) {
                const auto colon = entry.find(':');
                if (colon == std::string::npos)
                    throw ConfigError("config key '" + full +
                                      "': expected iteration:n_mc pairs, got '" + entry + "'");
                cfg.optimizer.mc_schedule.emplace_back(
                    static_cast<int>(parse_int(full, entry.substr(0, colon))),
                    static_cast<int>(parse_int(full, entry.substr(colon + 1))));
            }
        } else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "output") {
        if (key == "directory")
            cfg.out_dir = value;
        else if (key == "checkpoint_every")
            cfg.checkpoint_every = static_cast<int>(parse_int(full, value));
        else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "observables") {
        if (key == "list")
            cfg.observables = split_list(value);
        else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "ed") {
        if (key == "compare")
            cfg.ed_compare = parse_bool(full, value);
        else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "run") {
        if (key == "check_convergence")
            cfg.check_convergence = parse_bool(full, value);
        else
            throw ConfigError("unknown config key '" + full + "'");
    } else if (section == "sweep") {
        if (key == "parameter")
            cfg.sweep_parameter = value;
        else if (key == "values") {
            cfg.sweep_values.clear();
            for (const auto& item : split_list(value))
                cfg.sweep_values.push_back(parse_double(full, item));
        } else
            throw ConfigError("unknown config key '" + full + "'");
    } else {
        throw ConfigError("unknown config section '[" + section + "]'");
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    model.validate();
    optimizer.validate();
    if (chi < 1) throw ConfigError("ansatz.chi must be positive");
    if (!(init_scale > 0)) throw ConfigError("ansatz.init_scale must be positive");
    if (checkpoint_every < 0) throw ConfigError("output.checkpoint_every must be >= 0");
    for (const auto& name : observables) observable_by_name(name);
    if (!sweep_parameter.empty()) {
        if (sweep_values.empty())
            throw ConfigError("sweep.values must be non-empty when sweep.parameter is set");
        for (double v : sweep_values)
            if (!std::isfinite(v) && sweep_parameter != "alpha")
                throw ConfigError("sweep.values must be finite");
        ModelSpec probe = model;
        set_model_parameter(probe, sweep_parameter, sweep_values.front());
    } else if (!sweep_values.empty()) {
        throw ConfigError("sweep.parameter missing for non-empty sweep.values");
    }
}

ExperimentConfig parse_experiment_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        assign(cfg, section.empty() ? "model" : section, key, value);
    }
    return cfg;
}

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config_text(buf.str());
}

void set_model_parameter(ModelSpec& model, const std::string& name, double value) {
    if (name == "h")
        model.h = value;
    else if (name == "J")
        model.J = value;
    else if (name == "gamma_minus")
        model.gamma_minus = value;
    else if (name == "gamma_dephasing_local")
        model.gamma_d_loc = value;
    else if (name == "gamma_dephasing_collective")
        model.gamma_d_col = value;
    else if (name == "alpha")
        model.alpha = value;
    else
        throw ConfigError("unknown sweep parameter '" + name + "'");
}

Eigen::Matrix2cd observable_by_name(const std::string& name) {
    if (name == "sx") return pauli_x();
    if (name == "sy") return pauli_y();
    if (name == "sz") return pauli_z();
    if (name == "id") return Eigen::Matrix2cd::Identity();
    throw ConfigError("unknown observable '" + name + "'");
}

std::string fmt17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace vmpomc
