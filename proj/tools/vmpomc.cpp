#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "vmpomc/config.hpp"
#include "vmpomc/ed.hpp"
#include "vmpomc/observables.hpp"

namespace {

using namespace vmpomc;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config file");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed, "override optimizer seed");
    cmd->add_option("--workers", opts.workers, "override Markov-chain count");
    cmd->add_option("--out", opts.out_dir, "override output directory");
}

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig cfg = parse_experiment_config(opts.config_path);
    if (opts.seed >= 0) cfg.optimizer.seed = static_cast<std::uint64_t>(opts.seed);
    int workers = opts.workers;
    if (workers == 0)
        if (const char* env = std::getenv("VMPOMC_WORKERS")) workers = std::atoi(env);
    if (workers > 0) cfg.optimizer.n_workers = workers;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file " + path.string());
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows,
                          const std::vector<std::string>& observables) {
    auto out = open_out(path);
    out << "iteration,cost,cost_per_site,delta,acceptance_rate,wall_ms";
    for (const auto& name : observables) out << "," << name;
    out << "\n";
    for (const auto& r : rows) {
        out << r.iteration << "," << fmt17(r.cost) << "," << fmt17(r.cost_per_site) << ","
            << fmt17(r.delta) << "," << fmt17(r.acceptance_rate) << "," << fmt17(r.wall_ms);
        for (double v : r.observables) out << "," << fmt17(v);
        out << "\n";
    }
}

MpoAnsatz initial_ansatz(const ExperimentConfig& cfg) {
    if (!cfg.init_checkpoint.empty()) {
        MpoAnsatz mpo = load_checkpoint(cfg.init_checkpoint);
        if (mpo.chi != cfg.chi)
            throw ConfigError("init_checkpoint chi does not match ansatz.chi");
        // Tensors are site-independent; reuse across chain lengths is a direct load.
        mpo.n_sites = cfg.model.n_sites;
        normalize_trace(mpo);
        return mpo;
    }
    return init_random(cfg.chi, cfg.model.n_sites, cfg.init_seed, cfg.init_scale);
}

std::vector<Eigen::Matrix2cd> observable_matrices(const ExperimentConfig& cfg) {
    std::vector<Eigen::Matrix2cd> ops;
    for (const auto& name : cfg.observables) ops.push_back(observable_by_name(name));
    return ops;
}

// Runs one optimization and writes trajectory + final checkpoint + summary
// key=value lines into `dir`.
OptimizationResult run_point(const ExperimentConfig& cfg, const MpoAnsatz& start,
                             const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    OptimizerConfig opt = cfg.optimizer;
    if (cfg.checkpoint_every > 0)
        opt.on_iteration = [&](const TrajectoryRow& row, const MpoAnsatz& mpo) {
            if ((row.iteration + 1) % cfg.checkpoint_every == 0)
                save_checkpoint(mpo, dir / ("iter_" + std::to_string(row.iteration) + ".ckpt"));
        };
    OptimizationResult result = run_optimization(start, cfg.model, opt, observable_matrices(cfg));
    if (result.trajectory.empty()) throw ConfigError("optimizer.n_iterations must be >= 1");
    write_trajectory_csv(dir / "trajectory.csv", result.trajectory, cfg.observables);
    save_checkpoint(result.mpo, dir / "final.ckpt");

    auto summary = open_out(dir / "summary.txt");
    const auto& last = result.trajectory.back();
    summary << "iterations = " << result.trajectory.size() << "\n"
            << "final_cost = " << fmt17(last.cost) << "\n"
            << "final_cost_per_site = " << fmt17(last.cost_per_site) << "\n"
            << "converged = " << (result.converged ? "true" : "false") << "\n"
            << "purity = " << fmt17(purity(result.mpo)) << "\n"
            << "renyi2 = " << fmt17(renyi2(result.mpo)) << "\n";
    for (size_t i = 0; i < cfg.observables.size(); ++i)
        summary << cfg.observables[i] << " = " << fmt17(last.observables[i]) << "\n";
    if (cfg.ed_compare) {
        const Matrix rho_ed = steady_state(build_dense_liouvillian(cfg.model));
        Matrix rho_var = reconstruct_dense(result.mpo);
        rho_var = 0.5 * (rho_var + rho_var.adjoint().eval());
        rho_var /= rho_var.trace();
        try {
            summary << "ed_fidelity = " << fmt17(uhlmann_fidelity(rho_ed, rho_var, 1e-3))
                    << "\n";
        } catch (const NotAStateError&) {
            // Unconverged variational rho can violate positivity beyond the floor.
            summary << "ed_fidelity = nan\n";
        }
        for (const auto& name : cfg.observables)
            summary << "ed_" << name << " = "
                    << fmt17(dense_one_body_expectation(rho_ed, observable_by_name(name),
                                                        cfg.model.n_sites)
                                 .real())
                    << "\n";
    }
    return result;
}

int cmd_run(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    if (cfg.optimizer.n_iterations < 1) throw ConfigError("optimizer.n_iterations must be >= 1");
    const OptimizationResult result = run_point(cfg, initial_ansatz(cfg), cfg.out_dir);
    std::cout << "final C/N = " << fmt17(result.trajectory.back().cost_per_site) << "\n";
    if (cfg.check_convergence && !result.converged)
        std::cerr << "[vmpomc] warning: convergence criterion C/N < 1e-4 not met\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    if (cfg.sweep_parameter.empty())
        throw ConfigError("sweep subcommand requires sweep.parameter and sweep.values");
    std::filesystem::create_directories(cfg.out_dir);
    auto summary = open_out(cfg.out_dir / "sweep_summary.csv");
    summary << cfg.sweep_parameter << ",status,cost_per_site,purity,renyi2";
    for (const auto& name : cfg.observables) summary << "," << name;
    summary << "\n";

    // Each point warm-starts from the previous point's converged tensors,
    // in the order the values are listed.
    MpoAnsatz start = initial_ansatz(cfg);
    for (size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        const double value = cfg.sweep_values[i];
        ExperimentConfig point = cfg;
        set_model_parameter(point.model, cfg.sweep_parameter, value);
        summary << fmt17(value);
        try {
            const OptimizationResult result =
                run_point(point, start, cfg.out_dir / ("point_" + std::to_string(i)));
            start = result.mpo;
            const auto& last = result.trajectory.back();
            summary << ",ok," << fmt17(last.cost_per_site) << "," << fmt17(purity(result.mpo))
                    << "," << fmt17(renyi2(result.mpo));
            for (double v : last.observables) summary << "," << fmt17(v);
            summary << "\n";
        } catch (const std::exception& e) {
            std::cerr << "[vmpomc] sweep point " << i << " failed: " << e.what() << "\n";
            summary << ",failed";
            for (size_t c = 0; c < 3 + cfg.observables.size(); ++c) summary << ",nan";
            summary << "\n";
        }
    }
    return 0;
}

int cmd_ed(const CommonOpts& opts, bool write_rho) {
    const ExperimentConfig cfg = load_config(opts);
    std::filesystem::create_directories(cfg.out_dir);
    const Matrix liou = build_dense_liouvillian(cfg.model);
    const Matrix rho = steady_state(liou);
    const double residual = (liou * vectorize(rho, cfg.model.n_sites)).norm() /
                            vectorize(rho, cfg.model.n_sites).norm();

    auto out = open_out(cfg.out_dir / "ed.csv");
    out << "observable,re,im\n";
    for (const auto& name : cfg.observables) {
        const Complex v =
            dense_one_body_expectation(rho, observable_by_name(name), cfg.model.n_sites);
        out << name << "," << fmt17(v.real()) << "," << fmt17(v.imag()) << "\n";
    }
    const double pur = (rho * rho).trace().real();
    out << "purity," << fmt17(pur) << ",0\n";
    out << "renyi2," << fmt17(-std::log2(pur) / cfg.model.n_sites) << ",0\n";
    out << "residual," << fmt17(residual) << ",0\n";
    if (write_rho) {
        auto rout = open_out(cfg.out_dir / "rho.csv");
        for (Eigen::Index a = 0; a < rho.rows(); ++a)
            for (Eigen::Index b = 0; b < rho.cols(); ++b)
                rout << a << "," << b << "," << fmt17(rho(a, b).real()) << ","
                     << fmt17(rho(a, b).imag()) << "\n";
    }
    std::cout << "steady-state residual = " << fmt17(residual) << "\n";
    return 0;
}

int cmd_measure(const std::string& checkpoint, const std::vector<std::string>& names) {
    const MpoAnsatz mpo = load_checkpoint(checkpoint);
    std::cout << "observable,re,im\n";
    for (const auto& name : names) {
        const Complex v = one_body_expectation(mpo, observable_by_name(name));
        std::cout << name << "," << fmt17(v.real()) << "," << fmt17(v.imag()) << "\n";
    }
    std::cout << "purity," << fmt17(purity(mpo)) << ",0\n";
    std::cout << "renyi2," << fmt17(renyi2(mpo)) << ",0\n";
    for (int r = 1; r <= mpo.n_sites - 1; ++r) {
        const Complex c = two_body_correlation(mpo, pauli_z(), pauli_z(), r);
        std::cout << "corr_zz_" << r << "," << fmt17(c.real()) << "," << fmt17(c.imag())
                  << "\n";
    }
    return 0;
}

int cmd_autocorr(const std::string& checkpoint, int n_samples, int max_lag,
                 std::uint64_t seed) {
    const MpoAnsatz mpo = load_checkpoint(checkpoint);
    ChainState chain = make_chain(mpo, seed, 0);
    burn_in(chain, mpo, 1000);
    std::vector<Complex> sx(n_samples), sz(n_samples);
    const Eigen::Matrix2cd ox = pauli_x(), oz = pauli_z();
    for (int i = 0; i < n_samples; ++i) {
        sequential_sweep(chain, mpo);
        sx[i] = sample_observable(chain.cfg, ox);
        sz[i] = sample_observable(chain.cfg, oz);
    }
    const auto gx = autocorrelation(sx, sample_observable_mean(mpo, ox), max_lag);
    const auto gz = autocorrelation(sz, sample_observable_mean(mpo, oz), max_lag);
    std::cout << "lag,gamma_sx_re,gamma_sx_im,gamma_sz_re,gamma_sz_im\n";
    for (int t = 0; t <= max_lag; ++t)
        std::cout << t << "," << fmt17(gx[t].real()) << "," << fmt17(gx[t].imag()) << ","
                  << fmt17(gz[t].real()) << "," << fmt17(gz[t].imag()) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational MPO Monte Carlo for open spin chains"};
    app.require_subcommand(1);

    CommonOpts run_opts, sweep_opts, ed_opts;
    bool write_rho = false;
    std::string checkpoint;
    std::vector<std::string> measure_obs{"sx", "sy", "sz"};
    int n_samples = 100000, max_lag = 20;
    std::int64_t ac_seed = 0;

    auto* run = app.add_subcommand("run", "optimize a steady state from a config file");
    add_common(run, run_opts);
    auto* sweep = app.add_subcommand("sweep", "run a warm-started parameter sweep");
    add_common(sweep, sweep_opts);
    auto* ed = app.add_subcommand("ed", "exact steady state of a small chain");
    add_common(ed, ed_opts);
    ed->add_flag("--write-rho", write_rho, "also write the dense density matrix");
    auto* measure = app.add_subcommand("measure", "contract observables from a checkpoint");
    measure->add_option("--checkpoint", checkpoint, "MPO checkpoint file")->required();
    measure->add_option("--observables", measure_obs, "observable names");
    auto* autoc = app.add_subcommand("autocorr", "sample autocorrelation from a checkpoint");
    autoc->add_option("--checkpoint", checkpoint, "MPO checkpoint file")->required();
    autoc->add_option("--n-samples", n_samples, "number of recorded samples");
    autoc->add_option("--max-lag", max_lag, "largest lag");
    autoc->add_option("--seed", ac_seed, "chain seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts);
        if (ed->parsed()) return cmd_ed(ed_opts, write_rho);
        if (measure->parsed()) return cmd_measure(checkpoint, measure_obs);
        if (autoc->parsed())
            return cmd_autocorr(checkpoint, n_samples, max_lag,
                                static_cast<std::uint64_t>(ac_seed));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
