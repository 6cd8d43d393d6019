#include "vmpomc/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <thread>

#include "vmpomc/observables.hpp"

namespace vmpomc {

namespace {
constexpr int kMetricBlockRows = 64;
}

void MonteCarloAccumulator::init(int n_param, bool metric) {
    n_samples = 0;
    weight = 0.0;
    sum_L2 = 0.0;
    sum_LdL = Vector::Zero(n_param);
    sum_delta = Vector::Zero(n_param);
    sum_deltaconj = Vector::Zero(n_param);
    with_metric = metric;
    if (with_metric) {
        sum_deltaconj_delta = Matrix::Zero(n_param, n_param);
        if (block_.rows() != kMetricBlockRows || block_.cols() != n_param)
            block_.resize(kMetricBlockRows, n_param);
        block_fill_ = 0;
    }
}

void MonteCarloAccumulator::add(Complex l_loc, const Vector& delta, const Vector& dl_loc,
                                double w) {
    ++n_samples;
    weight += w;
    sum_L2 += w * std::norm(l_loc);
    sum_LdL += (w * l_loc) * dl_loc.conjugate();
    sum_delta += w * delta;
    sum_deltaconj += w * delta.conjugate();
    if (with_metric) {
        block_.row(block_fill_++) = std::sqrt(w) * delta.transpose();
        if (block_fill_ == kMetricBlockRows) flush();
    }
}

void MonteCarloAccumulator::flush() {
    if (with_metric && block_fill_ > 0) {
        const auto rows = block_.topRows(block_fill_);
        sum_deltaconj_delta.noalias() += rows.adjoint() * rows;
        block_fill_ = 0;
    }
}

void MonteCarloAccumulator::merge(const MonteCarloAccumulator& other) {
    n_samples += other.n_samples;
    weight += other.weight;
    sum_L2 += other.sum_L2;
    sum_LdL += other.sum_LdL;
    sum_delta += other.sum_delta;
    sum_deltaconj += other.sum_deltaconj;
    if (with_metric) sum_deltaconj_delta += other.sum_deltaconj_delta;
}

Vector gradient(const MonteCarloAccumulator& acc) {
    const double w = acc.weight;
    return acc.sum_LdL / w - acc.sum_deltaconj / w * (acc.sum_L2 / w);
}

Matrix metric_tensor(const MonteCarloAccumulator& acc) {
    const double w = acc.weight;
    Matrix s = acc.sum_deltaconj_delta / w;
    s.noalias() -= (acc.sum_deltaconj / w) * (acc.sum_delta / w).transpose();
    return s;
}

void regularize(Matrix& s, double epsilon) {
    s.diagonal().array() += epsilon;
}

Vector solve_update(const Matrix& s_reg, const Vector& f, double delta) {
    const double fnorm = f.norm();
    if (fnorm == 0.0) return Vector::Zero(f.size());
    Eigen::LDLT<Matrix> ldlt(s_reg);
    if (ldlt.info() != Eigen::Success)
        throw SolveFailure("solve_update: LDLT factorization failed");
    const Vector u = ldlt.solve(f);
    const double residual = (s_reg * u - f).norm() / fnorm;
    if (!(residual < 1e-8))
        throw SolveFailure("solve_update: residual " + std::to_string(residual));
    return delta * u;
}

double step_schedule(int k, double delta0, double decay) {
    return delta0 * std::pow(decay, k);
}

void OptimizerConfig::validate() const {
    if (delta0 <= 0) throw ConfigError("delta0 must be positive");
    if (decay <= 0 || decay > 1) throw ConfigError("decay factor must be in (0, 1]");
    if (method == Method::SR && epsilon <= 0) throw ConfigError("SR requires epsilon > 0");
    if (n_mc < 1 || n_workers < 1) throw ConfigError("n_mc and n_workers must be positive");
    if (n_iterations < 0 || burn_in_sweeps < 0) throw ConfigError("negative iteration count");
}

namespace {

struct Worker {
    ChainState chain;
    MonteCarloAccumulator acc;
    EstimatorWorkspace ws;
    Vector delta, dl;
    std::uint64_t proposals_mark = 0, accepts_mark = 0;
};

void sample_phase(Worker& w, const MpoAnsatz& mpo, const LindbladTerms& terms, int n_mc) {
    // The update between iterations invalidated the cached products.
    build_partials(mpo, w.chain.cfg, w.chain.partials);
    w.chain.q = w.chain.partials.prefix[mpo.n_sites].trace();
    for (int i = 0; i < n_mc; ++i) {
        Complex l_loc;
        for (int attempt = 0;; ++attempt) {
            sequential_sweep(w.chain, mpo);
            try {
                l_loc = local_estimator(w.chain.cfg, mpo, terms, w.chain.partials, w.ws);
                break;
            } catch (const ZeroAmplitudeError&) {
                if (attempt >= 8) throw;
            }
        }
        log_derivative(w.chain.cfg, mpo, w.chain.partials, w.ws, w.delta);
        local_estimator_gradient(w.chain.cfg, mpo, terms, w.chain.partials, w.delta, w.ws,
                                 w.dl);
        w.acc.add(l_loc, w.delta, w.dl);
    }
    w.acc.flush();
}

void run_parallel(std::vector<Worker>& workers, int n_threads,
                  const std::function<void(Worker&)>& fn) {
    const int n = static_cast<int>(workers.size());
    const int threads = std::max(1, std::min(n_threads, n));
    if (threads == 1) {
        for (auto& w : workers) fn(w);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += threads) fn(workers[i]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

OptimizationResult run_optimization(MpoAnsatz mpo, const ModelSpec& model,
                                    const OptimizerConfig& config,
                                    const std::vector<Eigen::Matrix2cd>& observable_ops) {
    config.validate();
    model.validate();
    const LindbladTerms terms = LindbladTerms::build(model);
    const int n_param = mpo.n_param();
    const bool sr = config.method == OptimizerConfig::Method::SR;
    const int n_threads =
        config.n_threads > 0 ? config.n_threads
                             : std::max(1u, std::thread::hardware_concurrency());

    if (static_cast<std::int64_t>(config.n_mc) * config.n_workers < n_param)
        std::cerr << "[vmpomc] warning: N_MC (" << config.n_mc * config.n_workers
                  << ") is not large compared to N_param (" << n_param << ")\n";

    std::vector<Worker> workers(config.n_workers);
    for (int w = 0; w < config.n_workers; ++w) {
        workers[w].chain = make_chain(mpo, config.seed, w);
        workers[w].delta = Vector::Zero(n_param);
        workers[w].dl = Vector::Zero(n_param);
    }
    run_parallel(workers, n_threads,
                 [&](Worker& w) { burn_in(w.chain, mpo, config.burn_in_sweeps); });

    OptimizationResult result;
    result.trajectory.reserve(config.n_iterations);
    MonteCarloAccumulator merged;
    int n_mc = config.n_mc;

    for (int k = 0; k < config.n_iterations; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& [at, value] : config.mc_schedule)
            if (at == k) n_mc = value;

        run_parallel(workers, n_threads, [&](Worker& w) {
            w.acc.init(n_param, sr);
            w.proposals_mark = w.chain.proposals;
            w.accepts_mark = w.chain.accepts;
            sample_phase(w, mpo, terms, n_mc);
        });

        merged.init(n_param, sr);
        for (const auto& w : workers) merged.merge(w.acc);

        const Vector f = gradient(merged);
        const double delta_k = step_schedule(k, config.delta0, config.decay);
        Vector increment;
        if (sr) {
            const Matrix s = metric_tensor(merged);
            double eps = config.epsilon;
            for (int attempt = 0;; ++attempt) {
                Matrix s_reg = s;
                regularize(s_reg, eps);
                try {
                    increment = solve_update(s_reg, f, delta_k);
                    break;
                } catch (const SolveFailure&) {
                    if (attempt >= 3) throw;
                    eps *= 10.0;
                }
            }
        } else {
            increment = delta_k * f;
        }

        mpo.apply_increment(increment);
        if (config.hermitize) hermitize(mpo);
        normalize_trace(mpo);
        if (!mpo.all_finite())
            throw NaNGuardError("run_optimization: non-finite tensor at iteration " +
                                std::to_string(k));

        std::uint64_t proposals = 0, accepts = 0;
        for (const auto& w : workers) {
            proposals += w.chain.proposals - w.proposals_mark;
            accepts += w.chain.accepts - w.accepts_mark;
        }

        TrajectoryRow row;
        row.iteration = k;
        row.cost = merged.sum_L2 / merged.weight;
        row.cost_per_site = row.cost / mpo.n_sites;
        row.delta = delta_k;
        row.acceptance_rate =
            proposals == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(proposals);
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        for (const auto& op : observable_ops)
            row.observables.push_back(one_body_expectation(mpo, op).real());
        if (config.on_iteration) config.on_iteration(row, mpo);
        result.trajectory.push_back(std::move(row));
    }

    result.converged = !result.trajectory.empty() &&
                       result.trajectory.back().cost_per_site < 1e-4;
    result.mpo = std::move(mpo);
    return result;
}

}  // namespace vmpomc
