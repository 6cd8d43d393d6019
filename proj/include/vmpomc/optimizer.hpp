#pragma once

#include <functional>

#include "vmpomc/estimator.hpp"
#include "vmpomc/sampler.hpp"

namespace vmpomc {

// Running sums feeding the gradient and metric-tensor ensemble averages.
// Accumulation order is fixed (per-chain, then fixed chain-order merge), so the
// reduction is deterministic for a given configuration.
struct MonteCarloAccumulator {
    std::int64_t n_samples = 0;
    double weight = 0.0;  // equals n_samples for unit-weight sampling
    double sum_L2 = 0.0;
    Vector sum_LdL;        // sum w * L_loc * conj(dL_loc)
    Vector sum_delta;      // sum w * Delta
    Vector sum_deltaconj;  // sum w * conj(Delta)
    Matrix sum_deltaconj_delta;  // sum w * conj(Delta_i) Delta_j (SR only)
    bool with_metric = false;

    void init(int n_param, bool with_metric);
    // Adds one (possibly weighted) sample. Weighted adds support exact
    // enumeration oracles; Monte Carlo uses weight 1.
    void add(Complex l_loc, const Vector& delta, const Vector& dl_loc, double w = 1.0);
    void flush();  // drains the metric block buffer
    void merge(const MonteCarloAccumulator& other);

  private:
    Matrix block_;  // row-block of conj(Delta) rows pending a GEMM flush
    int block_fill_ = 0;
    std::vector<double> block_w_;
};

// f_i = E[L_loc conj(dL_loc,i)] - E[conj(Delta_i)] E[|L_loc|^2].
Vector gradient(const MonteCarloAccumulator& acc);

// S_ij = E[conj(Delta_i) Delta_j] - E[conj(Delta_i)] E[Delta_j].
Matrix metric_tensor(const MonteCarloAccumulator& acc);

void regularize(Matrix& s, double epsilon);

// Solves S_reg u = f (Hermitian solver, residual-checked) and returns delta*u.
Vector solve_update(const Matrix& s_reg, const Vector& f, double delta);

double step_schedule(int k, double delta0, double decay);

struct OptimizerConfig {
    enum class Method { SGD, SR };
    Method method = Method::SR;
    double epsilon = 0.01;
    double delta0 = 0.01;
    double decay = 1.0;  // geometric step factor F
    int n_iterations = 0;
    int n_mc = 100;      // samples per chain per iteration
    int n_workers = 1;   // number of independent Markov chains
    std::uint64_t seed = 0;
    bool hermitize = true;
    int burn_in_sweeps = 1000;
    std::vector<std::pair<int, int>> mc_schedule;  // (iteration, new n_mc)
    int n_threads = 0;  // execution threads; 0 = hardware. Does not affect results.
    // Invoked after each completed iteration (checkpoint cadence, live logging).
    std::function<void(const struct TrajectoryRow&, const MpoAnsatz&)> on_iteration;

    void validate() const;
};

struct TrajectoryRow {
    int iteration;
    double cost;
    double cost_per_site;
    double delta;
    double acceptance_rate;
    double wall_ms;
    std::vector<double> observables;
};

struct OptimizationResult {
    MpoAnsatz mpo;
    std::vector<TrajectoryRow> trajectory;
    bool converged = false;  // final C/N < 1e-4
};

// Full optimization loop: freeze -> sample on n_workers chains -> merge in chain
// order -> update -> hermitize -> normalize_trace. `observable_ops` values are
// recorded per iteration by exact contraction.
OptimizationResult run_optimization(MpoAnsatz mpo, const ModelSpec& model,
                                    const OptimizerConfig& config,
                                    const std::vector<Eigen::Matrix2cd>& observable_ops = {});

}  // namespace vmpomc
