#pragma once

#include <random>
#include <span>

#include "vmpomc/mpo.hpp"

namespace vmpomc {

// One Metropolis Markov chain. The chain is confined to a single worker; the
// frozen MpoAnsatz is shared read-only between chains.
struct ChainState {
    SpinConfig cfg;
    PartialProducts partials;  // both sides valid for cfg between sweeps
    bool rightward_next = true;
    Complex q{};  // current amplitude <x|rho>
    std::mt19937_64 rng;
    std::uint64_t proposals = 0;
    std::uint64_t accepts = 0;
};

ChainState make_chain(const MpoAnsatz& mpo, std::uint64_t master_seed, int worker_id);

// One sequential Metropolis sweep (direction alternates). Proposes a new value
// at every site in order, accepting with probability min{1, |q'/q|^2}; reuses the
// cached opposite-side partial products, cost <= 3N chi^3 multiplies. On return
// both partial-product sides are valid for the updated configuration.
void sequential_sweep(ChainState& state, const MpoAnsatz& mpo);

void burn_in(ChainState& state, const MpoAnsatz& mpo, int n_sweeps);

// Normalized autocorrelation of an observable series at lags 0..max_lag, with the
// mean supplied exactly. A zero-variance series yields NaN sentinels.
std::vector<Complex> autocorrelation(std::span<const Complex> samples, Complex exact_mean,
                                     int max_lag);

// Per-sample observable value O(x) = <beta|O|alpha> for the spin-averaged
// one-body operator (1/N) sum_j op_j.
Complex sample_observable(const SpinConfig& cfg, const Eigen::Matrix2cd& op);

}  // namespace vmpomc
