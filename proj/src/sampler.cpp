#include "vmpomc/sampler.hpp"

#include <cmath>
#include <limits>

namespace vmpomc {

namespace {

constexpr double kAmpFloor = 1e-300;

inline Complex trace_prod(const Matrix& a, const Matrix& b) {
    return a.transpose().cwiseProduct(b).sum();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Rebuilds partials and amplitude after an underflow, re-randomizing one site.
void recover_degenerate(ChainState& state, const MpoAnsatz& mpo, int site) {
    std::uniform_int_distribution<int> dist(0, 3);
    state.cfg[site] = dist(state.rng);
    build_partials(mpo, state.cfg, state.partials);
    state.q = state.partials.prefix[mpo.n_sites].trace();
}

}  // namespace

ChainState make_chain(const MpoAnsatz& mpo, std::uint64_t master_seed, int worker_id) {
    ChainState state;
    state.rng.seed(splitmix64(master_seed ^ (0xA5A5A5A5ull + static_cast<std::uint64_t>(worker_id))));
    state.cfg.resize(mpo.n_sites);
    std::uniform_int_distribution<int> dist(0, 3);
    for (auto& x : state.cfg) x = dist(state.rng);
    state.partials.resize(mpo.n_sites, mpo.chi);
    build_partials(mpo, state.cfg, state.partials);
    state.q = state.partials.prefix[mpo.n_sites].trace();
    return state;
}

void sequential_sweep(ChainState& state, const MpoAnsatz& mpo) {
    const int n = mpo.n_sites;
    std::uniform_int_distribution<int> alt(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix tmp(mpo.chi, mpo.chi);
    auto& pp = state.partials;

    auto visit = [&](int j) {
        if (std::abs(state.q) < kAmpFloor) recover_degenerate(state, mpo, j);
        const int xp = (state.cfg[j] + alt(state.rng)) & 3;
        tmp.noalias() = mpo.tensor(xp) * pp.suffix[n - 1 - j];
        const Complex qp = trace_prod(pp.prefix[j], tmp);
        ++state.proposals;
        const double q2 = std::norm(state.q);
        if (unit(state.rng) * q2 < std::norm(qp)) {
            state.cfg[j] = xp;
            state.q = qp;
            ++state.accepts;
        }
    };

    if (state.rightward_next) {
        // Uses the cached suffix products; builds fresh prefix products.
        for (int j = 0; j < n; ++j) {
            visit(j);
            pp.prefix[j + 1].noalias() = pp.prefix[j] * mpo.tensor(state.cfg[j]);
        }
        right_products(mpo, state.cfg, pp);
    } else {
        for (int j = n - 1; j >= 0; --j) {
            visit(j);
            pp.suffix[n - j].noalias() = mpo.tensor(state.cfg[j]) * pp.suffix[n - 1 - j];
        }
        left_products(mpo, state.cfg, pp);
    }
    state.rightward_next = !state.rightward_next;
}

void burn_in(ChainState& state, const MpoAnsatz& mpo, int n_sweeps) {
    for (int i = 0; i < n_sweeps; ++i) sequential_sweep(state, mpo);
}

std::vector<Complex> autocorrelation(std::span<const Complex> samples, Complex exact_mean,
                                     int max_lag) {
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
    if (n <= max_lag) throw ConfigError("autocorrelation: series shorter than max_lag");
    std::vector<Complex> gamma(static_cast<size_t>(max_lag) + 1);
    for (int t = 0; t <= max_lag; ++t) {
        Complex num(0, 0);
        double den = 0;
        for (std::ptrdiff_t i = 0; i < n - t; ++i) {
            const Complex a = samples[i] - exact_mean;
            const Complex b = samples[i + t] - exact_mean;
            num += a * std::conj(b);
            den += std::norm(a);
        }
        gamma[t] = den == 0.0 ? Complex(std::numeric_limits<double>::quiet_NaN(),
                                        std::numeric_limits<double>::quiet_NaN())
                              : num / den;
    }
    return gamma;
}

Complex sample_observable(const SpinConfig& cfg, const Eigen::Matrix2cd& op) {
    // <beta|op_j|alpha> needs alpha_i = beta_i at every site but j.
    int mismatch = -1;
    int n_mismatch = 0;
    for (size_t i = 0; i < cfg.size(); ++i)
        if (ket_index(cfg[i]) != bra_index(cfg[i])) {
            mismatch = static_cast<int>(i);
            if (++n_mismatch > 1) return {0, 0};
        }
    const double inv_n = 1.0 / static_cast<double>(cfg.size());
    if (n_mismatch == 1)
        return op(bra_index(cfg[mismatch]), ket_index(cfg[mismatch])) * inv_n;
    Complex acc(0, 0);
    for (int x : cfg) acc += op(bra_index(x), ket_index(x));
    return acc * inv_n;
}

}  // namespace vmpomc
