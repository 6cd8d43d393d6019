#pragma once

#include <array>
#include <filesystem>

#include "vmpomc/types.hpp"

namespace vmpomc {

// Translationally-invariant periodic MPO for the vectorized density matrix:
// <x|rho> = tr A(x_1) ... A(x_N), with d^2 = 4 complex chi x chi matrices
// shared across all sites.
struct MpoAnsatz {
    int chi = 1;
    int n_sites = 1;
    std::array<Matrix, kSuperDim> tensors;

    MpoAnsatz() = default;
    MpoAnsatz(int chi_, int n_sites_);

    int n_param() const { return kSuperDim * chi * chi; }

    // Flattened parameter index: s outer, then row u, then column v.
    int param_index(int s, int u, int v) const { return (s * chi + u) * chi + v; }

    const Matrix& tensor(int s) const { return tensors[static_cast<size_t>(s)]; }
    Matrix& tensor(int s) { return tensors[static_cast<size_t>(s)]; }

    // Applies the flattened increment a <- a - step to all tensor elements.
    void apply_increment(const Vector& increment);
    Vector parameters() const;
    void set_parameters(const Vector& params);
    bool all_finite() const;
};

// Cached partial matrix products for a fixed configuration:
//   prefix[j] = A(x_1) ... A(x_j)        (prefix[0] = identity)
//   suffix[j] = A(x_{N+1-j}) ... A(x_N)  (suffix[0] = identity)
struct PartialProducts {
    std::vector<Matrix> prefix;
    std::vector<Matrix> suffix;

    void resize(int n_sites, int chi);
};

Complex amplitude(const MpoAnsatz& mpo, const SpinConfig& cfg);

// Fills partials.prefix (resp. suffix) by the recurrence; cost N matrix multiplies each.
void left_products(const MpoAnsatz& mpo, const SpinConfig& cfg, PartialProducts& partials);
void right_products(const MpoAnsatz& mpo, const SpinConfig& cfg, PartialProducts& partials);
void build_partials(const MpoAnsatz& mpo, const SpinConfig& cfg, PartialProducts& partials);

// tr rho = tr(T^N) with single-site transfer matrix T = A(0) + A(3).
Complex trace_rho(const MpoAnsatz& mpo);

// Rescales every tensor by trace_rho^{-1/N} (principal root). Throws ZeroTraceError
// if |trace_rho| < floor.
void normalize_trace(MpoAnsatz& mpo, double floor = 1e-300);

// Z = sum_x |<x|rho>|^2 = tr(E^N) with E = sum_s A(s) (x) conj(A(s)).
double purity(const MpoAnsatz& mpo);

// Random init: entries i.i.d. uniform in [-scale, scale] for both parts, identity
// bias 1/chi added to the diagonal-physical tensors A(0), A(3), then trace-normalized.
MpoAnsatz init_random(int chi, int n_sites, std::uint64_t seed, double scale);

// A(s=2a+b) <- (A(2a+b) + conj(A(2b+a)))/2; makes the represented rho Hermitian.
void hermitize(MpoAnsatz& mpo);

void save_checkpoint(const MpoAnsatz& mpo, const std::filesystem::path& path);
MpoAnsatz load_checkpoint(const std::filesystem::path& path);

}  // namespace vmpomc
