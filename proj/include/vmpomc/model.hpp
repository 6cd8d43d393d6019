#pragma once

#include <array>
#include <limits>
#include <utility>

#include "vmpomc/types.hpp"

namespace vmpomc {

// Physical parameters of the dissipative Ising chain on a periodic ring:
//   H = J sum_i sz_i sz_{i+1} + h sum_i sx_i            (alpha = inf)
//   H = (J/N_alpha) sum_{i<j} sz_i sz_j / d(i,j)^alpha  (alpha finite, ring distance)
// with spin decay gamma_minus, local dephasing gamma_d_loc and collective
// dephasing gamma_d_col.
struct ModelSpec {
    int n_sites = 2;
    double J = 0.5;
    double h = 0.0;
    double gamma_minus = 1.0;
    double gamma_d_loc = 0.0;
    double gamma_d_col = 0.0;
    double alpha = std::numeric_limits<double>::infinity();

    bool nearest_neighbor() const { return std::isinf(alpha); }
    bool has_interaction() const { return J != 0.0; }
    void validate() const;
};

// Dense local superoperator block acting on one site (4x4) or a site pair (16x16),
// with its sparsity pattern. Two-site super-index packing: X = 4*x_i + x_{i+1}.
struct LocalSuperOp {
    int arity = 1;
    Matrix mat;
    std::vector<std::pair<int, int>> nonzeros;
    bool diagonal_only = true;

    void finalize();  // rebuilds nonzeros/diagonal_only from mat
};

// 4x4 matrix of the 1-local Lindbladian: field, spin decay and local dephasing.
LocalSuperOp build_one_body(const ModelSpec& model);

// 16x16 matrix of -iJ(szsz (x) 1 - 1 (x) (szsz)^T) on a site pair; purely diagonal.
LocalSuperOp build_two_body_nn(const ModelSpec& model);

// Kac factor N_alpha = (1/N) sum_{i<j} d(i,j)^{-alpha}, ring distance; 1 for alpha = inf.
double kac_norm(int n_sites, double alpha);

// Ring (minimum-image) distance between sites i and j, 0-based.
int ring_distance(int i, int j, int n_sites);

// Diagonal amplitude of the long-range Ising term: -i(J/N_alpha)(E_ket - E_bra).
Complex long_range_diag_amplitude(const SpinConfig& cfg, const ModelSpec& model);

// Diagonal amplitude of the collective dephasing dissipator:
// -(gamma/2)(M_z(ket) - M_z(bra))^2.
double collective_dephasing_amplitude(const SpinConfig& cfg, const ModelSpec& model);

// Enumeration of the Lindbladian terms touching one site (for estimator wiring).
struct TermRef {
    enum class Kind { OneLocal, TwoLocalPair, LongRangeDiag, CollectiveDiag };
    Kind kind;
    std::array<int, 2> sites;  // sites[1] = -1 for non-pair terms
};
std::vector<TermRef> connections(const ModelSpec& model, int site);

}  // namespace vmpomc
