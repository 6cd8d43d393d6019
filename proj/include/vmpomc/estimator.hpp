#pragma once

#include "vmpomc/model.hpp"
#include "vmpomc/mpo.hpp"

namespace vmpomc {

// Sparse view of the Lindbladian terms, precompiled once per model for the
// estimator hot loops. Diagonal elements (in the computational super-basis)
// contribute with amplitude ratio 1 and bypass all tensor contractions.
struct LindbladTerms {
    ModelSpec model;
    LocalSuperOp one_body;
    LocalSuperOp two_body;  // NN Ising block; unused when alpha is finite or J = 0
    bool has_two_body = false;

    // Off-diagonal entries by row, and the diagonal, split out of the matrices.
    std::array<Complex, 4> l1_diag{};
    std::array<std::vector<std::pair<int, Complex>>, 4> l1_offdiag;
    std::array<Complex, 16> l2_diag{};
    std::array<std::vector<std::pair<int, Complex>>, 16> l2_offdiag;

    // Test hook: route diagonal elements of l1/l2 through the generic trace
    // path instead of the shortcut. Results must agree to rounding.
    bool use_diagonal_shortcut = true;

    static LindbladTerms build(const ModelSpec& model);

    // Replaces the two-body block (test use; refreshes the sparse views).
    void set_two_body(LocalSuperOp op);

    // Sum of all diagonal contributions <x|L|x>.
    Complex diagonal_element(const SpinConfig& cfg) const;
};

// Scratch buffers reused across estimator calls within one chain.
struct EstimatorWorkspace {
    Matrix tmp, tmp2, g;
    std::vector<Matrix> yprefix, ysuffix;
    Vector delta;
    void ensure(int chi, int n_sites);
};

// L_loc(x) = <x|L|rho>/<x|rho> via cached partial products; O(N chi^3).
Complex local_estimator(const SpinConfig& cfg, const MpoAnsatz& mpo, const LindbladTerms& terms,
                        const PartialProducts& partials, EstimatorWorkspace& ws);

// Numerator <x|L|rho>; defined even at zero amplitude (used by exact summation).
Complex local_estimator_numerator(const SpinConfig& cfg, const MpoAnsatz& mpo,
                                  const LindbladTerms& terms, const PartialProducts& partials,
                                  EstimatorWorkspace& ws);

// Log-derivative tensor Delta_i(x) = d ln<x|rho> / d a_i, flattened by (s,u,v).
void log_derivative(const SpinConfig& cfg, const MpoAnsatz& mpo, const PartialProducts& partials,
                    EstimatorWorkspace& ws, Vector& out);

// dL_loc,i(x) = sum_y <x|L|y> Delta_i(y) <y|rho>/<x|rho>; O(N^2 chi^3).
// `delta_x` must hold the precomputed Delta(x) for the same configuration.
void local_estimator_gradient(const SpinConfig& cfg, const MpoAnsatz& mpo,
                              const LindbladTerms& terms, const PartialProducts& partials,
                              const Vector& delta_x, EstimatorWorkspace& ws, Vector& out);

}  // namespace vmpomc
