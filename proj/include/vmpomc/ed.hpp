#pragma once

#include "vmpomc/model.hpp"

namespace vmpomc {

// Dense Liouvillian in the site-local super-index basis X = sum_j x_j 4^{N-1-j},
// x_j = 2*alpha_j + beta_j; size 4^N x 4^N, N <= 7. Built independently of the
// estimator path, directly from H and the jump operators on the full Hilbert space.
Matrix build_dense_liouvillian(const ModelSpec& model);

// Maps a Hilbert-space index pair to the Liouville basis index and back.
std::int64_t liouville_index(int ket, int bra, int n_sites);

// Vectorizes/devectorizes a dense density matrix in the same basis.
Vector vectorize(const Matrix& rho, int n_sites);
Matrix devectorize(const Vector& v, int n_sites);

// Null-eigenvector steady state: hermitized, trace-normalized dense rho.
// Throws DegenerateNullError if a second independent null direction exists.
Matrix steady_state(const Matrix& liouvillian);

// Site-averaged one-body expectation (1/N) sum_j tr(rho op_j) on a dense rho.
Complex dense_one_body_expectation(const Matrix& rho, const Eigen::Matrix2cd& op, int n_sites);

// Uhlmann fidelity F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Negative
// eigenvalues within the floor are clipped and the state renormalized.
double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma, double psd_floor = 1e-8);

}  // namespace vmpomc
