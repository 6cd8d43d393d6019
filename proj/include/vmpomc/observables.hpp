#pragma once

#include "vmpomc/estimator.hpp"
#include "vmpomc/model.hpp"
#include "vmpomc/mpo.hpp"

namespace vmpomc {

// Common one-body operators.
Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

// <O> = tr(O rho)/tr(rho) via transfer-matrix contraction (Monte Carlo free).
Complex one_body_expectation(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op);

// <O_a(0) O_b(r)> at ring separation r, 1 <= r <= N-1.
Complex two_body_correlation(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op_a,
                             const Eigen::Matrix2cd& op_b, int separation);

// Renyi-2 entropy density S2 = -log2(Z)/N of a trace-normalized MPO.
double renyi2(const MpoAnsatz& mpo);

// Exact cost C = sum_x p(x) |L_loc(x)|^2 by full enumeration; N <= 8.
double cost_exact(const MpoAnsatz& mpo, const ModelSpec& model);

// Dense rho_{alpha beta} from amplitudes; N <= 8. Site 0 is the most significant bit.
Matrix reconstruct_dense(const MpoAnsatz& mpo);

// E_{x~p}[<beta|O|alpha>] for the spin-averaged one-body op; the exact mean of
// the per-sample observable stream used in autocorrelation analysis.
Complex sample_observable_mean(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op);

}  // namespace vmpomc
