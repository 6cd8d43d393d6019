#include "vmpomc/observables.hpp"

#include <cmath>

namespace vmpomc {

namespace {

constexpr double kTraceFloor = 1e-300;

// Single-site transfer matrix T = sum_alpha A(alpha,alpha).
Matrix transfer_diag(const MpoAnsatz& mpo) { return mpo.tensor(0) + mpo.tensor(3); }

// Operator-inserted transfer matrix T_O = sum_{alpha,beta} op(beta,alpha) A(2a+b).
Matrix transfer_op(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op) {
    Matrix t = Matrix::Zero(mpo.chi, mpo.chi);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) t += op(b, a) * mpo.tensor(super_index(a, b));
    return t;
}

Matrix matrix_power(const Matrix& m, int k, int chi) {
    Matrix prod = Matrix::Identity(chi, chi);
    for (int i = 0; i < k; ++i) prod *= m;
    return prod;
}

}  // namespace

Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}
Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd m;
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

Complex one_body_expectation(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op) {
    const Matrix t = transfer_diag(mpo);
    const Matrix tn1 = matrix_power(t, mpo.n_sites - 1, mpo.chi);
    const Complex denom = (t * tn1).trace();
    if (std::abs(denom) < kTraceFloor) throw ZeroTraceError("one_body_expectation: tr rho = 0");
    return (transfer_op(mpo, op) * tn1).trace() / denom;
}

Complex two_body_correlation(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op_a,
                             const Eigen::Matrix2cd& op_b, int separation) {
    const int n = mpo.n_sites;
    if (separation < 1 || separation > n - 1)
        throw ConfigError("two_body_correlation: separation out of range");
    const Matrix t = transfer_diag(mpo);
    const Complex denom = matrix_power(t, n, mpo.chi).trace();
    if (std::abs(denom) < kTraceFloor) throw ZeroTraceError("two_body_correlation: tr rho = 0");
    const Matrix num = transfer_op(mpo, op_a) * matrix_power(t, separation - 1, mpo.chi) *
                       transfer_op(mpo, op_b) * matrix_power(t, n - separation - 1, mpo.chi);
    return num.trace() / denom;
}

double renyi2(const MpoAnsatz& mpo) {
    const double z = purity(mpo);
    if (z <= 0.0) throw ZeroTraceError("renyi2: non-positive purity");
    return -std::log2(z) / mpo.n_sites;
}

double cost_exact(const MpoAnsatz& mpo, const ModelSpec& model) {
    const int n = mpo.n_sites;
    if (n > 8) throw TooLargeError("cost_exact: enumeration bound is N <= 8");
    const LindbladTerms terms = LindbladTerms::build(model);
    EstimatorWorkspace ws;
    PartialProducts partials;
    partials.resize(n, mpo.chi);
    SpinConfig cfg(n, 0);
    const std::int64_t total = std::int64_t(1) << (2 * n);
    double num_sum = 0.0, z = 0.0;
    for (std::int64_t c = 0; c < total; ++c) {
        std::int64_t rem = c;
        for (int j = n - 1; j >= 0; --j) {
            cfg[j] = static_cast<int>(rem & 3);
            rem >>= 2;
        }
        build_partials(mpo, cfg, partials);
        const Complex amp = partials.prefix[n].trace();
        // |amp|^2 |L_loc|^2 = |<x|L|rho>|^2; valid even at zero amplitude.
        num_sum += std::norm(local_estimator_numerator(cfg, mpo, terms, partials, ws));
        z += std::norm(amp);
    }
    if (z <= 0.0) throw ZeroTraceError("cost_exact: vanishing purity");
    return num_sum / z;
}

Matrix reconstruct_dense(const MpoAnsatz& mpo) {
    const int n = mpo.n_sites;
    if (n > 8) throw TooLargeError("reconstruct_dense: bound is N <= 8");
    const int dim = 1 << n;
    Matrix rho(dim, dim);
    SpinConfig cfg(n);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            for (int j = 0; j < n; ++j) {
                const int aj = (a >> (n - 1 - j)) & 1;
                const int bj = (b >> (n - 1 - j)) & 1;
                cfg[j] = super_index(aj, bj);
            }
            rho(a, b) = amplitude(mpo, cfg);
        }
    return rho;
}

Complex sample_observable_mean(const MpoAnsatz& mpo, const Eigen::Matrix2cd& op) {
    const int chi = mpo.chi;
    const int chi2 = chi * chi;
    // Doubled-layer transfer matrices: E unconstrained, D diagonal-constrained,
    // F operator-inserted with the bra/alpha weight op(beta,alpha).
    Matrix e = Matrix::Zero(chi2, chi2), d = Matrix::Zero(chi2, chi2),
           f = Matrix::Zero(chi2, chi2);
    for (int s = 0; s < kSuperDim; ++s) {
        const Matrix& a = mpo.tensor(s);
        Matrix blockfill = Matrix::Zero(chi2, chi2);
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v)
                blockfill.block(u * chi, v * chi, chi, chi) = a(u, v) * a.conjugate();
        e += blockfill;
        if (ket_index(s) == bra_index(s)) d += blockfill;
        f += op(bra_index(s), ket_index(s)) * blockfill;
    }
    Matrix dpow = Matrix::Identity(chi2, chi2);
    for (int j = 1; j < mpo.n_sites; ++j) dpow *= d;
    Matrix epow = e;
    for (int j = 1; j < mpo.n_sites; ++j) epow *= e;
    const Complex z = epow.trace();
    if (std::abs(z) < kTraceFloor) throw ZeroTraceError("sample_observable_mean: zero purity");
    return (f * dpow).trace() / z;
}

}  // namespace vmpomc
