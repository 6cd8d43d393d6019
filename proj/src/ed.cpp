#include "vmpomc/ed.hpp"

#include <cmath>
#include <random>

namespace vmpomc {

namespace {

// Spread the bits of a Hilbert index into base-4 digit positions, so that
// X = 2*spread(ket) + spread(bra).
std::int64_t spread_bits(int a, int n) {
    std::int64_t out = 0;
    for (int j = 0; j < n; ++j) {
        const std::int64_t bit = (a >> (n - 1 - j)) & 1;
        out |= bit << (2 * (n - 1 - j));
    }
    return out;
}

double z_of_bit(int a, int j, int n) { return ((a >> (n - 1 - j)) & 1) ? -1.0 : 1.0; }

}  // namespace

std::int64_t liouville_index(int ket, int bra, int n_sites) {
    return 2 * spread_bits(ket, n_sites) + spread_bits(bra, n_sites);
}

Vector vectorize(const Matrix& rho, int n_sites) {
    const int dim = 1 << n_sites;
    Vector v(std::int64_t(dim) * dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) v[liouville_index(a, b, n_sites)] = rho(a, b);
    return v;
}

Matrix devectorize(const Vector& v, int n_sites) {
    const int dim = 1 << n_sites;
    Matrix rho(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) rho(a, b) = v[liouville_index(a, b, n_sites)];
    return rho;
}

Matrix build_dense_liouvillian(const ModelSpec& model) {
    model.validate();
    const int n = model.n_sites;
    if (n > 7) throw TooLargeError("build_dense_liouvillian: bound is N <= 7");
    const int dim = 1 << n;
    const std::int64_t sdim = std::int64_t(dim) * dim;
    Matrix liou = Matrix::Zero(sdim, sdim);

    std::vector<std::int64_t> sk(dim), sb(dim);
    for (int a = 0; a < dim; ++a) {
        sk[a] = 2 * spread_bits(a, n);
        sb[a] = spread_bits(a, n);
    }
    auto x_of = [&](int a, int b) { return sk[a] + sb[b]; };

    // Diagonal Ising energy E(a), NN or Kac-normalized power law.
    std::vector<double> energy(dim, 0.0);
    if (model.has_interaction()) {
        if (model.nearest_neighbor()) {
            for (int a = 0; a < dim; ++a) {
                double e = 0;
                for (int j = 0; j < n; ++j)
                    e += z_of_bit(a, j, n) * z_of_bit(a, (j + 1) % n, n);
                energy[a] = model.J * e;
            }
        } else {
            const double kac = kac_norm(n, model.alpha);
            for (int a = 0; a < dim; ++a) {
                double e = 0;
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        e += std::pow(static_cast<double>(ring_distance(i, j, n)), -model.alpha) *
                             z_of_bit(a, i, n) * z_of_bit(a, j, n);
                energy[a] = model.J / kac * e;
            }
        }
    }

    // -i(H (x) 1 - 1 (x) H^T), H = E_diag + h sum_j sx_j.
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            const std::int64_t x = x_of(a, b);
            liou(x, x) += Complex(0, -1) * (energy[a] - energy[b]);
            if (model.h != 0.0)
                for (int j = 0; j < n; ++j) {
                    const int af = a ^ (1 << (n - 1 - j));
                    const int bf = b ^ (1 << (n - 1 - j));
                    liou(x, x_of(af, b)) += Complex(0, -model.h);
                    liou(x, x_of(a, bf)) += Complex(0, model.h);
                }
        }

    // Spin decay: Gamma_k = sqrt(g) sigma^-_k lowers bit k from 0 to 1.
    if (model.gamma_minus != 0.0) {
        const double g = model.gamma_minus;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                const std::int64_t x = x_of(a, b);
                for (int j = 0; j < n; ++j) {
                    const int mask = 1 << (n - 1 - j);
                    if ((a & mask) && (b & mask)) liou(x, x_of(a ^ mask, b ^ mask)) += g;
                    if (!(a & mask)) liou(x, x) -= 0.5 * g;
                    if (!(b & mask)) liou(x, x) -= 0.5 * g;
                }
            }
    }

    // Local and collective dephasing are diagonal in this basis.
    if (model.gamma_d_loc != 0.0 || model.gamma_d_col != 0.0) {
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                const std::int64_t x = x_of(a, b);
                double val = 0;
                if (model.gamma_d_loc != 0.0)
                    for (int j = 0; j < n; ++j)
                        val += model.gamma_d_loc * (z_of_bit(a, j, n) * z_of_bit(b, j, n) - 1.0);
                if (model.gamma_d_col != 0.0) {
                    double ma = 0, mb = 0;
                    for (int j = 0; j < n; ++j) {
                        ma += z_of_bit(a, j, n);
                        mb += z_of_bit(b, j, n);
                    }
                    val += -0.5 * model.gamma_d_col * (ma - mb) * (ma - mb);
                }
                liou(x, x) += val;
            }
    }
    return liou;
}

namespace {

// Inverse iteration against the (numerically singular) Liouvillian; the LU of L
// itself acts as the shift-zero inverse.
Vector inverse_iterate(const Eigen::PartialPivLU<Matrix>& lu, Vector v, const Vector* orth,
                       int iters) {
    for (int i = 0; i < iters; ++i) {
        v = lu.solve(v);
        if (orth) v -= orth->dot(v) * (*orth);
        const double norm = v.norm();
        if (norm == 0.0) break;
        v /= norm;
    }
    return v;
}

}  // namespace

Matrix steady_state(const Matrix& liouvillian) {
    const auto sdim = liouvillian.rows();
    const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(sdim))));
    int n = 0;
    while ((1 << n) < dim) ++n;

    Eigen::PartialPivLU<Matrix> lu(liouvillian);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    Vector v0(sdim);
    for (auto& c : v0) c = Complex(gauss(rng), gauss(rng));
    v0 /= v0.norm();
    Vector null_vec = inverse_iterate(lu, v0, nullptr, 4);
    if (!null_vec.allFinite()) {
        // Exact zero pivot: retry against a minutely shifted operator.
        lu.compute(liouvillian + 1e-13 * Matrix::Identity(sdim, sdim));
        null_vec = inverse_iterate(lu, v0, nullptr, 6);
    }
    const double residual = (liouvillian * null_vec).norm();
    if (residual > 1e-10)
        throw SolveFailure("steady_state: null-vector residual " + std::to_string(residual));

    // Probe for a second null direction orthogonal to the first.
    Vector v1(sdim);
    for (auto& c : v1) c = Complex(gauss(rng), gauss(rng));
    v1 -= null_vec.dot(v1) * null_vec;
    v1 /= v1.norm();
    const Vector second = inverse_iterate(lu, v1, &null_vec, 4);
    if ((liouvillian * second).norm() < 1e-10)
        throw DegenerateNullError("steady_state: non-unique steady state");

    Matrix rho = devectorize(null_vec, n);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-300) throw ZeroTraceError("steady_state: traceless null vector");
    rho /= tr;
    return rho;
}

Complex dense_one_body_expectation(const Matrix& rho, const Eigen::Matrix2cd& op,
                                   int n_sites) {
    const int dim = 1 << n_sites;
    Complex sum = 0;
    for (int j = 0; j < n_sites; ++j) {
        const int mask = 1 << (n_sites - 1 - j);
        for (int a = 0; a < dim; ++a) {
            const int aj = (a & mask) ? 1 : 0;
            // tr(rho O_j) = sum_{a,b_j} rho(a, b) op(b_j, a_j), b = a off site j.
            sum += rho(a, a) * op(aj, aj);
            sum += rho(a, a ^ mask) * op(1 - aj, aj);
        }
    }
    return sum / static_cast<double>(n_sites);
}

double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma, double psd_floor) {
    auto prepare = [&](const Matrix& m) {
        if (std::abs(m.trace().real() - 1.0) > 1e-6 || std::abs(m.trace().imag()) > 1e-6)
            throw NotAStateError("uhlmann_fidelity: trace deviates from 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint().eval()));
        Eigen::VectorXd ev = es.eigenvalues();
        for (int i = 0; i < ev.size(); ++i) {
            if (ev[i] < -psd_floor)
                throw NotAStateError("uhlmann_fidelity: eigenvalue below PSD floor");
            if (ev[i] < 0) ev[i] = 0;
        }
        ev /= ev.sum();
        return std::make_pair(es.eigenvectors(), ev);
    };
    auto [u_rho, ev_rho] = prepare(rho);
    auto [u_sigma, ev_sigma] = prepare(sigma);
    const Matrix sqrt_rho =
        u_rho * ev_rho.cwiseSqrt().asDiagonal() * u_rho.adjoint();
    const Matrix sigma_clipped =
        u_sigma * ev_sigma.asDiagonal() * u_sigma.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sqrt_rho * sigma_clipped * sqrt_rho);
    double f = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        f += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
    return f * f;
}

}  // namespace vmpomc
