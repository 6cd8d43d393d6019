#include "vmpomc/model.hpp"

#include <cmath>

namespace vmpomc {

namespace {

using M2 = Eigen::Matrix2cd;

M2 sigma_x() {
    M2 m;
    m << 0, 1, 1, 0;
    return m;
}
M2 sigma_z() {
    M2 m;
    m << 1, 0, 0, -1;
    return m;
}
M2 sigma_minus() {
    // (sx - i sy)/2; lowers |0> (sz=+1) to |1>.
    M2 m;
    m << 0, 0, 1, 0;
    return m;
}

// Superoperator matrix of rho -> M rho K^T in the s = 2*alpha + beta packing:
// <(a,b)| M (x) K |(a',b')> = M_{aa'} K_{bb'}.
Matrix super_kron(const M2& m, const M2& k) {
    Matrix out(kSuperDim, kSuperDim);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int ap = 0; ap < 2; ++ap)
                for (int bp = 0; bp < 2; ++bp)
                    out(super_index(a, b), super_index(ap, bp)) = m(a, ap) * k(b, bp);
    return out;
}

// Dissipator superoperator for a single 2x2 jump operator.
Matrix dissipator(const M2& g) {
    const M2 gg = g.adjoint() * g;
    const M2 id = M2::Identity();
    return super_kron(g, g.conjugate()) - 0.5 * super_kron(gg, id) -
           0.5 * super_kron(id, gg.conjugate());
}

}  // namespace

void ModelSpec::validate() const {
    if (n_sites < 1) throw ConfigError("n_sites must be positive");
    if (gamma_minus < 0 || gamma_d_loc < 0 || gamma_d_col < 0)
        throw ConfigError("dissipation rates must be non-negative");
    if (!nearest_neighbor() && alpha <= 0) throw ConfigError("alpha must be positive or inf");
    if (has_interaction() && n_sites < 2)
        throw ConfigError("interacting terms require at least 2 sites");
    if (!nearest_neighbor() && has_interaction() && n_sites < 3)
        throw ConfigError("power-law interactions require at least 3 sites");
}

void LocalSuperOp::finalize() {
    nonzeros.clear();
    diagonal_only = true;
    for (int x = 0; x < mat.rows(); ++x)
        for (int y = 0; y < mat.cols(); ++y)
            if (mat(x, y) != Complex(0, 0)) {
                nonzeros.emplace_back(x, y);
                if (x != y) diagonal_only = false;
            }
}

LocalSuperOp build_one_body(const ModelSpec& model) {
    const M2 id = M2::Identity();
    Matrix l = Matrix::Zero(kSuperDim, kSuperDim);
    if (model.h != 0.0) {
        const M2 hx = model.h * sigma_x();
        l += Complex(0, -1) * (super_kron(hx, id) - super_kron(id, hx.transpose()));
    }
    if (model.gamma_minus != 0.0) l += model.gamma_minus * dissipator(sigma_minus());
    if (model.gamma_d_loc != 0.0) l += model.gamma_d_loc * dissipator(sigma_z());
    LocalSuperOp op;
    op.arity = 1;
    op.mat = std::move(l);
    op.finalize();
    return op;
}

LocalSuperOp build_two_body_nn(const ModelSpec& model) {
    LocalSuperOp op;
    op.arity = 2;
    op.mat = Matrix::Zero(16, 16);
    // -iJ(szsz (x) 1 - 1 (x) (szsz)^T) is diagonal in the super basis.
    for (int xi = 0; xi < kSuperDim; ++xi)
        for (int xj = 0; xj < kSuperDim; ++xj) {
            const double e_ket = z_value(ket_index(xi)) * z_value(ket_index(xj));
            const double e_bra = z_value(bra_index(xi)) * z_value(bra_index(xj));
            op.mat(4 * xi + xj, 4 * xi + xj) = Complex(0, -model.J) * (e_ket - e_bra);
        }
    op.finalize();
    return op;
}

int ring_distance(int i, int j, int n_sites) {
    const int d = std::abs(i - j);
    return std::min(d, n_sites - d);
}

double kac_norm(int n_sites, double alpha) {
    if (std::isinf(alpha)) return 1.0;
    double sum = 0.0;
    for (int i = 0; i < n_sites; ++i)
        for (int j = i + 1; j < n_sites; ++j)
            sum += std::pow(static_cast<double>(ring_distance(i, j, n_sites)), -alpha);
    return sum / n_sites;
}

Complex long_range_diag_amplitude(const SpinConfig& cfg, const ModelSpec& model) {
    if (model.J == 0.0) return {0, 0};
    const int n = static_cast<int>(cfg.size());
    const double kac = kac_norm(n, model.alpha);
    double e_ket = 0.0, e_bra = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double w = std::pow(static_cast<double>(ring_distance(i, j, n)), -model.alpha);
            e_ket += w * z_value(ket_index(cfg[i])) * z_value(ket_index(cfg[j]));
            e_bra += w * z_value(bra_index(cfg[i])) * z_value(bra_index(cfg[j]));
        }
    return Complex(0, -model.J / kac) * (e_ket - e_bra);
}

double collective_dephasing_amplitude(const SpinConfig& cfg, const ModelSpec& model) {
    if (model.gamma_d_col == 0.0) return 0.0;
    double m_ket = 0.0, m_bra = 0.0;
    for (int x : cfg) {
        m_ket += z_value(ket_index(x));
        m_bra += z_value(bra_index(x));
    }
    const double dm = m_ket - m_bra;
    return -0.5 * model.gamma_d_col * dm * dm;
}

std::vector<TermRef> connections(const ModelSpec& model, int site) {
    model.validate();
    std::vector<TermRef> out;
    out.push_back({TermRef::Kind::OneLocal, {site, -1}});
    if (model.has_interaction()) {
        if (model.nearest_neighbor()) {
            const int n = model.n_sites;
            const int prev = (site - 1 + n) % n;
            const int next = (site + 1) % n;
            out.push_back({TermRef::Kind::TwoLocalPair, {site, next}});
            out.push_back({TermRef::Kind::TwoLocalPair, {prev, site}});
        } else {
            out.push_back({TermRef::Kind::LongRangeDiag, {site, -1}});
        }
    }
    if (model.gamma_d_col > 0.0) out.push_back({TermRef::Kind::CollectiveDiag, {site, -1}});
    return out;
}

}  // namespace vmpomc
