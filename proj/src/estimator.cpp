#include "vmpomc/estimator.hpp"

namespace vmpomc {

namespace {

constexpr double kAmpFloor = 1e-300;

// tr(a * b) without forming the product.
inline Complex trace_prod(const Matrix& a, const Matrix& b) {
    return a.transpose().cwiseProduct(b).sum();
}

}  // namespace

LindbladTerms LindbladTerms::build(const ModelSpec& model) {
    model.validate();
    LindbladTerms t;
    t.model = model;
    t.one_body = build_one_body(model);
    for (int x = 0; x < 4; ++x) {
        t.l1_diag[x] = t.one_body.mat(x, x);
        for (int y = 0; y < 4; ++y)
            if (y != x && t.one_body.mat(x, y) != Complex(0, 0))
                t.l1_offdiag[x].emplace_back(y, t.one_body.mat(x, y));
    }
    if (model.nearest_neighbor() && model.has_interaction()) t.set_two_body(build_two_body_nn(model));
    return t;
}

void LindbladTerms::set_two_body(LocalSuperOp op) {
    two_body = std::move(op);
    has_two_body = true;
    for (int x = 0; x < 16; ++x) {
        l2_diag[x] = two_body.mat(x, x);
        l2_offdiag[x].clear();
        for (int y = 0; y < 16; ++y)
            if (y != x && two_body.mat(x, y) != Complex(0, 0))
                l2_offdiag[x].emplace_back(y, two_body.mat(x, y));
    }
}

Complex LindbladTerms::diagonal_element(const SpinConfig& cfg) const {
    const int n = static_cast<int>(cfg.size());
    Complex acc(0, 0);
    for (int j = 0; j < n; ++j) acc += l1_diag[cfg[j]];
    if (has_two_body)
        for (int j = 0; j < n; ++j) acc += l2_diag[4 * cfg[j] + cfg[(j + 1) % n]];
    if (!model.nearest_neighbor()) acc += long_range_diag_amplitude(cfg, model);
    acc += collective_dephasing_amplitude(cfg, model);
    return acc;
}

void EstimatorWorkspace::ensure(int chi, int n_sites) {
    if (tmp.rows() != chi || static_cast<int>(yprefix.size()) != n_sites + 1) {
        tmp.resize(chi, chi);
        tmp2.resize(chi, chi);
        g.resize(chi, chi);
        yprefix.assign(static_cast<size_t>(n_sites) + 1, Matrix(chi, chi));
        ysuffix.assign(static_cast<size_t>(n_sites) + 1, Matrix(chi, chi));
    }
}

Complex local_estimator_numerator(const SpinConfig& cfg, const MpoAnsatz& mpo,
                                  const LindbladTerms& terms, const PartialProducts& partials,
                                  EstimatorWorkspace& ws) {
    const int n = mpo.n_sites;
    ws.ensure(mpo.chi, n);
    const Complex amp = partials.prefix[n].trace();

    // Diagonal terms multiply the amplitude directly.
    Complex diag(0, 0);
    if (!terms.model.nearest_neighbor())
        diag += long_range_diag_amplitude(cfg, terms.model);
    diag += collective_dephasing_amplitude(cfg, terms.model);
    if (terms.use_diagonal_shortcut) {
        for (int j = 0; j < n; ++j) diag += terms.l1_diag[cfg[j]];
        if (terms.has_two_body)
            for (int j = 0; j < n; ++j) diag += terms.l2_diag[4 * cfg[j] + cfg[(j + 1) % n]];
    }
    Complex num = diag * amp;

    // 1-local off-diagonal entries: tr(L_{j-1} A(y_j) R_{N-j}).
    for (int j = 0; j < n; ++j) {
        const int xj = cfg[j];
        for (const auto& [y, val] : terms.l1_offdiag[xj]) {
            ws.tmp.noalias() = mpo.tensor(y) * partials.suffix[n - 1 - j];
            num += val * trace_prod(partials.prefix[j], ws.tmp);
        }
        if (!terms.use_diagonal_shortcut && terms.l1_diag[xj] != Complex(0, 0)) {
            ws.tmp.noalias() = mpo.tensor(xj) * partials.suffix[n - 1 - j];
            num += terms.l1_diag[xj] * trace_prod(partials.prefix[j], ws.tmp);
        }
    }

    // 2-local entries on ring bonds, wrap bond (N,1) included.
    if (terms.has_two_body) {
        bool mid_valid = false;
        Matrix mid;  // A(x_2)...A(x_{N-1}), built on demand for the wrap bond
        for (int j = 0; j < n; ++j) {
            const int jn = (j + 1) % n;
            const int row = 4 * cfg[j] + cfg[jn];
            auto add_pair = [&](int ypair, Complex val) {
                const int yj = ypair >> 2;
                const int yjn = ypair & 3;
                if (jn != 0) {
                    ws.tmp.noalias() = mpo.tensor(yjn) * partials.suffix[n - 2 - j];
                    ws.tmp2.noalias() = mpo.tensor(yj) * ws.tmp;
                    num += val * trace_prod(partials.prefix[j], ws.tmp2);
                } else {
                    if (!mid_valid) {
                        mid = Matrix::Identity(mpo.chi, mpo.chi);
                        for (int i = 1; i <= n - 2; ++i) mid *= mpo.tensor(cfg[i]);
                        mid_valid = true;
                    }
                    ws.tmp.noalias() = mpo.tensor(yj) * mpo.tensor(yjn);
                    num += val * trace_prod(ws.tmp, mid);
                }
            };
            for (const auto& [ypair, val] : terms.l2_offdiag[row]) add_pair(ypair, val);
            if (!terms.use_diagonal_shortcut && terms.l2_diag[row] != Complex(0, 0))
                add_pair(row, terms.l2_diag[row]);
        }
    }
    return num;
}

Complex local_estimator(const SpinConfig& cfg, const MpoAnsatz& mpo, const LindbladTerms& terms,
                        const PartialProducts& partials, EstimatorWorkspace& ws) {
    const Complex amp = partials.prefix[mpo.n_sites].trace();
    if (std::abs(amp) < kAmpFloor)
        throw ZeroAmplitudeError("local_estimator: amplitude underflow");
    return local_estimator_numerator(cfg, mpo, terms, partials, ws) / amp;
}

void log_derivative(const SpinConfig& cfg, const MpoAnsatz& mpo, const PartialProducts& partials,
                    EstimatorWorkspace& ws, Vector& out) {
    const int n = mpo.n_sites;
    const int chi = mpo.chi;
    ws.ensure(chi, n);
    const Complex amp = partials.prefix[n].trace();
    if (std::abs(amp) < kAmpFloor)
        throw ZeroAmplitudeError("log_derivative: amplitude underflow");
    out.setZero(mpo.n_param());
    for (int j = 0; j < n; ++j) {
        ws.g.noalias() = partials.suffix[n - 1 - j] * partials.prefix[j];
        const int base = cfg[j] * chi * chi;
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v) out[base + u * chi + v] += ws.g(v, u);
    }
    out /= amp;
}

namespace {

// Accumulates coeff * (unnormalized log-derivative of ycfg) into out, reusing the
// partial products of the base configuration outside [jlo, jhi].
void accumulate_y_derivative(const SpinConfig& ycfg, const MpoAnsatz& mpo,
                             const PartialProducts& partials, int jlo, int jhi, Complex coeff,
                             EstimatorWorkspace& ws, Vector& out) {
    const int n = mpo.n_sites;
    const int chi = mpo.chi;
    auto lp = [&](int i) -> const Matrix& {
        return i <= jlo ? partials.prefix[i] : ws.yprefix[i];
    };
    auto rs = [&](int k) -> const Matrix& {
        return k <= n - 1 - jhi ? partials.suffix[k] : ws.ysuffix[k];
    };
    for (int i = jlo + 1; i <= n; ++i)
        ws.yprefix[i].noalias() = lp(i - 1) * mpo.tensor(ycfg[i - 1]);
    for (int k = n - jhi; k <= n; ++k)
        ws.ysuffix[k].noalias() = mpo.tensor(ycfg[n - k]) * rs(k - 1);
    for (int i = 0; i < n; ++i) {
        ws.g.noalias() = rs(n - 1 - i) * lp(i);
        const int base = ycfg[i] * chi * chi;
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v) out[base + u * chi + v] += coeff * ws.g(v, u);
    }
}

}  // namespace

void local_estimator_gradient(const SpinConfig& cfg, const MpoAnsatz& mpo,
                              const LindbladTerms& terms, const PartialProducts& partials,
                              const Vector& delta_x, EstimatorWorkspace& ws, Vector& out) {
    const int n = mpo.n_sites;
    ws.ensure(mpo.chi, n);
    const Complex amp = partials.prefix[n].trace();
    if (std::abs(amp) < kAmpFloor)
        throw ZeroAmplitudeError("local_estimator_gradient: amplitude underflow");
    out.setZero(mpo.n_param());

    // Diagonal terms contribute c * Delta(x) with amplitude ratio 1.
    Complex diag(0, 0);
    if (!terms.model.nearest_neighbor())
        diag += long_range_diag_amplitude(cfg, terms.model);
    diag += collective_dephasing_amplitude(cfg, terms.model);
    if (terms.use_diagonal_shortcut) {
        for (int j = 0; j < n; ++j) diag += terms.l1_diag[cfg[j]];
        if (terms.has_two_body)
            for (int j = 0; j < n; ++j) diag += terms.l2_diag[4 * cfg[j] + cfg[(j + 1) % n]];
    }
    if (diag != Complex(0, 0)) out += diag * delta_x;

    SpinConfig ycfg = cfg;
    for (int j = 0; j < n; ++j) {
        const int xj = cfg[j];
        auto add_site = [&](int y, Complex val) {
            ycfg[j] = y;
            accumulate_y_derivative(ycfg, mpo, partials, j, j, val / amp, ws, out);
            ycfg[j] = xj;
        };
        for (const auto& [y, val] : terms.l1_offdiag[xj]) add_site(y, val);
        if (!terms.use_diagonal_shortcut && terms.l1_diag[xj] != Complex(0, 0))
            add_site(xj, terms.l1_diag[xj]);
    }

    if (terms.has_two_body) {
        for (int j = 0; j < n; ++j) {
            const int jn = (j + 1) % n;
            const int row = 4 * cfg[j] + cfg[jn];
            auto add_pair = [&](int ypair, Complex val) {
                const int xj = cfg[j], xjn = cfg[jn];
                ycfg[j] = ypair >> 2;
                ycfg[jn] = ypair & 3;
                const int jlo = std::min(j, jn);
                const int jhi = std::max(j, jn);
                accumulate_y_derivative(ycfg, mpo, partials, jlo, jhi, val / amp, ws, out);
                ycfg[j] = xj;
                ycfg[jn] = xjn;
            };
            for (const auto& [ypair, val] : terms.l2_offdiag[row]) add_pair(ypair, val);
            if (!terms.use_diagonal_shortcut && terms.l2_diag[row] != Complex(0, 0))
                add_pair(row, terms.l2_diag[row]);
        }
    }
}

}  // namespace vmpomc
