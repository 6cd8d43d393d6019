#include "vmpomc/mpo.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace vmpomc {

MpoAnsatz::MpoAnsatz(int chi_, int n_sites_) : chi(chi_), n_sites(n_sites_) {
    for (auto& t : tensors) t = Matrix::Zero(chi, chi);
}

void MpoAnsatz::apply_increment(const Vector& increment) {
    for (int s = 0; s < kSuperDim; ++s)
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v) tensors[s](u, v) -= increment[param_index(s, u, v)];
}

Vector MpoAnsatz::parameters() const {
    Vector p(n_param());
    for (int s = 0; s < kSuperDim; ++s)
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v) p[param_index(s, u, v)] = tensors[s](u, v);
    return p;
}

void MpoAnsatz::set_parameters(const Vector& params) {
    for (int s = 0; s < kSuperDim; ++s)
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v) tensors[s](u, v) = params[param_index(s, u, v)];
}

bool MpoAnsatz::all_finite() const {
    for (const auto& t : tensors)
        if (!t.allFinite()) return false;
    return true;
}

void PartialProducts::resize(int n_sites, int chi) {
    prefix.assign(static_cast<size_t>(n_sites) + 1, Matrix(chi, chi));
    suffix.assign(static_cast<size_t>(n_sites) + 1, Matrix(chi, chi));
    prefix[0] = Matrix::Identity(chi, chi);
    suffix[0] = Matrix::Identity(chi, chi);
}

Complex amplitude(const MpoAnsatz& mpo, const SpinConfig& cfg) {
    Matrix prod = mpo.tensor(cfg[0]);
    for (size_t j = 1; j < cfg.size(); ++j) prod *= mpo.tensor(cfg[j]);
    return prod.trace();
}

void left_products(const MpoAnsatz& mpo, const SpinConfig& cfg, PartialProducts& partials) {
    const int n = mpo.n_sites;
    if (partials.prefix.size() != static_cast<size_t>(n) + 1) partials.resize(n, mpo.chi);
    for (int j = 0; j < n; ++j)
        partials.prefix[j + 1].noalias() = partials.prefix[j] * mpo.tensor(cfg[j]);
}

void right_products(const MpoAnsatz& mpo, const SpinConfig& cfg, PartialProducts& partials) {
    const int n = mpo.n_sites;
    if (partials.suffix.size() != static_cast<size_t>(n) + 1) partials.resize(n, mpo.chi);
    for (int j = 0; j < n; ++j)
        partials.suffix[j + 1].noalias() = mpo.tensor(cfg[n - 1 - j]) * partials.suffix[j];
}

void build_partials(const MpoAnsatz& mpo, const SpinConfig& cfg, PartialProducts& partials) {
    left_products(mpo, cfg, partials);
    right_products(mpo, cfg, partials);
}

Complex trace_rho(const MpoAnsatz& mpo) {
    Matrix t = mpo.tensor(0) + mpo.tensor(3);
    Matrix prod = t;
    for (int j = 1; j < mpo.n_sites; ++j) prod *= t;
    return prod.trace();
}

void normalize_trace(MpoAnsatz& mpo, double floor) {
    const Complex tr = trace_rho(mpo);
    if (std::abs(tr) < floor) throw ZeroTraceError("normalize_trace: |tr rho| below floor");
    const Complex scale = std::pow(tr, Complex(-1.0 / mpo.n_sites, 0.0));
    for (auto& t : mpo.tensors) t *= scale;
}

double purity(const MpoAnsatz& mpo) {
    const int chi = mpo.chi;
    Matrix e = Matrix::Zero(chi * chi, chi * chi);
    for (int s = 0; s < kSuperDim; ++s) {
        const Matrix& a = mpo.tensor(s);
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v)
                e.block(u * chi, v * chi, chi, chi) += a(u, v) * a.conjugate();
    }
    Matrix prod = e;
    for (int j = 1; j < mpo.n_sites; ++j) prod *= e;
    return prod.trace().real();
}

MpoAnsatz init_random(int chi, int n_sites, std::uint64_t seed, double scale) {
    MpoAnsatz mpo(chi, n_sites);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (int s = 0; s < kSuperDim; ++s)
        for (int u = 0; u < chi; ++u)
            for (int v = 0; v < chi; ++v) {
                const double re = dist(rng);
                const double im = dist(rng);
                mpo.tensor(s)(u, v) = Complex(re, im);
            }
    // Identity bias on the diagonal-physical tensors guarantees a nonzero trace.
    const double bias = 1.0 / chi;
    mpo.tensor(0) += bias * Matrix::Identity(chi, chi);
    mpo.tensor(3) += bias * Matrix::Identity(chi, chi);
    normalize_trace(mpo);
    return mpo;
}

void hermitize(MpoAnsatz& mpo) {
    std::array<Matrix, kSuperDim> out;
    for (int a = 0; a < kPhysDim; ++a)
        for (int b = 0; b < kPhysDim; ++b) {
            const int s = super_index(a, b);
            const int sc = super_index(b, a);
            out[s] = 0.5 * (mpo.tensor(s) + mpo.tensor(sc).conjugate());
        }
    mpo.tensors = out;
}

void save_checkpoint(const MpoAnsatz& mpo, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
    out << "VMPOMC-CKPT v1\n";
    out << "N=" << mpo.n_sites << " chi=" << mpo.chi << " d=2\n";
    char buf[96];
    for (int s = 0; s < kSuperDim; ++s)
        for (int u = 0; u < mpo.chi; ++u)
            for (int v = 0; v < mpo.chi; ++v) {
                const Complex c = mpo.tensor(s)(u, v);
                std::snprintf(buf, sizeof buf, "%d %d %d %.17g %.17g\n", s, u, v, c.real(),
                              c.imag());
                out << buf;
            }
    if (!out) throw IoError("checkpoint write failed: " + path.string());
}

MpoAnsatz load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    std::string header;
    std::getline(in, header);
    if (header != "VMPOMC-CKPT v1") throw IoError("bad checkpoint header: " + header);
    std::string line2;
    std::getline(in, line2);
    int n = 0, chi = 0, d = 0;
    if (std::sscanf(line2.c_str(), "N=%d chi=%d d=%d", &n, &chi, &d) != 3 || d != 2 || n < 1 ||
        chi < 1)
        throw IoError("bad checkpoint size line: " + line2);
    MpoAnsatz mpo(chi, n);
    for (int i = 0; i < mpo.n_param(); ++i) {
        int s, u, v;
        double re, im;
        if (!(in >> s >> u >> v >> re >> im))
            throw IoError("truncated checkpoint: " + path.string());
        if (s < 0 || s >= kSuperDim || u < 0 || u >= chi || v < 0 || v >= chi)
            throw IoError("checkpoint index out of range");
        mpo.tensor(s)(u, v) = Complex(re, im);
    }
    return mpo;
}

}  // namespace vmpomc
