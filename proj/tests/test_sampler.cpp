#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace vmpomc;
using namespace vmpomc::testing;

TEST_CASE("sweep keeps q and both partial-product sides consistent") {
    const MpoAnsatz mpo = random_mpo(3, 5, 2);
    ChainState chain = make_chain(mpo, 42, 0);
    for (int sweep = 0; sweep < 200; ++sweep) {
        sequential_sweep(chain, mpo);
        const Complex amp = naive_amplitude(mpo, chain.cfg);
        CHECK(std::abs(chain.q - amp) <= 1e-10 * std::max(1.0, std::abs(amp)));
        CHECK(std::abs(chain.partials.prefix[5].trace() - amp) <=
              1e-10 * std::max(1.0, std::abs(amp)));
        CHECK(std::abs(chain.partials.suffix[5].trace() - amp) <=
              1e-10 * std::max(1.0, std::abs(amp)));
    }
    CHECK(chain.proposals == 200 * 5);
    CHECK(chain.accepts > 0);
    CHECK(chain.accepts < chain.proposals);
}

TEST_CASE("left products from a rightward sweep match the accepted configuration") {
    const MpoAnsatz mpo = random_mpo(2, 4, 13);
    ChainState chain = make_chain(mpo, 1, 0);
    REQUIRE(chain.rightward_next);
    sequential_sweep(chain, mpo);
    PartialProducts fresh;
    fresh.resize(4, 2);
    build_partials(mpo, chain.cfg, fresh);
    for (int j = 0; j <= 4; ++j) {
        CHECK((chain.partials.prefix[j] - fresh.prefix[j]).norm() < 1e-12);
        CHECK((chain.partials.suffix[j] - fresh.suffix[j]).norm() < 1e-12);
    }
    CHECK_FALSE(chain.rightward_next);  // direction alternates
}

TEST_CASE("chain streams are deterministic and worker-distinct") {
    const MpoAnsatz mpo = random_mpo(2, 4, 9);
    ChainState a = make_chain(mpo, 7, 0);
    ChainState b = make_chain(mpo, 7, 0);
    ChainState c = make_chain(mpo, 7, 1);
    for (int i = 0; i < 50; ++i) {
        sequential_sweep(a, mpo);
        sequential_sweep(b, mpo);
        sequential_sweep(c, mpo);
    }
    CHECK(a.cfg == b.cfg);
    CHECK(a.accepts == b.accepts);
    CHECK(a.cfg != c.cfg);
}

TEST_CASE("empirical distribution converges to p(x) (total variation)") {
    const int n = 4;
    const MpoAnsatz mpo = random_mpo(3, n, 33);
    const Vector psi = amplitude_vector(mpo);
    double z = 0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) z += std::norm(psi[i]);

    ChainState chain = make_chain(mpo, 5, 0);
    burn_in(chain, mpo, 1000);
    const int n_sweeps = 400000;
    std::vector<double> counts(static_cast<size_t>(psi.size()), 0.0);
    for (int i = 0; i < n_sweeps; ++i) {
        sequential_sweep(chain, mpo);
        counts[static_cast<size_t>(config_index(chain.cfg))] += 1.0;
    }
    double tv = 0;
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        tv += 0.5 * std::abs(counts[static_cast<size_t>(i)] / n_sweeps - std::norm(psi[i]) / z);
    CHECK(tv < 0.01);
}

TEST_CASE("autocorrelation basics") {
    std::vector<Complex> series(1000);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    for (auto& s : series) s = Complex(gauss(rng), 0);
    const auto gamma = autocorrelation(series, Complex(0, 0), 10);
    CHECK(gamma[0].real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(gamma[1]) < 0.1);  // iid noise

    std::vector<Complex> constant(100, Complex(0.5, 0));
    const auto flat = autocorrelation(constant, Complex(0.5, 0), 3);
    CHECK(std::isnan(flat[0].real()));

    CHECK_THROWS_AS(autocorrelation(std::span<const Complex>(constant.data(), 3), Complex(0, 0), 5),
                    ConfigError);
}

TEST_CASE("sample_observable cases") {
    const Eigen::Matrix2cd sz = pauli_z();
    const Eigen::Matrix2cd sx = pauli_x();

    // Diagonal config: spin average of sz values.
    const SpinConfig diag{0, 3, 0, 0};  // +1 -1 +1 +1
    CHECK(sample_observable(diag, sz) == Complex(0.5, 0));
    CHECK(sample_observable(diag, sx) == Complex(0, 0));

    // One mismatch: the flipped site carries op(beta, alpha)/N.
    const SpinConfig one{0, 1, 0, 0};  // site 1: ket=0, bra=1
    CHECK(sample_observable(one, sx) == Complex(0.25, 0));
    CHECK(sample_observable(one, sz) == Complex(0, 0));

    // Two mismatches: zero for any one-body operator.
    const SpinConfig two{1, 2, 0, 0};
    CHECK(sample_observable(two, sx) == Complex(0, 0));
}

TEST_CASE("sample mean of observable matches contraction oracle") {
    const int n = 4;
    MpoAnsatz mpo = random_mpo(2, n, 21);
    hermitize(mpo);
    normalize_trace(mpo);
    const Eigen::Matrix2cd sz = pauli_z();

    // Exact enumeration of E_p[O(x)] against the doubled-transfer contraction.
    const Vector psi = amplitude_vector(mpo);
    Complex num = 0;
    double z = 0;
    for (Eigen::Index c = 0; c < psi.size(); ++c) {
        const double w = std::norm(psi[c]);
        num += w * sample_observable(config_from_index(c, n), sz);
        z += w;
    }
    const Complex mean = sample_observable_mean(mpo, sz);
    CHECK(std::abs(mean - num / z) < 1e-11 * std::max(1.0, std::abs(mean)));

    // Long-run sample average agrees within Monte Carlo error.
    ChainState chain = make_chain(mpo, 17, 0);
    burn_in(chain, mpo, 1000);
    Complex acc = 0;
    const int n_samples = 200000;
    for (int i = 0; i < n_samples; ++i) {
        sequential_sweep(chain, mpo);
        acc += sample_observable(chain.cfg, sz);
    }
    CHECK(std::abs(acc / double(n_samples) - mean) < 0.02);
}
