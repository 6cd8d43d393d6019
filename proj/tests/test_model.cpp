#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace vmpomc;
using namespace vmpomc::testing;

namespace {

ModelSpec base_model(int n) {
    ModelSpec m;
    m.n_sites = n;
    m.J = 0.5;
    m.h = 0.0;
    m.gamma_minus = 0.0;
    return m;
}

}  // namespace

TEST_CASE("build_one_body: pure decay entries (4 nonzeros, 3 diagonal)") {
    ModelSpec m = base_model(4);
    m.gamma_minus = 1.0;
    const LocalSuperOp l = build_one_body(m);
    REQUIRE(l.mat.rows() == 4);

    // s = 2*alpha + beta with |0> = sz=+1: decay feeds (1,1) from (0,0).
    CHECK(l.mat(super_index(1, 1), super_index(0, 0)) == Complex(1, 0));
    CHECK(l.mat(super_index(0, 0), super_index(0, 0)) == Complex(-1, 0));
    CHECK(l.mat(super_index(0, 1), super_index(0, 1)) == Complex(-0.5, 0));
    CHECK(l.mat(super_index(1, 0), super_index(1, 0)) == Complex(-0.5, 0));
    int nonzeros = 0, diag = 0;
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            if (l.mat(x, y) != Complex(0, 0)) {
                ++nonzeros;
                if (x == y) ++diag;
            }
    CHECK(nonzeros == 4);
    CHECK(diag == 3);
    CHECK(l.nonzeros.size() == 4);
    CHECK_FALSE(l.diagonal_only);
}

TEST_CASE("build_one_body: local dephasing diagonal {0,-2g,-2g,0}") {
    ModelSpec m = base_model(4);
    m.gamma_d_loc = 0.7;
    const LocalSuperOp l = build_one_body(m);
    CHECK(l.diagonal_only);
    CHECK(l.mat(0, 0) == Complex(0, 0));
    CHECK(l.mat(1, 1) == Complex(-1.4, 0));
    CHECK(l.mat(2, 2) == Complex(-1.4, 0));
    CHECK(l.mat(3, 3) == Complex(0, 0));
}

TEST_CASE("build_one_body: transverse field flips one index with -ih/+ih") {
    ModelSpec m = base_model(4);
    m.h = 0.25;
    const LocalSuperOp l = build_one_body(m);
    // -i h (sx (x) 1 - 1 (x) sx^T): ket flip carries -ih, bra flip +ih.
    CHECK(l.mat(super_index(1, 0), super_index(0, 0)) == Complex(0, -0.25));
    CHECK(l.mat(super_index(0, 1), super_index(0, 0)) == Complex(0, 0.25));
    CHECK(l.mat(super_index(0, 0), super_index(0, 0)) == Complex(0, 0));
}

TEST_CASE("build_one_body: all couplings zero -> zero matrix") {
    ModelSpec m = base_model(4);
    const LocalSuperOp l = build_one_body(m);
    CHECK(l.mat.norm() == 0.0);
    CHECK(l.nonzeros.empty());
}

TEST_CASE("build_two_body_nn: diagonal branch energies") {
    ModelSpec m = base_model(4);
    const LocalSuperOp l = build_two_body_nn(m);
    REQUIRE(l.mat.rows() == 16);
    CHECK(l.diagonal_only);
    CHECK(l.mat(0, 0) == Complex(0, 0));  // both sites (0,0): branches cancel

    // x_i=(0,1), x_{i+1}=(0,0): ket energy +J, bra energy -J -> -2iJ.
    const int x = 4 * super_index(0, 1) + super_index(0, 0);
    CHECK(l.mat(x, x) == Complex(0, -2.0 * m.J));

    ModelSpec j0 = base_model(4);
    j0.J = 0.0;
    CHECK(build_two_body_nn(j0).mat.norm() == 0.0);
}

TEST_CASE("ring_distance and kac_norm") {
    CHECK(ring_distance(0, 1, 6) == 1);
    CHECK(ring_distance(0, 5, 6) == 1);
    CHECK(ring_distance(0, 3, 6) == 3);
    CHECK(ring_distance(2, 2, 6) == 0);

    CHECK(kac_norm(5, std::numeric_limits<double>::infinity()) == 1.0);
    // N=4, alpha=2: four distance-1 pairs, two distance-2 pairs.
    CHECK(kac_norm(4, 2.0) == doctest::Approx(1.125).epsilon(1e-15));
    CHECK(kac_norm(6, 1e6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("long_range_diag_amplitude: cancellation and explicit oracle") {
    ModelSpec m = base_model(4);
    m.alpha = 2.0;

    // Diagonal config: branches equal, amplitude 0.
    CHECK(long_range_diag_amplitude({0, 3, 0, 3}, m) == Complex(0, 0));

    // ket = all up, bra = down at site 0.
    const SpinConfig cfg{super_index(0, 1), super_index(0, 0), super_index(0, 0),
                         super_index(0, 0)};
    auto energy = [&](const std::array<double, 4>& z) {
        double e = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                e += std::pow(double(ring_distance(i, j, 4)), -2.0) * z[i] * z[j];
        return e;
    };
    const double e_ket = energy({1, 1, 1, 1});
    const double e_bra = energy({-1, 1, 1, 1});
    const Complex expected = Complex(0, -1) * (m.J / 1.125) * (e_ket - e_bra);
    CHECK(std::abs(long_range_diag_amplitude(cfg, m) - expected) < 1e-14);

    ModelSpec j0 = m;
    j0.J = 0.0;
    CHECK(long_range_diag_amplitude(cfg, j0) == Complex(0, 0));
}

TEST_CASE("long-range alpha->inf limit equals summed NN bond diagonals") {
    ModelSpec lr = base_model(5);
    lr.alpha = 1e6;
    ModelSpec nn = base_model(5);
    const LocalSuperOp two = build_two_body_nn(nn);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const SpinConfig cfg = random_config(5, rng);
        Complex nn_sum = 0;
        for (int j = 0; j < 5; ++j) {
            const int x = 4 * cfg[j] + cfg[(j + 1) % 5];
            nn_sum += two.mat(x, x);
        }
        CHECK(std::abs(long_range_diag_amplitude(cfg, lr) - nn_sum) < 1e-8);
    }
}

TEST_CASE("collective_dephasing_amplitude") {
    ModelSpec m = base_model(2);
    m.J = 0.0;
    m.gamma_d_col = 1.0;

    CHECK(collective_dephasing_amplitude({0, 3}, m) == 0.0);  // equal branches
    // ket up-up (M=+2), bra down-down (M=-2): -(1/2)*16 = -8.
    const SpinConfig cfg{super_index(0, 1), super_index(0, 1)};
    CHECK(collective_dephasing_amplitude(cfg, m) == -8.0);

    ModelSpec g0 = m;
    g0.gamma_d_col = 0.0;
    CHECK(collective_dephasing_amplitude(cfg, g0) == 0.0);
}

TEST_CASE("collective dephasing matches dense Liouvillian diagonal exactly") {
    for (int n : {2, 3, 4, 5}) {
        ModelSpec m = base_model(n);
        m.J = 0.0;
        m.gamma_d_col = 0.5;
        const Matrix liou = build_dense_liouvillian(m);
        std::mt19937_64 rng(n);
        for (int t = 0; t < 20; ++t) {
            const SpinConfig cfg = random_config(n, rng);
            const std::int64_t x = config_index(cfg);
            CHECK(std::abs(liou(x, x) - Complex(collective_dephasing_amplitude(cfg, m), 0)) <
                  1e-12);
        }
    }
}

TEST_CASE("connections: ring adjacency including the wrap bond") {
    ModelSpec nn = base_model(4);
    const auto c0 = connections(nn, 0);
    bool one_local = false, bond01 = false, bond30 = false;
    for (const auto& t : c0) {
        if (t.kind == TermRef::Kind::OneLocal && t.sites[0] == 0) one_local = true;
        if (t.kind == TermRef::Kind::TwoLocalPair && t.sites[0] == 0 && t.sites[1] == 1)
            bond01 = true;
        if (t.kind == TermRef::Kind::TwoLocalPair && t.sites[0] == 3 && t.sites[1] == 0)
            bond30 = true;
    }
    CHECK(one_local);
    CHECK(bond01);
    CHECK(bond30);

    ModelSpec lr = base_model(4);
    lr.alpha = 2.0;
    bool lr_diag = false, two_local = false;
    for (const auto& t : connections(lr, 1)) {
        if (t.kind == TermRef::Kind::LongRangeDiag) lr_diag = true;
        if (t.kind == TermRef::Kind::TwoLocalPair) two_local = true;
    }
    CHECK(lr_diag);
    CHECK_FALSE(two_local);

    // N=2 ring keeps both bonds (0,1) and (1,0).
    ModelSpec two = base_model(2);
    bool b01 = false, b10 = false;
    for (const auto& t : connections(two, 0)) {
        if (t.kind != TermRef::Kind::TwoLocalPair) continue;
        if (t.sites[0] == 0 && t.sites[1] == 1) b01 = true;
        if (t.sites[0] == 1 && t.sites[1] == 0) b10 = true;
    }
    CHECK(b01);
    CHECK(b10);
}

TEST_CASE("validate rejects bad specs") {
    ModelSpec m = base_model(4);
    m.gamma_minus = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    ModelSpec a = base_model(4);
    a.alpha = -2.0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    ModelSpec n1 = base_model(1);
    n1.J = 0.5;
    CHECK_THROWS_AS(n1.validate(), ConfigError);
}
