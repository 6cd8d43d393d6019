#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace vmpomc;
using namespace vmpomc::testing;

namespace {

ModelSpec small_dqim(int n, double h = 1.0) {
    ModelSpec m;
    m.n_sites = n;
    m.J = 0.5;
    m.h = h;
    m.gamma_minus = 1.0;
    return m;
}

}  // namespace

TEST_CASE("gradient matches finite differences of cost_exact (Wirtinger)") {
    const ModelSpec model = small_dqim(3);
    MpoAnsatz mpo = random_mpo(2, 3, 42);
    hermitize(mpo);
    normalize_trace(mpo);
    const LindbladTerms terms = LindbladTerms::build(model);
    MonteCarloAccumulator acc;
    fill_exact(acc, mpo, terms, false);
    const Vector f = gradient(acc);

    CHECK(acc.sum_L2 / acc.weight ==
          doctest::Approx(cost_exact(mpo, model)).epsilon(1e-10));

    const double e = 1e-6;
    for (int i = 0; i < mpo.n_param(); ++i) {
        for (int part = 0; part < 2; ++part) {
            MpoAnsatz p = mpo, m = mpo;
            Vector step = Vector::Zero(mpo.n_param());
            const Complex dir = part == 0 ? Complex(1, 0) : Complex(0, 1);
            step[i] = -e * dir;
            p.apply_increment(step);
            step[i] = e * dir;
            m.apply_increment(step);
            const double fd = (cost_exact(p, model) - cost_exact(m, model)) / (2 * e);
            // dC/dRe a_i = 2 Re f_i; dC/dIm a_i = 2 Im f_i.
            const double analytic = part == 0 ? 2 * f[i].real() : 2 * f[i].imag();
            const double scale = std::max(1.0, std::abs(analytic));
            CHECK(std::abs(fd - analytic) < 1e-6 * scale);
        }
    }
}

TEST_CASE("update direction decreases the exact cost") {
    const ModelSpec model = small_dqim(3);
    MpoAnsatz mpo = random_mpo(2, 3, 7);
    hermitize(mpo);
    normalize_trace(mpo);
    const LindbladTerms terms = LindbladTerms::build(model);
    MonteCarloAccumulator acc;
    fill_exact(acc, mpo, terms, true);
    const double c0 = cost_exact(mpo, model);

    SUBCASE("SGD step") {
        MpoAnsatz stepped = mpo;
        stepped.apply_increment(1e-3 * gradient(acc));
        CHECK(cost_exact(stepped, model) < c0);
    }
    SUBCASE("SR step") {
        Matrix s = metric_tensor(acc);
        regularize(s, 0.01);
        MpoAnsatz stepped = mpo;
        stepped.apply_increment(solve_update(s, gradient(acc), 1e-3));
        CHECK(cost_exact(stepped, model) < c0);
    }
}

TEST_CASE("metric tensor is Hermitian PSD") {
    const ModelSpec model = small_dqim(3);
    MpoAnsatz mpo = random_mpo(2, 3, 77);
    hermitize(mpo);
    normalize_trace(mpo);
    MonteCarloAccumulator acc;
    fill_exact(acc, mpo, LindbladTerms::build(model), true);
    const Matrix s = metric_tensor(acc);
    CHECK((s - s.adjoint().eval()).norm() < 1e-10 * std::max(1.0, s.norm()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("accumulator merge equals single-pass accumulation") {
    const ModelSpec model = small_dqim(3);
    const MpoAnsatz mpo = random_mpo(2, 3, 5);
    const LindbladTerms terms = LindbladTerms::build(model);
    EstimatorWorkspace ws;
    PartialProducts partials;
    partials.resize(3, 2);
    Vector delta(mpo.n_param()), dl(mpo.n_param());

    std::mt19937_64 rng(1);
    std::vector<SpinConfig> samples;
    while (samples.size() < 100) {
        SpinConfig cfg = random_config(3, rng);
        if (std::abs(naive_amplitude(mpo, cfg)) > 1e-6) samples.push_back(cfg);
    }
    auto add_to = [&](MonteCarloAccumulator& acc, size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            build_partials(mpo, samples[i], partials);
            const Complex l = local_estimator(samples[i], mpo, terms, partials, ws);
            log_derivative(samples[i], mpo, partials, ws, delta);
            local_estimator_gradient(samples[i], mpo, terms, partials, delta, ws, dl);
            acc.add(l, delta, dl);
        }
        acc.flush();
    };

    MonteCarloAccumulator whole, left, right;
    whole.init(mpo.n_param(), true);
    left.init(mpo.n_param(), true);
    right.init(mpo.n_param(), true);
    add_to(whole, 0, 100);
    add_to(left, 0, 37);
    add_to(right, 37, 100);
    left.merge(right);
    CHECK(left.n_samples == whole.n_samples);
    CHECK(left.sum_L2 == doctest::Approx(whole.sum_L2).epsilon(1e-12));
    CHECK((gradient(left) - gradient(whole)).norm() <
          1e-11 * std::max(1.0, gradient(whole).norm()));
    CHECK((metric_tensor(left) - metric_tensor(whole)).norm() <
          1e-11 * std::max(1.0, metric_tensor(whole).norm()));
}

TEST_CASE("solve_update residual check and regularization") {
    const int d = 6;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss;
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    Matrix s = g * g.adjoint();
    Vector f(d);
    for (auto& c : f) c = Complex(gauss(rng), gauss(rng));

    const Vector u = solve_update(s, f, 0.5);
    CHECK((s * (u / 0.5) - f).norm() < 1e-8 * f.norm());

    // The zero matrix cannot reproduce f; the residual check must fire.
    Matrix zero = Matrix::Zero(d, d);
    CHECK_THROWS_AS(solve_update(zero, f, 0.5), SolveFailure);
    regularize(zero, 1e-3);
    const Vector u2 = solve_update(zero, f, 1.0);
    CHECK((u2 - f / 1e-3).norm() < 1e-8 * f.norm());
}

TEST_CASE("step schedule is geometric") {
    CHECK(step_schedule(0, 0.03, 0.998) == 0.03);
    CHECK(step_schedule(10, 0.03, 0.998) == doctest::Approx(0.03 * std::pow(0.998, 10)));
    CHECK(step_schedule(5, 0.01, 1.0) == 0.01);
}

TEST_CASE("run_optimization is deterministic and thread-count independent") {
    const ModelSpec model = small_dqim(3);
    OptimizerConfig cfg;
    cfg.method = OptimizerConfig::Method::SR;
    cfg.epsilon = 0.05;
    cfg.delta0 = 0.02;
    cfg.n_iterations = 5;
    cfg.n_mc = 40;
    cfg.n_workers = 3;
    cfg.seed = 99;
    cfg.burn_in_sweeps = 50;

    const MpoAnsatz start = init_random(2, 3, 1, 0.2);
    const auto r1 = run_optimization(start, model, cfg);
    const auto r2 = run_optimization(start, model, cfg);
    OptimizerConfig cfg_threads = cfg;
    cfg_threads.n_threads = 3;
    const auto r3 = run_optimization(start, model, cfg_threads);

    REQUIRE(r1.trajectory.size() == 5);
    for (size_t k = 0; k < 5; ++k) {
        CHECK(r1.trajectory[k].cost == r2.trajectory[k].cost);
        CHECK(r1.trajectory[k].cost == r3.trajectory[k].cost);
        CHECK(r1.trajectory[k].acceptance_rate == r3.trajectory[k].acceptance_rate);
    }
    for (int s = 0; s < kSuperDim; ++s) {
        CHECK(r1.mpo.tensor(s) == r2.mpo.tensor(s));
        CHECK(r1.mpo.tensor(s) == r3.mpo.tensor(s));
    }
}

TEST_CASE("run_optimization makes progress and records the trajectory") {
    const ModelSpec model = small_dqim(3, 0.5);
    OptimizerConfig cfg;
    cfg.method = OptimizerConfig::Method::SR;
    cfg.epsilon = 0.05;
    cfg.delta0 = 0.05;
    cfg.n_iterations = 80;
    cfg.n_mc = 100;
    cfg.n_workers = 2;
    cfg.seed = 3;
    cfg.burn_in_sweeps = 200;
    cfg.mc_schedule = {{40, 200}};

    const auto result =
        run_optimization(init_random(2, 3, 11, 0.2), model, cfg, {pauli_z()});
    REQUIRE(result.trajectory.size() == 80);
    CHECK(result.trajectory.back().cost < 0.05 * result.trajectory.front().cost);
    CHECK(std::abs(trace_rho(result.mpo) - Complex(1, 0)) < 1e-10);
    // Hermitized at every step: dense rho is Hermitian.
    const Matrix rho = reconstruct_dense(result.mpo);
    CHECK((rho - rho.adjoint().eval()).norm() < 1e-12 * std::max(1.0, rho.norm()));
    for (const auto& row : result.trajectory) {
        CHECK(row.observables.size() == 1);
        CHECK(row.acceptance_rate > 0.0);
        CHECK(row.acceptance_rate < 1.0);
        CHECK(std::isfinite(row.cost));
    }
    // mc_schedule doubles the per-iteration sample count at iteration 40: a run
    // without the schedule matches exactly before that point and diverges after.
    OptimizerConfig flat = cfg;
    flat.mc_schedule.clear();
    flat.n_iterations = 45;
    const auto plain = run_optimization(init_random(2, 3, 11, 0.2), model, flat, {pauli_z()});
    for (int k = 0; k < 40; ++k)
        CHECK(plain.trajectory[size_t(k)].cost == result.trajectory[size_t(k)].cost);
    CHECK(plain.trajectory[41].cost != result.trajectory[41].cost);
}

TEST_CASE("optimizer config validation") {
    OptimizerConfig cfg;
    cfg.n_iterations = 1;
    cfg.delta0 = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.delta0 = 0.01;
    cfg.decay = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.decay = 0.99;
    cfg.epsilon = 0.0;
    cfg.method = OptimizerConfig::Method::SR;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.method = OptimizerConfig::Method::SGD;
    CHECK_NOTHROW(cfg.validate());
}
