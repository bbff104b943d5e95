#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "wavebif/operator.hpp"

using namespace wavebif;

namespace {

const double pi = std::numbers::pi;

std::vector<VorticitySpec> families() {
    return {VorticitySpec::constant(0.0), VorticitySpec::constant(2.0), VorticitySpec::affine(-1.5, 0.4),
            VorticitySpec::polynomial({0.3, -0.5, 0.7})};
}

/// Random smooth zero-mean w and phi with decaying spectra.
State random_state(const GridSpec& g, double lambda, double amp, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PeriodicEvenFunction w(g);
    for (int k = 1; k <= g.N() / 4; ++k) w.coeffs()(k) = amp * u(rng) * std::exp(-0.6 * k);
    ModalField phi(g);
    for (int k = 0; k <= g.N() / 4; ++k) {
        const double a = amp * u(rng) * std::exp(-0.6 * k);
        const double b = amp * u(rng) * std::exp(-0.6 * k);
        for (int j = 0; j <= g.M(); ++j) {
            const double t = static_cast<double>(j) / g.M();
            phi.a(k, j) = a * std::sin(pi * t) + b * std::sin(2 * pi * t);
        }
        phi.a(k, 0) = phi.a(k, g.M()) = 0.0;
    }
    return State(lambda, w, phi);
}

}  // namespace

TEST(Operator, TrivialStatesAreZeros) {
    GridSpec g(2 * pi, 1.0, 16, 40);
    for (const auto& v : families()) {
        Problem p(g, v, 9.81, 0.074);
        for (double lambda : {-3.0, -1.2, 0.8, 2.5}) {
            const auto e = evaluate(p, State::trivial(g, lambda));
            EXPECT_LT(e.F1.coeffs().lpNorm<Eigen::Infinity>(), 1e-12);
            EXPECT_LT(e.F2.a.lpNorm<Eigen::Infinity>(), 1e-12);
            EXPECT_LT(e.A.a.lpNorm<Eigen::Infinity>(), 1e-12);
            EXPECT_NEAR(e.Q, lambda * lambda / 2, 1e-12);
            EXPECT_LT((e.B.array() - lambda * lambda / 2).abs().maxCoeff(), 1e-12);
            EXPECT_LT(e.R.lpNorm<Eigen::Infinity>(), 1e-12);
            EXPECT_LT((e.K.array() - 1.0).abs().maxCoeff(), 1e-15);
        }
    }
}

TEST(Operator, ConformalFactorSingleMode) {
    GridSpec g(2 * pi, 1.0, 16, 20);
    const double eps = 0.3;
    const auto w = PeriodicEvenFunction::mode(g, 1, eps);
    const auto [K, minK2] = conformal_factor(w);
    const double c = 1.0 / std::tanh(1.0);
    double expected_min = 1e300;
    for (int i = 0; i <= g.N(); ++i) {
        const double x = g.x(i);
        const double k2 = std::pow(1 + eps * c * std::cos(x), 2) + std::pow(eps * std::sin(x), 2);
        expected_min = std::min(expected_min, k2);
        EXPECT_NEAR(K(x) * K(x), k2, 1e-12);
    }
    EXPECT_NEAR(minK2, expected_min, 1e-14);
    EXPECT_LT((conformal_factor(PeriodicEvenFunction(g)).first.coeffs() - PeriodicEvenFunction::constant(g, 1).coeffs())
                  .lpNorm<Eigen::Infinity>(),
              1e-15);
}

TEST(Operator, GradientOfVOnTopEqualsKSquared) {
    GridSpec g(2 * pi, 0.8, 32, 20);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const State s = random_state(g, 1.0, 0.2, rng);
        const Eigen::MatrixXd grad2 = detail::grad_V_squared(s.w);
        const auto [vy, wp] = surface_gradient_V(s.w);
        const Eigen::VectorXd k2 =
            vy.half_values().cwiseAbs2() + wp.half_values().cwiseAbs2();
        EXPECT_LT((grad2.col(g.M()) - k2).lpNorm<Eigen::Infinity>(), 1e-12);
    }
}

TEST(Operator, CurvatureLinearisesToMinusSecondDerivative) {
    GridSpec g(2 * pi, 1.0, 16, 20);
    const double eps = 1e-6;
    const auto kappa = curvature(PeriodicEvenFunction::mode(g, 1, eps));
    for (int i = 0; i <= g.N(); ++i) EXPECT_NEAR(kappa.half_values()(i), -eps * std::cos(g.x(i)), 1e-9);
    EXPECT_LT(curvature(PeriodicEvenFunction(g)).coeffs().lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Operator, ParametricCurvatureOfCircle) {
    for (double r : {0.5, 2.0}) {
        for (double t = 0.0; t < 2 * pi; t += 0.37) {
            // (r cos t, r sin t): derivatives in t.
            const double k = parametric_curvature(-r * std::sin(t), r * std::cos(t), -r * std::cos(t), -r * std::sin(t));
            EXPECT_NEAR(k, 1.0 / r, 1e-14);
        }
    }
}

TEST(Operator, PotentialVanishesWithoutVorticity) {
    GridSpec g(2 * pi, 1.0, 16, 30);
    std::mt19937 rng(3);
    const State s = random_state(g, 1.3, 0.2, rng);
    Problem p(g, VorticitySpec::constant(0.0), 9.81, 0.074);
    EXPECT_EQ(solve_A(p, s).a.lpNorm<Eigen::Infinity>(), 0.0);
    Problem pc(g, VorticitySpec::constant(3.0), 9.81, 0.074);
    EXPECT_LT(solve_A(pc, State::trivial(g, 1.3)).a.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(Operator, MeansVanishForRandomStates) {
    GridSpec g(2 * pi, 1.0, 32, 40);
    std::mt19937 rng(7);
    for (const auto& v : families()) {
        Problem p(g, v, 9.81, 0.074);
        for (int trial = 0; trial < 5; ++trial) {
            const State s = random_state(g, -2.0, 0.1, rng);
            const auto e = evaluate(p, s);
            EXPECT_LE(std::abs(e.R_mean), 1e-13 * std::max(1.0, e.R.lpNorm<Eigen::Infinity>()));
            EXPECT_LE(std::abs(e.S_mean), 1e-10);
        }
    }
}

TEST(Operator, LinearResponseWithoutVorticity) {
    GridSpec g(2 * pi, 1.0, 16, 20);
    const double lambda = 1.7, sigma = 0.074, grav = 9.81;
    Problem p(g, VorticitySpec::constant(0.0), grav, sigma);
    PeriodicEvenFunction dw(g);
    for (int k = 1; k <= 5; ++k) dw.coeffs()(k) = 1.0 / (k * k);
    const double eps = 1e-6;
    const auto fp = F_map(p, State(lambda, eps * dw, ModalField(g))).first;
    const auto fm = F_map(p, State(lambda, -eps * dw, ModalField(g))).first;
    const Eigen::VectorXd fd = (fp.coeffs() - fm.coeffs()) / (2 * eps);
    for (int k = 1; k <= g.N(); ++k) {
        const double kn = k * g.nu();
        const double expected = dw.coeff(k) + (-lambda * lambda * kn / std::tanh(kn) + grav) * dw.coeff(k) / (sigma * kn * kn);
        EXPECT_NEAR(fd(k), expected, 1e-6 * std::max(1.0, std::abs(expected))) << "k=" << k;
    }
}

TEST(Operator, BernoulliTermsMatchDirectQuadrature) {
    // gamma = 0, w = eps cos x, phi = 0: A = 0 and B = lambda^2 / (2 K^2) in closed form.
    GridSpec g(2 * pi, 1.0, 32, 20);
    const double eps = 0.15, lambda = 1.4, sigma = 0.074, grav = 9.81;
    Problem p(g, VorticitySpec::constant(0.0), grav, sigma);
    const auto terms = bernoulli_terms(p, State(lambda, PeriodicEvenFunction::mode(g, 1, eps), ModalField(g)));
    const double c = 1.0 / std::tanh(1.0);
    auto K = [&](double x) { return std::hypot(1 + eps * c * std::cos(x), eps * std::sin(x)); };
    auto B = [&](double x) { return lambda * lambda / (2 * K(x) * K(x)); };
    using boost::math::quadrature::gauss_kronrod;
    const double num = gauss_kronrod<double, 61>::integrate([&](double x) { return K(x) * (B(x) + grav * eps * std::cos(x)); },
                                                            0.0, 2 * pi, 10, 1e-14);
    const double den = gauss_kronrod<double, 61>::integrate(K, 0.0, 2 * pi, 10, 1e-14);
    const double Q = num / den;
    EXPECT_NEAR(terms.Q, Q, 1e-12);
    for (double x : {0.0, 0.4, 1.3, 2.9}) {
        EXPECT_NEAR(terms.B(x), B(x), 1e-11);
        EXPECT_NEAR(terms.R(x), K(x) * (B(x) + grav * eps * std::cos(x) - Q) / sigma, 1e-9);
    }
}

TEST(Operator, ConformalityLossIsDetected) {
    GridSpec g(2 * pi, 1.0, 16, 20);
    // 1 + C w' = 1 - eps coth(1) and w' = 0 at x = pi, so K^2 vanishes there for eps = tanh(1).
    EXPECT_LT(conformal_factor(PeriodicEvenFunction::mode(g, 1, std::tanh(1.0))).second, 1e-15);
}

TEST(Operator, TrivialDiagnostics) {
    GridSpec g(2 * pi, 1.3, 16, 20);
    Problem p(g, VorticitySpec::constant(1.0), 9.81, 0.074);
    const double lambda = -2.2;
    const auto d = diagnostics(p, State::trivial(g, lambda));
    EXPECT_NEAR(d.Q, lambda * lambda / 2, 1e-12);
    EXPECT_NEAR(d.min_K2, 1.0, 1e-15);
    EXPECT_NEAR(d.min_depth, 1.3, 1e-15);
    EXPECT_EQ(d.max_curvature, 0.0);
    EXPECT_LT(d.F_residual, 1e-12);
    EXPECT_LT(d.bernoulli_residual, 1e-12);
    EXPECT_FALSE(d.self_intersecting);
    EXPECT_FALSE(d.overhanging);
    EXPECT_NEAR(d.min_surface_speed, std::abs(lambda), 1e-12);
    // Constant gamma = 1 over the strip of area L h with |grad V| = 1.
    EXPECT_NEAR(d.vorticity_Lp, std::sqrt(2 * pi * 1.3), 1e-12);
    EXPECT_LT(harmonicity_residual(PeriodicEvenFunction(g)), 1e-10);
}

TEST(Operator, RefinedInterpolationIsCubicExact) {
    GridSpec g(2 * pi, 1.0, 4, 10);
    ModalField f(g);
    for (int k = 0; k <= g.N(); ++k)
        for (int j = 0; j <= g.M(); ++j) {
            const double y = g.y(j);
            f.a(k, j) = (k + 1) * (y * y * y - 0.3 * y + 0.2);
        }
    const ModalField r = detail::refine_modal_y(f);
    for (int k = 0; k <= g.N(); ++k)
        for (int j = 0; j <= r.grid.M(); ++j) {
            const double y = r.grid.y(j);
            EXPECT_NEAR(r.a(k, j), (k + 1) * (y * y * y - 0.3 * y + 0.2), 1e-14);
        }
}

TEST(Operator, StateInvariants) {
    GridSpec g(2 * pi, 1.0, 8, 10);
    EXPECT_NO_THROW(State::trivial(g, 1.0).check_invariants());
    State s = State::trivial(g, 1.0);
    s.w.coeffs()(0) = 1e-3;
    EXPECT_THROW(s.check_invariants(), InvalidInput);
    State t = State::trivial(g, 1.0);
    t.phi.a(2, g.M()) = 1e-3;
    EXPECT_THROW(t.check_invariants(), InvalidInput);
}
