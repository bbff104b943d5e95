#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "wavebif/spectral.hpp"

using namespace wavebif;

namespace {

const double pi = std::numbers::pi;

double coth(double z) { return 1.0 / std::tanh(z); }

PeriodicEvenFunction random_zero_mean(const GridSpec& g, std::mt19937& rng, int kmax) {
    std::normal_distribution<double> n(0.0, 1.0);
    PeriodicEvenFunction f(g);
    for (int k = 1; k <= kmax; ++k) f.coeffs()(k) = n(rng) / (k * k);
    return f;
}

}  // namespace

TEST(Hilbert, ZeroInputGivesZero) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    auto out = hilbert_strip(PeriodicEvenFunction(g));
    EXPECT_EQ(out.coeffs().lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Hilbert, SingleModeUsesCothMultiplier) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    auto out = hilbert_strip(PeriodicEvenFunction::mode(g, 1));
    EXPECT_NEAR(out.coeff(1), coth(1.0), 1e-15);
    for (int k = 2; k <= 16; ++k) EXPECT_EQ(out.coeff(k), 0.0);
}

TEST(Hilbert, TwoModesShallowStrip) {
    GridSpec g(2 * pi, 0.7, 16, 16);
    auto f = PeriodicEvenFunction::mode(g, 2) + PeriodicEvenFunction::mode(g, 5);
    auto out = hilbert_strip(f);
    EXPECT_NEAR(out.coeff(2), coth(1.4), 1e-14);
    EXPECT_NEAR(out.coeff(5), coth(3.5), 1e-14);
    // Pointwise against the closed form.
    for (double x : {0.1, 0.7, 2.3, 5.9}) {
        EXPECT_NEAR(out(x), coth(1.4) * std::sin(2 * x) + coth(3.5) * std::sin(5 * x), 1e-13);
    }
}

TEST(Hilbert, RejectsNonzeroMean) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    EXPECT_THROW(hilbert_strip(PeriodicEvenFunction::constant(g, 1.0)), InvalidInput);
    EXPECT_THROW(antiderivative2(PeriodicEvenFunction::constant(g, 0.5)), InvalidInput);
}

TEST(Hilbert, OddInputAndRoundTrip) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    auto out = hilbert_strip_odd(PeriodicOddFunction::mode(g, 1));
    EXPECT_NEAR(out.coeff(1), -coth(1.0), 1e-15);
    EXPECT_EQ(hilbert_strip_odd(PeriodicOddFunction(g)).coeffs().lpNorm<Eigen::Infinity>(), 0.0);
    auto rt = hilbert_strip_odd(hilbert_strip(PeriodicEvenFunction::mode(g, 3)));
    EXPECT_NEAR(rt.coeff(3), -std::pow(coth(3.0), 2), 1e-14);
}

TEST(Hilbert, SkewIdentityOnRandomPairs) {
    // With an odd f1 and an even f2 both products are even, so the identity is not
    // satisfied trivially by parity.
    GridSpec g(2 * pi, 0.8, 32, 16);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        PeriodicOddFunction f1 = random_zero_mean(g, rng, 10).derivative();
        auto f2 = random_zero_mean(g, rng, 10);
        const double m = mean_of_product(hilbert_strip_odd(f1).half_values(), f2.half_values(), g) +
                         mean_of_product(f1.half_values(), hilbert_strip(f2).half_values(), g);
        EXPECT_LT(std::abs(m), 1e-13);
    }
}

TEST(Antiderivative2, Examples) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    EXPECT_NEAR(antiderivative2(PeriodicEvenFunction::mode(g, 1)).coeff(1), -1.0, 1e-15);
    GridSpec gh(pi, 1.0, 16, 16);
    EXPECT_NEAR(antiderivative2(PeriodicEvenFunction::mode(gh, 3)).coeff(3), -1.0 / 36.0, 1e-16);
    EXPECT_EQ(antiderivative2(PeriodicEvenFunction(g)).coeffs().lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Antiderivative2, InvertsSecondDerivative) {
    GridSpec g(3.0, 1.0, 32, 16);
    std::mt19937 rng(3);
    auto f = random_zero_mean(g, rng, 32);
    auto back = antiderivative2(f.second_derivative());
    EXPECT_LT((back.coeffs() - f.coeffs()).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(HarmonicExtension, ConstantGivesLinearProfile) {
    GridSpec g(2 * pi, 1.3, 16, 20);
    StripField V = harmonic_extension(PeriodicEvenFunction::constant(g, g.h()));
    for (int i = 0; i < g.num_points(); ++i)
        for (int j = 0; j <= g.M(); ++j) EXPECT_NEAR(V(i, j), g.y(j) + g.h(), 1e-14);
}

TEST(HarmonicExtension, SingleModeFormula) {
    GridSpec g(2 * pi, 1.0, 16, 20);
    auto v = PeriodicEvenFunction::constant(g, 1.0) + PeriodicEvenFunction::mode(g, 1);
    StripField V = harmonic_extension(v);
    for (int i = 0; i < g.num_points(); i += 3) {
        for (int j = 0; j <= g.M(); j += 4) {
            const double y = g.y(j);
            const double expect = y + 1.0 + std::cos(g.x(i)) * std::sinh(y + 1.0) / std::sinh(1.0);
            EXPECT_NEAR(V(i, j), expect, 1e-14);
        }
    }
    EXPECT_EQ(harmonic_extension(PeriodicEvenFunction(g)).values().lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(HarmonicExtension, TracesMatchBoundaryData) {
    GridSpec g(5.0, 0.9, 24, 20);
    std::mt19937 rng(11);
    auto w = random_zero_mean(g, rng, 12);
    auto v = w + PeriodicEvenFunction::constant(g, g.h());
    StripField V = harmonic_extension(v);
    EXPECT_LT((trace(V, Level::top).coeffs() - v.coeffs()).lpNorm<Eigen::Infinity>(), 1e-13);
    EXPECT_LT(trace(V, Level::bottom).coeffs().lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_LT(V.evenness_defect(), 1e-13);
    EXPECT_NEAR(mean(v), g.h(), 1e-15);
}

TEST(HarmonicExtension, LaplacianResidualIsSecondOrderInM) {
    std::mt19937 rng(5);
    GridSpec g0(2 * pi, 1.0, 16, 20);
    auto w0 = random_zero_mean(g0, rng, 6);
    double prev = 0.0;
    for (int M : {40, 80, 160}) {
        GridSpec g(2 * pi, 1.0, 16, M);
        PeriodicEvenFunction v(g, w0.coeffs());
        v.coeffs()(0) = 1.0;
        // Compare on the interior levels shared by every grid in the sequence.
        const Eigen::MatrixXd lap = discrete_laplacian(harmonic_extension_modal(v)).a;
        double res = 0.0;
        for (int j = M / 40; j < M; j += M / 40) res = std::max(res, lap.col(j).lpNorm<Eigen::Infinity>());
        if (prev > 0.0) { EXPECT_GT(std::log2(prev / res), 1.9) << "M=" << M << " res=" << res; }
        prev = res;
    }
}

TEST(SurfaceGradient, FlatSurface) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    auto [vy, wp] = surface_gradient_V(PeriodicEvenFunction(g));
    EXPECT_EQ(vy.coeff(0), 1.0);
    EXPECT_EQ(vy.coeffs().tail(16).lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(wp.coeffs().lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(SurfaceGradient, SingleModeMultiplier) {
    GridSpec g(2 * pi, 1.0, 16, 16);
    const double eps = 0.1;
    auto [vy, wp] = surface_gradient_V(PeriodicEvenFunction::mode(g, 1, eps));
    // w' = -eps sin x, and the odd multiplier maps sin x to -coth(1) cos x.
    EXPECT_NEAR(wp.coeff(1), -eps, 1e-16);
    EXPECT_NEAR(vy.coeff(1), eps * coth(1.0), 1e-15);
}

TEST(SurfaceGradient, MatchesFiniteDifferenceGradientOfExtension) {
    std::mt19937 rng(2);
    GridSpec g0(2 * pi, 1.0, 16, 40);
    auto w0 = random_zero_mean(g0, rng, 6);
    double prev = 0.0;
    for (int M : {40, 80, 160}) {
        GridSpec g(2 * pi, 1.0, 16, M);
        PeriodicEvenFunction w(g, w0.coeffs());
        auto [vy, wp] = surface_gradient_V(w);
        ModalField V = harmonic_extension_modal(w + PeriodicEvenFunction::constant(g, g.h()));
        const double err = (top_dy(V).coeffs() - vy.coeffs()).lpNorm<Eigen::Infinity>();
        // Horizontal derivative of the top trace is spectral.
        EXPECT_LT((V.level(M).derivative().coeffs() - wp.coeffs()).lpNorm<Eigen::Infinity>(), 1e-13);
        if (prev > 0.0) { EXPECT_GT(std::log2(prev / err), 1.9); }
        prev = err;
    }
}

TEST(Poisson, ZeroRightHandSide) {
    GridSpec g(2 * pi, 1.0, 8, 16);
    EXPECT_EQ(poisson_dirichlet(ModalField(g)).a.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Poisson, ConstantRightHandSideIsExactForQuadratic) {
    GridSpec g(2 * pi, 1.5, 8, 30);
    const double c = 2.5;
    Eigen::MatrixXd vals = Eigen::MatrixXd::Constant(g.num_points(), g.M() + 1, c);
    StripField u = poisson_dirichlet(StripField(g, vals));
    for (int j = 0; j <= g.M(); ++j) {
        const double y = g.y(j);
        EXPECT_NEAR(u(3, j), c * y * (y + g.h()) / 2.0, 1e-12);
    }
}

TEST(Poisson, ManufacturedSolutionConvergesAtSecondOrder) {
    double prev = 0.0;
    for (int M : {20, 40, 80}) {
        GridSpec g(2 * pi, 1.0, 8, M);
        const double nu = g.nu();
        const double kz = pi / g.h();
        Eigen::MatrixXd rhs(g.num_points(), M + 1);
        Eigen::MatrixXd exact(g.num_points(), M + 1);
        for (int i = 0; i < g.num_points(); ++i) {
            for (int j = 0; j <= M; ++j) {
                const double s = std::sin(kz * (g.y(j) + g.h())) * std::cos(nu * g.x(i));
                exact(i, j) = s;
                rhs(i, j) = -(nu * nu + kz * kz) * s;
            }
        }
        StripField u = poisson_dirichlet(StripField(g, rhs));
        const double err = (u.values() - exact).lpNorm<Eigen::Infinity>();
        if (prev > 0.0) { EXPECT_GT(std::log2(prev / err), 1.9); }
        prev = err;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Poisson, IsLinear) {
    GridSpec g(4.0, 1.0, 12, 20);
    std::mt19937 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    ModalField f(g), h(g);
    for (int k = 0; k <= g.N(); ++k)
        for (int j = 0; j <= g.M(); ++j) {
            f.a(k, j) = n(rng);
            h.a(k, j) = n(rng);
        }
    const double a = 1.7, b = -0.4;
    ModalField lhs = poisson_dirichlet(a * f + b * h);
    ModalField rhs = a * poisson_dirichlet(f) + b * poisson_dirichlet(h);
    EXPECT_LT((lhs.a - rhs.a).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Transforms, ParsevalForBandLimitedInput) {
    GridSpec g(2 * pi, 1.0, 32, 16);
    std::mt19937 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_zero_mean(g, rng, 15);
        f.coeffs()(0) = 0.3;
        const Eigen::VectorXd v = f.half_values();
        double from_coeffs = f.coeff(0) * f.coeff(0);
        for (int k = 1; k <= 15; ++k) from_coeffs += 0.5 * f.coeff(k) * f.coeff(k);
        EXPECT_NEAR(mean_of_product(v, v, g), from_coeffs, 1e-14);
    }
}

TEST(Transforms, HalfGridRoundTrip) {
    GridSpec g(2 * pi, 1.0, 20, 16);
    std::mt19937 rng(8);
    auto f = random_zero_mean(g, rng, 20);
    auto back = PeriodicEvenFunction::from_half_values(g, f.half_values());
    EXPECT_LT((back.coeffs() - f.coeffs()).lpNorm<Eigen::Infinity>(), 1e-14);
    PeriodicOddFunction s = f.derivative();
    s.coeffs()(20) = 0.0;  // the Nyquist sine mode is invisible on the grid
    auto sback = PeriodicOddFunction::from_half_values(g, s.half_values());
    EXPECT_LT((sback.coeffs() - s.coeffs()).lpNorm<Eigen::Infinity>(), 1e-13);
}
