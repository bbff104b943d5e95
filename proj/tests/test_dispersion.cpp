#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "wavebif/dispersion.hpp"

using namespace wavebif;

namespace {

const double pi = std::numbers::pi;

DispersionSetup setup(VorticitySpec v) {
    DispersionSetup s;
    s.vorticity = v;
    return s;
}

double coth(double z) { return 1.0 / std::tanh(z); }

// Constant-vorticity roots lambda_(+/-)(l).
double lambda_const(double l, double gamma, double h, double sigma, double g, int sign) {
    const double t = std::tanh(l * h);
    return -gamma * t / (2 * l) + sign * std::sqrt((sigma * l * l + g) * t / l + gamma * gamma * t * t / (4 * l * l));
}

// Affine a < 0 roots.
double lambda_affine(double l, double a, double b, double h, double sigma, double g, int sign) {
    const double r = std::sqrt(l * l - a);
    const double f = r * coth(r * h);
    return (-b + sign * std::sqrt(b * b + 4 * (sigma * l * l + g) * f)) / (2 * f);
}

}  // namespace

TEST(BetaProfile, ConstantVorticityIsSinhRatio) {
    const double h = 1.0;
    auto flow = trivial_flow(1.3, VorticitySpec::constant(2.0), h, 50);
    for (int k = 1; k <= 4; ++k) {
        const double kn = k;
        auto p = beta_profile(-kn * kn, flow);
        ASSERT_FALSE(p.in_dirichlet_spectrum);
        EXPECT_NEAR(p.beta_y0, kn * coth(kn * h), 1e-9);
        for (int j = 0; j < flow.levels(); ++j)
            EXPECT_NEAR(p.beta(j), std::sinh(kn * (p.y(j) + h)) / std::sinh(kn * h), 1e-9);
    }
}

TEST(BetaProfile, AffineCasesMatchClosedForms) {
    const double h = 1.0;
    const double l = 1.0;
    // Case 3 (a < l^2), case 2 (a = l^2), case 1 (a > l^2, away from the Dirichlet spectrum).
    for (double a : {-1.5, 1.0, 4.0}) {
        auto flow = trivial_flow(-0.8, VorticitySpec::affine(a, 0.4), h, 40);
        auto p = beta_profile(-l * l, flow);
        double expect;
        if (a < l * l) expect = std::sqrt(l * l - a) * coth(std::sqrt(l * l - a) * h);
        else if (a == l * l) expect = 1.0 / h;
        else expect = std::sqrt(a - l * l) / std::tan(std::sqrt(a - l * l) * h);
        EXPECT_NEAR(p.beta_y0, expect, 1e-9) << "a=" << a;
        if (a == l * l) {
            for (int j = 0; j < flow.levels(); ++j) EXPECT_NEAR(p.beta(j), (p.y(j) + h) / h, 1e-10);
        }
    }
}

TEST(BetaProfile, FlagsDirichletSpectrum) {
    // gamma' = a = pi^2 + 1 and mu = -1 put gamma' + mu on the first Dirichlet eigenvalue pi^2.
    auto flow = trivial_flow(-0.5, VorticitySpec::affine(pi * pi + 1.0, 0.0), 1.0, 40);
    EXPECT_TRUE(beta_profile(-1.0, flow).in_dirichlet_spectrum);
    EXPECT_TRUE(prufer_beta_slope(-1.0, flow).in_dirichlet_spectrum);
    auto s = setup(VorticitySpec::affine(pi * pi + 1.0, 0.0));
    EXPECT_TRUE(std::isinf(dispersion_value(-1.0, -0.5, s)));
    EXPECT_THROW(dispersion_lambda_derivative(-1.0, -0.5, s), InvalidInput);
}

TEST(Dispersion, ConstantVorticityClosedForm) {
    for (double gamma : {0.0, 2.0, -1.5}) {
        auto s = setup(VorticitySpec::constant(gamma));
        for (int k = 1; k <= 10; ++k) {
            const double l = k * s.nu();
            for (double lam : {-3.0, -0.7, 0.4, 2.2}) {
                const double expect = l * coth(l * s.h) - s.sigma * l * l / (lam * lam) + gamma / lam - s.g / (lam * lam);
                EXPECT_NEAR(dispersion_value(-l * l, lam, s), expect, 1e-8 * (1 + std::abs(expect)));
            }
        }
    }
}

TEST(Dispersion, ZeroVorticityRootMatchesClosedForm) {
    auto s = setup(VorticitySpec::constant(0.0));
    const double root = std::sqrt((s.sigma + s.g) * std::tanh(1.0));
    EXPECT_NEAR(dispersion_value(-1.0, root, s), 0.0, 1e-10);
    EXPECT_NEAR(dispersion_value(-1.0, -root, s), 0.0, 1e-10);
    auto pts = find_bifurcation_points(1, s, 0.5, 6.0);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_NEAR(pts[0].lambda0, root, 1e-8);
    EXPECT_EQ(pts[0].kernel_dim, 1);
    ASSERT_TRUE(pts[0].closed_form_lambda.has_value());
    EXPECT_LT(std::abs(pts[0].d_value), 1e-10);
}

TEST(Dispersion, LambdaDerivativeForConstantVorticity) {
    const double gamma = 1.2;
    auto s = setup(VorticitySpec::constant(gamma));
    for (int k = 1; k <= 3; ++k) {
        const double l2 = std::pow(k * s.nu(), 2);
        for (double lam : {-2.0, 1.5}) {
            const double expect = 2 * s.sigma * l2 / std::pow(lam, 3) - gamma / (lam * lam) + 2 * s.g / std::pow(lam, 3);
            EXPECT_NEAR(dispersion_lambda_derivative(-l2, lam, s), expect, 1e-9 * (1 + std::abs(expect)));
        }
    }
}

TEST(Dispersion, LambdaDerivativeMatchesFiniteDifferences) {
    auto s = setup(VorticitySpec::polynomial({0.5, -0.3, 0.8}));
    for (int k = 1; k <= 3; ++k) {
        const double mu = s.mu_of(k);
        for (double lam : {-2.5, -0.9, 1.1, 3.0}) {
            const double eps = 1e-6 * (1 + std::abs(lam));
            const double fd = (dispersion_value(mu, lam + eps, s) - dispersion_value(mu, lam - eps, s)) / (2 * eps);
            const double an = dispersion_lambda_derivative(mu, lam, s);
            EXPECT_NEAR(an, fd, 1e-5 * std::abs(an)) << "k=" << k << " lambda=" << lam;
        }
    }
}

TEST(Dispersion, RejectsZeroLambda) {
    auto s = setup(VorticitySpec::constant(0.0));
    EXPECT_THROW(dispersion_value(-1.0, 0.0, s), InvalidInput);
    EXPECT_THROW(find_bifurcation_points(1, s, -1.0, 1.0), InvalidInput);
}

TEST(Prufer, AgreesWithShooting) {
    for (const auto& v : {VorticitySpec::constant(0.0), VorticitySpec::affine(3.0, 0.5),
                          VorticitySpec::polynomial({0.5, -0.3, 0.8})}) {
        auto flow = trivial_flow(-1.4, v, 1.0, 20);
        for (double mu : {-30.0, -4.0, -1.0, 2.0, 15.0}) {
            auto p = beta_profile(mu, flow);
            auto q = prufer_beta_slope(mu, flow);
            ASSERT_EQ(p.in_dirichlet_spectrum, q.in_dirichlet_spectrum);
            if (!p.in_dirichlet_spectrum) { EXPECT_NEAR(p.beta_y0, q.beta_y0, 1e-8 * (1 + std::abs(p.beta_y0))); }
        }
    }
    auto flow = trivial_flow(2.0, VorticitySpec::constant(0.0), 1.0, 20);
    EXPECT_NEAR(prufer_beta_slope(-1.0, flow).beta_y0, coth(1.0), 1e-10);
    EXPECT_EQ(prufer_beta_slope(-1.0, flow).branch, 0);
}

TEST(Prufer, SlopeDecreasesAlongEachBranch) {
    auto flow = trivial_flow(-1.0, VorticitySpec::polynomial({0.5, -0.3, 0.8}), 1.0, 20);
    int prev_branch = -1;
    double prev = 0.0;
    for (double mu = -20.0; mu < 60.0; mu += 0.25) {
        auto r = prufer_beta_slope(mu, flow);
        if (r.in_dirichlet_spectrum) continue;
        if (r.branch == prev_branch) { EXPECT_LT(r.beta_y0, prev); }
        prev_branch = r.branch;
        prev = r.beta_y0;
    }
    EXPECT_GE(prev_branch, 2);
}

TEST(Prufer, BoundsHoldOnTheIntervals) {
    auto flow = trivial_flow(-1.2, VorticitySpec::polynomial({0.2, 1.5, -0.7}), 1.0, 200);
    int checked = 0;
    for (double mu = -40.0; mu < 100.0; mu += 0.37) {
        auto b = beta_slope_bounds(mu, flow);
        if (!b) continue;
        auto r = prufer_beta_slope(mu, flow);
        ASSERT_FALSE(r.in_dirichlet_spectrum);
        EXPECT_LE(b->first, r.beta_y0 + 1e-9);
        EXPECT_GE(b->second, r.beta_y0 - 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 100);
}

TEST(BifurcationPoints, ConstantVorticityBothSigns) {
    const double gamma = 2.0;
    auto s = setup(VorticitySpec::constant(gamma));
    for (int k0 : {1, 2}) {
        const double l = k0 * s.nu();
        auto pos = find_bifurcation_points(k0, s, 0.2, 8.0);
        auto neg = find_bifurcation_points(k0, s, -8.0, -0.2);
        ASSERT_EQ(pos.size(), 1u);
        ASSERT_EQ(neg.size(), 1u);
        EXPECT_NEAR(pos[0].lambda0, lambda_const(l, gamma, s.h, s.sigma, s.g, +1), 1e-8);
        EXPECT_NEAR(neg[0].lambda0, lambda_const(l, gamma, s.h, s.sigma, s.g, -1), 1e-8);
        for (const auto& bp : {pos[0], neg[0]}) {
            const double lam = bp.lambda0;
            const double expect = 2 * s.sigma * l * l / std::pow(lam, 3) - gamma / (lam * lam) + 2 * s.g / std::pow(lam, 3);
            EXPECT_NEAR(bp.d_lambda, expect, 1e-7 * std::abs(expect));
            EXPECT_EQ(bp.kernel_dim, 1);
        }
    }
    EXPECT_NEAR(find_bifurcation_points(1, s, 0.2, 8.0)[0].lambda0, 2.086, 1e-3);
    EXPECT_NEAR(find_bifurcation_points(1, s, -8.0, -0.2)[0].lambda0, -3.609, 1e-3);
}

TEST(BifurcationPoints, AffineNegativeSlope) {
    const double a = -2.0, b = 0.7;
    auto s = setup(VorticitySpec::affine(a, b));
    for (int k0 : {1, 3}) {
        const double l = k0 * s.nu();
        auto pos = find_bifurcation_points(k0, s, 0.1, 10.0);
        auto neg = find_bifurcation_points(k0, s, -10.0, -0.1);
        ASSERT_EQ(pos.size(), 1u);
        ASSERT_EQ(neg.size(), 1u);
        EXPECT_NEAR(pos[0].lambda0, lambda_affine(l, a, b, s.h, s.sigma, s.g, +1), 1e-8);
        EXPECT_NEAR(neg[0].lambda0, lambda_affine(l, a, b, s.h, s.sigma, s.g, -1), 1e-8);
    }
}

TEST(BifurcationPoints, EmptyWindowAndFiniteDifferenceSlope) {
    auto s = setup(VorticitySpec::polynomial({0.5, -0.3, 0.8}));
    EXPECT_TRUE(find_bifurcation_points(1, setup(VorticitySpec::constant(1.0)), 50.0, 60.0).empty());
    auto pts = find_bifurcation_points(1, s, 0.3, 8.0);
    ASSERT_FALSE(pts.empty());
    for (const auto& bp : pts) {
        EXPECT_LT(std::abs(bp.d_value), 1e-10);
        const double eps = 1e-6 * (1 + std::abs(bp.lambda0));
        const double fd = (dispersion_value(bp.mu0, bp.lambda0 + eps, s) - dispersion_value(bp.mu0, bp.lambda0 - eps, s)) /
                          (2 * eps);
        EXPECT_NEAR(bp.d_lambda, fd, 1e-5 * std::abs(fd));
        EXPECT_FALSE(bp.closed_form_lambda.has_value());
    }
}

TEST(SturmLiouville, EigenvaluesMatchDispersionRoots) {
    for (const auto& [v, lambda] : {std::pair{VorticitySpec::constant(0.0), -2.0},
                                    std::pair{VorticitySpec::constant(1.0), -2.5}}) {
        auto s = setup(v);
        auto res = sturm_liouville_check(lambda, s, -4000.0, -0.01, 800);
        ASSERT_FALSE(res.eigenvalues.empty());
        EXPECT_LE(res.eigenvalues.size(), 2u);
        for (double mu : res.eigenvalues) {
            // Independent root of mu -> d(mu, lambda) near the reported eigenvalue.
            auto d = [&](double m) { return dispersion_value(m, lambda, s); };
            const double lo = mu * (1 + 1e-3), hi = mu * (1 - 1e-3);
            boost::uintmax_t it = 100;
            auto br = boost::math::tools::toms748_solve(d, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
            EXPECT_NEAR(mu, 0.5 * (br.first + br.second), 1e-6 * (1 + std::abs(mu)));
        }
        EXPECT_NEAR(res.p0, trivial_flow(lambda, v, s.h, 10).m, 1e-12);
    }
}

TEST(SturmLiouville, RejectsNonUnidirectionalFlows) {
    auto s = setup(VorticitySpec::constant(2.0));
    EXPECT_THROW(sturm_liouville_check(-1.0, s, -10.0, -0.1), InvalidInput);
    EXPECT_THROW(sturm_liouville_check(1.0, s, -10.0, -0.1), InvalidInput);
}

TEST(SturmLiouville, InverseCubeIntegralForUniformFlow) {
    // a = |lambda| when gamma = 0, so the integral is |p0| / |lambda|^3 = h / lambda^2.
    auto s = setup(VorticitySpec::constant(0.0));
    auto res = sturm_liouville_check(-3.0, s, -50.0, -0.1, 50);
    EXPECT_NEAR(res.inverse_cube_integral, 1.0 / 9.0, 1e-12);
    EXPECT_FALSE(res.single_negative_guaranteed);  // 1/9 > 1/g
    EXPECT_TRUE(sturm_liouville_check(-4.0, s, -50.0, -0.1, 50).single_negative_guaranteed);
}

TEST(DispersionTable, ReportsBranchIndexAndSpectrum) {
    auto s = setup(VorticitySpec::constant(0.0));
    auto rows = dispersion_table({1, 2}, {-1.0, 1.0}, s);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.in_spectrum);
        EXPECT_EQ(r.branch_index, 0);
    }
}
