#pragma once

// Laminar flows psi^lambda(y): psi'' = -gamma(psi), psi(0) = 0, psi'(0) = lambda.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "wavebif/error.hpp"
#include "wavebif/grid.hpp"
#include "wavebif/ode.hpp"
#include "wavebif/vorticity.hpp"

namespace wavebif {

inline constexpr double default_ode_tol = 1e-12;

struct TrivialFlow {
    double lambda = 0.0;
    double h = 0.0;
    VorticitySpec vorticity = VorticitySpec::constant(0.0);
    Eigen::VectorXd y;            // levels -h .. 0 (ascending)
    Eigen::VectorXd psi;          // psi^lambda on the levels
    Eigen::VectorXd psi_y;        // d psi / dy
    Eigen::VectorXd psi_lambda;   // d psi / d lambda
    Eigen::VectorXd psi_lambda_y; // d^2 psi / dy d lambda
    double m = 0.0;               // mass flux -psi(-h)
    double tol = default_ode_tol;

    int levels() const { return static_cast<int>(y.size()); }
    /// gamma(psi) on the levels.
    Eigen::VectorXd gamma_on_levels() const { return psi.unaryExpr([&](double s) { return vorticity.gamma(s); }); }
    Eigen::VectorXd gamma_prime_on_levels() const {
        return psi.unaryExpr([&](double s) { return vorticity.gamma_prime(s); });
    }
    /// dm/dlambda = -d psi / d lambda at the bed.
    double m_lambda() const { return -psi_lambda(0); }
};

namespace detail {

/// Integrates the laminar flow and its lambda-variation from y = 0 down to the
/// given ascending levels (y.front() = -h, y.back() = 0).
inline TrivialFlow integrate_trivial(double lambda, const VorticitySpec& vort, double h, const Eigen::VectorXd& levels,
                                     double tol) {
    require(tol > 0.0, "trivial_flow: tolerance must be positive");
    require(std::isfinite(lambda), "trivial_flow: lambda must be finite");
    const int n = static_cast<int>(levels.size());
    // t = -y runs from 0 to h; state (psi, psi_y, chi, chi_y) with chi = d psi / d lambda.
    std::vector<double> times(n);
    for (int j = 0; j < n; ++j) times[j] = -levels(n - 1 - j);
    times.front() = 0.0;
    auto sys = [&](const std::array<double, 4>& x, std::array<double, 4>& dx, double) {
        dx[0] = -x[1];
        dx[1] = vort.gamma(x[0]);
        dx[2] = -x[3];
        dx[3] = vort.gamma_prime(x[0]) * x[2];
    };
    const auto states = ode::integrate_at<4>(sys, {0.0, lambda, 0.0, 1.0}, times, tol,
                                             "trivial flow does not reach -h");
    TrivialFlow f;
    f.lambda = lambda;
    f.h = h;
    f.vorticity = vort;
    f.tol = tol;
    f.y = levels;
    f.psi.resize(n);
    f.psi_y.resize(n);
    f.psi_lambda.resize(n);
    f.psi_lambda_y.resize(n);
    for (int j = 0; j < n; ++j) {
        const auto& s = states[n - 1 - j];
        f.psi(j) = s[0];
        f.psi_y(j) = s[1];
        f.psi_lambda(j) = s[2];
        f.psi_lambda_y(j) = s[3];
    }
    f.m = -f.psi(0);
    return f;
}

}  // namespace detail

/// Laminar flow sampled on the y-levels of `grid`.
inline TrivialFlow trivial_flow(double lambda, const VorticitySpec& vort, const GridSpec& grid,
                                double tol = default_ode_tol) {
    Eigen::VectorXd levels(grid.M() + 1);
    for (int j = 0; j <= grid.M(); ++j) levels(j) = grid.y(j);
    levels(grid.M()) = 0.0;
    return detail::integrate_trivial(lambda, vort, grid.h(), levels, tol);
}

/// Laminar flow sampled on n+1 uniform levels of [-h, 0].
inline TrivialFlow trivial_flow(double lambda, const VorticitySpec& vort, double h, int n,
                                double tol = default_ode_tol) {
    require(h > 0.0 && n >= 1, "trivial_flow: need h > 0 and at least one interval");
    Eigen::VectorXd levels(n + 1);
    for (int j = 0; j <= n; ++j) levels(j) = -h + h * j / n;
    levels(n) = 0.0;
    return detail::integrate_trivial(lambda, vort, h, levels, tol);
}

/// True when psi_y < 0 on every sampled level, i.e. the flow has no critical layer.
inline bool is_unidirectional(const TrivialFlow& flow) { return (flow.psi_y.array() < 0.0).all(); }

/// Smallest value of psi on the sampled levels.
inline double psi_min(const TrivialFlow& flow) { return flow.psi.minCoeff(); }

}  // namespace wavebif
