#pragma once

// Dispersion relation d(mu, lambda) = beta_y(0) + sigma mu / lambda^2 + gamma(0) / lambda - g / lambda^2,
// where beta'' + (gamma'(psi^lambda) + mu) beta = 0, beta(-h) = 0, beta(0) = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <Eigen/Dense>

#include "wavebif/error.hpp"
#include "wavebif/flows.hpp"
#include "wavebif/grid.hpp"
#include "wavebif/ode.hpp"
#include "wavebif/vorticity.hpp"

namespace wavebif {

/// Physical and numerical parameters shared by the dispersion computations.
struct DispersionSetup {
    VorticitySpec vorticity = VorticitySpec::constant(0.0);
    double L = 2.0 * std::numbers::pi;
    double h = 1.0;
    double g = 9.81;
    double sigma = 0.074;
    double ode_tol = default_ode_tol;
    double spectrum_tol = 1e-8;
    int sample_levels = 64;  // levels used to estimate sup|beta~|

    double nu() const { return 2.0 * std::numbers::pi / L; }
    double mu_of(int k) const { return -std::pow(k * nu(), 2); }

    void validate() const {
        require(L > 0.0 && h > 0.0, "dispersion: L and h must be positive");
        require(g > 0.0 && sigma > 0.0, "dispersion: g and sigma must be positive");
        require(ode_tol > 0.0 && spectrum_tol > 0.0, "dispersion: tolerances must be positive");
        require(sample_levels >= 2, "dispersion: need at least two sample levels");
    }
};

struct BetaProfile {
    double mu = 0.0;
    double lambda = 0.0;
    Eigen::VectorXd y;
    Eigen::VectorXd beta;     // beta~ / beta~(0), or beta~ itself inside the Dirichlet spectrum
    double beta_y0 = std::numeric_limits<double>::infinity();
    bool in_dirichlet_spectrum = false;
    double tilde_beta0 = 0.0;
};

struct PruferResult {
    double beta_y0 = 0.0;
    int branch = 0;  // floor(theta(0) / pi)
    double theta0 = 0.0;
    bool in_dirichlet_spectrum = false;
};

struct BifurcationPoint {
    double lambda0 = 0.0;
    int k0 = 1;
    double mu0 = 0.0;
    double d_value = 0.0;
    double d_lambda = 0.0;
    int kernel_dim = 0;
    std::optional<double> closed_form_lambda;
    bool tangential = false;  // found as a touching minimum of |d|, transversality fails
    bool multi_kernel() const { return kernel_dim > 1; }
};

struct RootSearchOptions {
    int samples = 400;
    double root_tol = 1e-10;
    double kernel_tol = 1e-8;
    int k_max = 0;  // 0 selects max(20, 4 k0)
};

namespace detail {

struct ShotResult {
    std::vector<std::array<double, 8>> states;  // at the requested ascending levels
    double tilde_beta0 = 0.0;
    double tilde_beta_y0 = 0.0;
    double tilde_beta_sup = 0.0;
};

/// Integrates from y = -h upward: (psi, psi_y, chi, chi_y, beta~, beta~_y, f_p, f_p_y), where chi is the
/// lambda-derivative of psi and f_p solves f'' + (gamma' + mu) f = -gamma''(psi) chi beta~ from zero data.
inline ShotResult shoot(double mu, double lambda, const VorticitySpec& vort, double h, const std::vector<double>& levels,
                        double tol) {
    const TrivialFlow bottom = trivial_flow(lambda, vort, h, 1, tol);
    auto sys = [&](const std::array<double, 8>& x, std::array<double, 8>& dx, double) {
        const double gp = vort.gamma_prime(x[0]);
        dx[0] = x[1];
        dx[1] = -vort.gamma(x[0]);
        dx[2] = x[3];
        dx[3] = -gp * x[2];
        dx[4] = x[5];
        dx[5] = -(gp + mu) * x[4];
        dx[6] = x[7];
        dx[7] = -(gp + mu) * x[6] - vort.gamma_second(x[0]) * x[2] * x[4];
    };
    const std::array<double, 8> x0{bottom.psi(0), bottom.psi_y(0), bottom.psi_lambda(0), bottom.psi_lambda_y(0),
                                   0.0, 1.0, 0.0, 0.0};
    ShotResult r;
    r.states = ode::integrate_at<8>(sys, x0, levels, tol, "beta shooting");
    r.tilde_beta0 = r.states.back()[4];
    r.tilde_beta_y0 = r.states.back()[5];
    for (const auto& s : r.states) r.tilde_beta_sup = std::max(r.tilde_beta_sup, std::abs(s[4]));
    return r;
}

inline std::vector<double> uniform_levels(double h, int n) {
    auto t = ode::linspace(-h, 0.0, n);
    t.back() = 0.0;
    return t;
}

inline bool in_spectrum(const ShotResult& r, double spectrum_tol) {
    return std::abs(r.tilde_beta0) < spectrum_tol * r.tilde_beta_sup;
}

}  // namespace detail

/// beta^{mu,lambda} sampled on the levels of `flow`.
inline BetaProfile beta_profile(double mu, const TrivialFlow& flow, double tol = default_ode_tol,
                                double spectrum_tol = 1e-8) {
    std::vector<double> levels(flow.y.data(), flow.y.data() + flow.y.size());
    const auto r = detail::shoot(mu, flow.lambda, flow.vorticity, flow.h, levels, tol);
    BetaProfile p;
    p.mu = mu;
    p.lambda = flow.lambda;
    p.y = flow.y;
    p.tilde_beta0 = r.tilde_beta0;
    p.in_dirichlet_spectrum = detail::in_spectrum(r, spectrum_tol);
    p.beta.resize(flow.levels());
    const double scale = p.in_dirichlet_spectrum ? 1.0 : 1.0 / r.tilde_beta0;
    for (int j = 0; j < flow.levels(); ++j) p.beta(j) = scale * r.states[j][4];
    if (!p.in_dirichlet_spectrum) {
        p.beta(0) = 0.0;
        p.beta(flow.levels() - 1) = 1.0;
        p.beta_y0 = r.tilde_beta_y0 / r.tilde_beta0;
    }
    return p;
}

/// beta_y(0) via the Pruefer angle theta' = cos^2 theta + (gamma'(psi) + mu) sin^2 theta, theta(-h) = 0.
inline PruferResult prufer_beta_slope(double mu, const TrivialFlow& flow, double tol = default_ode_tol,
                                      double spectrum_tol = 1e-8) {
    const auto& vort = flow.vorticity;
    auto sys = [&](const std::array<double, 3>& x, std::array<double, 3>& dx, double) {
        const double c = std::cos(x[2]);
        const double s = std::sin(x[2]);
        dx[0] = x[1];
        dx[1] = -vort.gamma(x[0]);
        dx[2] = c * c + (vort.gamma_prime(x[0]) + mu) * s * s;
    };
    const auto states = ode::integrate_at<3>(sys, {flow.psi(0), flow.psi_y(0), 0.0},
                                             {-flow.h, 0.0}, tol, "Pruefer angle");
    PruferResult r;
    r.theta0 = states.back()[2];
    r.branch = static_cast<int>(std::floor(r.theta0 / std::numbers::pi));
    const double s = std::sin(r.theta0);
    r.in_dirichlet_spectrum = std::abs(s) < spectrum_tol;
    r.beta_y0 = r.in_dirichlet_spectrum ? std::numeric_limits<double>::infinity() : std::cos(r.theta0) / s;
    return r;
}

/// d(mu, lambda); +infinity when mu lies in the Dirichlet spectrum.
inline double dispersion_value(double mu, double lambda, const DispersionSetup& s) {
    require(lambda != 0.0 && std::isfinite(lambda), "dispersion_value: lambda must be finite and nonzero");
    s.validate();
    const auto r = detail::shoot(mu, lambda, s.vorticity, s.h, detail::uniform_levels(s.h, s.sample_levels), s.ode_tol);
    if (detail::in_spectrum(r, s.spectrum_tol)) return std::numeric_limits<double>::infinity();
    const double l2 = lambda * lambda;
    return r.tilde_beta_y0 / r.tilde_beta0 + s.sigma * mu / l2 + s.vorticity.gamma(0.0) / lambda - s.g / l2;
}

/// d_lambda(mu, lambda), with the lambda-derivative of beta_y(0) from a linear boundary value problem.
inline double dispersion_lambda_derivative(double mu, double lambda, const DispersionSetup& s) {
    require(lambda != 0.0 && std::isfinite(lambda), "dispersion_lambda_derivative: lambda must be finite and nonzero");
    s.validate();
    const auto r = detail::shoot(mu, lambda, s.vorticity, s.h, detail::uniform_levels(s.h, s.sample_levels), s.ode_tol);
    if (detail::in_spectrum(r, s.spectrum_tol))
        throw InvalidInput("dispersion_lambda_derivative: mu lies in the Dirichlet spectrum");
    // f = f_p / beta~(0) + c beta~ with f(0) = 0.
    const auto& top = r.states.back();
    const double b0 = r.tilde_beta0;
    const double c = -top[6] / (b0 * b0);
    const double beta_lambda_y0 = top[7] / b0 + c * r.tilde_beta_y0;
    const double l3 = lambda * lambda * lambda;
    return beta_lambda_y0 - 2.0 * s.sigma * mu / l3 - s.vorticity.gamma(0.0) / (lambda * lambda) + 2.0 * s.g / l3;
}

/// v(z) = sqrt(-z) coth(h sqrt(-z)), continued analytically to z >= 0.
inline double bound_function(double z, double h) {
    if (z < 0.0) {
        const double r = std::sqrt(-z);
        return r / std::tanh(r * h);
    }
    if (z == 0.0) return 1.0 / h;
    const double r = std::sqrt(z);
    return r / std::tan(r * h);
}

/// Enclosure v(mu + sup gamma') <= beta_y(0) <= v(mu + inf gamma') when mu lies in one of the intervals
/// I_0 = (-inf, pi^2/h^2 - sup gamma'), I_j = (j^2 pi^2/h^2 - inf gamma', (j+1)^2 pi^2/h^2 - sup gamma').
/// The extrema of gamma' are taken over the sampled range of psi^lambda.
inline std::optional<std::pair<double, double>> beta_slope_bounds(double mu, const TrivialFlow& flow) {
    const Eigen::VectorXd gp = flow.gamma_prime_on_levels();
    const double sup = gp.maxCoeff();
    const double inf = gp.minCoeff();
    const double e = std::pow(std::numbers::pi / flow.h, 2);
    bool inside = mu < e - sup;
    for (int j = 1; !inside && j < 1000; ++j) {
        if (j * j * e - inf > mu) break;
        inside = mu > j * j * e - inf && mu < (j + 1) * (j + 1) * e - sup;
    }
    if (!inside) return std::nullopt;
    return std::make_pair(bound_function(mu + sup, flow.h), bound_function(mu + inf, flow.h));
}

/// beta_y(0) in closed form for constant and affine vorticity (gamma' = a constant): v(mu + a).
inline std::optional<double> closed_form_beta_slope(double mu, const DispersionSetup& s) {
    if (!s.vorticity.has_zero_second_derivative()) return std::nullopt;
    return bound_function(mu + s.vorticity.affine_a(), s.h);
}

/// Roots of f lambda^2 + b lambda - (sigma l^2 + g) = 0 with f = beta_y(0) at mu = -l^2 and b = gamma(0),
/// for constant and affine vorticity, in ascending order.
inline std::optional<std::vector<double>> closed_form_lambdas(double l, const DispersionSetup& s) {
    const auto f = closed_form_beta_slope(-l * l, s);
    if (!f || !std::isfinite(*f)) return std::nullopt;
    const double b = s.vorticity.affine_b();
    const double c = s.sigma * l * l + s.g;
    std::vector<double> roots;
    if (*f == 0.0) {
        if (b != 0.0) roots.push_back(c / b);
        return roots;
    }
    const double disc = b * b + 4.0 * c * (*f);
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    roots.push_back((-b - sq) / (2.0 * (*f)));
    roots.push_back((-b + sq) / (2.0 * (*f)));
    std::sort(roots.begin(), roots.end());
    return roots;
}

/// Number of k in 1..k_max with |d(-(k nu)^2, lambda)| < tol.
inline int kernel_dimension(double lambda, const DispersionSetup& s, int k_max, double tol) {
    int count = 0;
    for (int k = 1; k <= k_max; ++k) {
        const double d = dispersion_value(s.mu_of(k), lambda, s);
        if (std::abs(d) < tol) ++count;
    }
    return count;
}

/// Roots of lambda -> d(-(k0 nu)^2, lambda) inside [lo, hi] (which must not contain 0).
inline std::vector<BifurcationPoint> find_bifurcation_points(int k0, const DispersionSetup& s, double lo, double hi,
                                                             const RootSearchOptions& opt = {}) {
    require(k0 >= 1, "find_bifurcation_points: k0 must be at least 1");
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "find_bifurcation_points: invalid lambda window");
    require(lo > 0.0 || hi < 0.0, "find_bifurcation_points: lambda window must not contain 0");
    require(opt.samples >= 3, "find_bifurcation_points: need at least three samples");
    s.validate();
    const double mu = s.mu_of(k0);
    const int k_max = opt.k_max > 0 ? opt.k_max : std::max(20, 4 * k0);
    auto d = [&](double lam) { return dispersion_value(mu, lam, s); };

    std::vector<double> lam(opt.samples), val(opt.samples);
    for (int i = 0; i < opt.samples; ++i) {
        lam[i] = lo + (hi - lo) * i / (opt.samples - 1);
        val[i] = d(lam[i]);
    }

    std::vector<std::pair<double, bool>> roots;  // (lambda, tangential)
    for (int i = 0; i + 1 < opt.samples; ++i) {
        if (val[i] == 0.0) {
            roots.emplace_back(lam[i], false);
            continue;
        }
        if (!std::isfinite(val[i]) || !std::isfinite(val[i + 1])) continue;
        if ((val[i] < 0.0) == (val[i + 1] < 0.0) || val[i + 1] == 0.0) continue;
        boost::uintmax_t iters = 200;
        const auto bracket = boost::math::tools::toms748_solve(
            d, lam[i], lam[i + 1], val[i], val[i + 1], boost::math::tools::eps_tolerance<double>(50), iters);
        double root = 0.5 * (bracket.first + bracket.second);
        double droot = d(root);
        for (double cand : {bracket.first, bracket.second}) {
            const double dc = d(cand);
            if (std::abs(dc) < std::abs(droot)) {
                root = cand;
                droot = dc;
            }
        }
        // Sign changes across a pole of beta_y(0) are not roots.
        if (std::abs(droot) < opt.root_tol) roots.emplace_back(root, false);
    }
    if (val.back() == 0.0) roots.emplace_back(lam.back(), false);

    // Touching roots: interior local minima of |d| without a sign change.
    for (int i = 1; i + 1 < opt.samples; ++i) {
        if (!std::isfinite(val[i - 1]) || !std::isfinite(val[i]) || !std::isfinite(val[i + 1])) continue;
        const bool same_sign = (val[i - 1] < 0.0) == (val[i] < 0.0) && (val[i] < 0.0) == (val[i + 1] < 0.0);
        if (!same_sign || std::abs(val[i]) > std::abs(val[i - 1]) || std::abs(val[i]) > std::abs(val[i + 1])) continue;
        const double sgn = val[i] < 0.0 ? -1.0 : 1.0;
        const auto m = boost::math::tools::brent_find_minima([&](double x) { return sgn * d(x); }, lam[i - 1],
                                                             lam[i + 1], 40);
        if (std::abs(m.second) < opt.kernel_tol) roots.emplace_back(m.first, true);
    }

    std::sort(roots.begin(), roots.end());
    std::vector<BifurcationPoint> out;
    for (const auto& [root, tangential] : roots) {
        if (!out.empty() && std::abs(out.back().lambda0 - root) < 1e-9 * (1.0 + std::abs(root))) continue;
        BifurcationPoint bp;
        bp.lambda0 = root;
        bp.k0 = k0;
        bp.mu0 = mu;
        bp.d_value = d(root);
        bp.tangential = tangential;
        bp.d_lambda = dispersion_lambda_derivative(mu, root, s);
        bp.kernel_dim = std::max(1, kernel_dimension(root, s, k_max, opt.kernel_tol));
        if (const auto cf = closed_form_lambdas(k0 * s.nu(), s)) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : *cf) {
                if (std::abs(c - root) < std::abs(best - root)) best = c;
            }
            if (std::isfinite(best)) {
                if (std::abs(best - root) > 1e-6 * (1.0 + std::abs(root)))
                    throw NumericalFailure("find_bifurcation_points: shooting root disagrees with closed form");
                bp.closed_form_lambda = best;
            }
        }
        out.push_back(bp);
    }
    return out;
}

struct SturmLiouvilleResult {
    std::vector<double> eigenvalues;  // mu in the window where the boundary condition at p = 0 holds
    double p0 = 0.0;                  // m(lambda)
    double inverse_cube_integral = 0.0;  // int_{p0}^0 a^{-3} dp
    bool single_negative_guaranteed = false;  // inverse_cube_integral < 1/g
};

/// Eigenvalues of (a^3 v_p)_p = -mu a v on [p0, 0], v(p0) = 0, a^3(0) v_p(0) = (-sigma mu + g) v(0),
/// with a = sqrt(lambda^2 + 2 Gamma) and Gamma(p) = int_0^p gamma(-s) ds; p = -psi^lambda(y).
inline SturmLiouvilleResult sturm_liouville_check(double lambda, const DispersionSetup& s, double mu_lo, double mu_hi,
                                                  int samples = 400) {
    s.validate();
    require(lambda < 0.0, "sturm_liouville_check: lambda must be negative");
    require(mu_lo < mu_hi && samples >= 3, "sturm_liouville_check: invalid mu window");
    const TrivialFlow flow = trivial_flow(lambda, s.vorticity, s.h, 256, s.ode_tol);
    if (!is_unidirectional(flow)) throw InvalidInput("sturm_liouville_check: trivial flow is not unidirectional");
    const double p0 = flow.m;
    const auto& vort = s.vorticity;
    auto Gamma = [&](double p) { return -vort.gamma_integral(-p); };
    double gamma_min = 0.0;
    for (int i = 0; i <= 2000; ++i) gamma_min = std::min(gamma_min, Gamma(p0 * i / 2000.0));
    if (!(lambda * lambda > -2.0 * gamma_min))
        throw InvalidInput("sturm_liouville_check: lambda^2 <= -2 min Gamma, a is not defined");
    auto a = [&](double p) { return std::sqrt(lambda * lambda + 2.0 * Gamma(p)); };

    SturmLiouvilleResult res;
    res.p0 = p0;
    res.inverse_cube_integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double p) { return std::pow(a(p), -3.0); }, p0, 0.0, 15, 1e-12);
    res.single_negative_guaranteed = res.inverse_cube_integral < 1.0 / s.g;

    // State (v, q) with q = a^3 v_p: v' = q / a^3, q' = -mu a v.
    auto boundary = [&](double mu) {
        auto sys = [&](const std::array<double, 2>& x, std::array<double, 2>& dx, double p) {
            const double ap = a(p);
            dx[0] = x[1] / (ap * ap * ap);
            dx[1] = -mu * ap * x[0];
        };
        const auto st = ode::integrate_at<2>(sys, {0.0, 1.0}, {p0, 0.0}, s.ode_tol, "Sturm-Liouville shooting");
        return st.back()[1] - (-s.sigma * mu + s.g) * st.back()[0];
    };
    std::vector<double> mus(samples), vals(samples);
    for (int i = 0; i < samples; ++i) {
        mus[i] = mu_lo + (mu_hi - mu_lo) * i / (samples - 1);
        vals[i] = boundary(mus[i]);
    }
    for (int i = 0; i + 1 < samples; ++i) {
        if (vals[i] == 0.0) {
            res.eigenvalues.push_back(mus[i]);
            continue;
        }
        if ((vals[i] < 0.0) == (vals[i + 1] < 0.0) || vals[i + 1] == 0.0) continue;
        boost::uintmax_t iters = 200;
        const auto br = boost::math::tools::toms748_solve(boundary, mus[i], mus[i + 1], vals[i], vals[i + 1],
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
        res.eigenvalues.push_back(0.5 * (br.first + br.second));
    }
    if (vals.back() == 0.0) res.eigenvalues.push_back(mus.back());
    return res;
}

struct DispersionRow {
    int k = 0;
    double lambda = 0.0;
    double d_value = 0.0;
    bool in_spectrum = false;
    int branch_index = 0;
};

/// Tabulates d(-(k nu)^2, lambda) over k in ks and lambda in lambdas.
inline std::vector<DispersionRow> dispersion_table(const std::vector<int>& ks, const std::vector<double>& lambdas,
                                                   const DispersionSetup& s) {
    std::vector<DispersionRow> rows;
    for (int k : ks) {
        require(k >= 1, "dispersion_table: k must be at least 1");
        for (double lam : lambdas) {
            DispersionRow r;
            r.k = k;
            r.lambda = lam;
            r.d_value = dispersion_value(s.mu_of(k), lam, s);
            r.in_spectrum = !std::isfinite(r.d_value);
            const TrivialFlow flow = trivial_flow(lam, s.vorticity, s.h, 1, s.ode_tol);
            r.branch_index = prufer_beta_slope(s.mu_of(k), flow, s.ode_tol, s.spectrum_tol).branch;
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace wavebif
