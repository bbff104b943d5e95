#pragma once

// The nonlinear map F(lambda, w, phi) = (w, phi) - M(lambda, w, phi) and its ingredients.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <utility>

#include <Eigen/Dense>

#include "wavebif/error.hpp"
#include "wavebif/flows.hpp"
#include "wavebif/geometry.hpp"
#include "wavebif/grid.hpp"
#include "wavebif/spectral.hpp"
#include "wavebif/vorticity.hpp"

namespace wavebif {

namespace detail {

/// Small thread-safe cache of laminar flows keyed by lambda.
class FlowCache {
public:
    std::shared_ptr<const TrivialFlow> get(double lambda, const VorticitySpec& vort, const GridSpec& grid, double tol) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            for (const auto& f : flows_)
                if (f->lambda == lambda) return f;
        }
        auto f = std::make_shared<const TrivialFlow>(trivial_flow(lambda, vort, grid, tol));
        std::lock_guard<std::mutex> lock(mutex_);
        flows_.push_front(f);
        if (flows_.size() > capacity) flows_.pop_back();
        return f;
    }

private:
    static constexpr std::size_t capacity = 8;
    std::mutex mutex_;
    std::deque<std::shared_ptr<const TrivialFlow>> flows_;
};

}  // namespace detail

/// Physical and numerical setting shared by all states.
class Problem {
public:
    Problem(GridSpec grid, VorticitySpec vorticity, double g, double sigma, double ode_tol = default_ode_tol)
        : grid_(std::move(grid)), vort_(std::move(vorticity)), g_(g), sigma_(sigma), ode_tol_(ode_tol),
          cache_(std::make_shared<detail::FlowCache>()) {
        require(std::isfinite(g) && g > 0.0, "problem: g must be positive");
        require(std::isfinite(sigma) && sigma > 0.0, "problem: sigma must be positive");
    }

    const GridSpec& grid() const { return grid_; }
    const VorticitySpec& vorticity() const { return vort_; }
    double g() const { return g_; }
    double sigma() const { return sigma_; }
    double ode_tol() const { return ode_tol_; }

    /// Laminar flow on the grid levels.
    std::shared_ptr<const TrivialFlow> flow(double lambda) const { return cache_->get(lambda, vort_, grid_, ode_tol_); }

    /// Same problem on a y-grid refined by `factor`.
    Problem refined_y(int factor) const { return Problem(grid_.refined_y(factor), vort_, g_, sigma_, ode_tol_); }

private:
    GridSpec grid_;
    VorticitySpec vort_;
    double g_;
    double sigma_;
    double ode_tol_;
    std::shared_ptr<detail::FlowCache> cache_;
};

/// A point (lambda, w, phi). phi is carried per cosine mode; its top and bottom columns are zero.
struct State {
    double lambda = 0.0;
    PeriodicEvenFunction w;
    ModalField phi;

    State(double lam, PeriodicEvenFunction w_, ModalField phi_) : lambda(lam), w(std::move(w_)), phi(std::move(phi_)) {
        require(w.grid() == phi.grid, "state: w and phi live on different grids");
    }
    static State trivial(const GridSpec& grid, double lambda) {
        return State(lambda, PeriodicEvenFunction(grid), ModalField(grid));
    }
    const GridSpec& grid() const { return phi.grid; }

    /// Throws InvalidInput unless <w> = 0 and phi vanishes on the top and bottom.
    void check_invariants(double tol = 1e-12) const {
        require(std::isfinite(lambda), "state: lambda must be finite");
        require(w.coeffs().allFinite() && phi.a.allFinite(), "state: non-finite coefficients");
        const double scale = std::max(1.0, w.coeffs().lpNorm<Eigen::Infinity>());
        require(std::abs(w.coeff(0)) <= tol * scale, "state: w must have zero mean");
        const double pscale = std::max(1.0, phi.a.lpNorm<Eigen::Infinity>());
        require(phi.a.col(0).lpNorm<Eigen::Infinity>() <= tol * pscale &&
                    phi.a.col(phi.grid.M()).lpNorm<Eigen::Infinity>() <= tol * pscale,
                "state: phi must vanish on the top and the bottom");
    }
};

/// Curvature (x' y'' - y' x'') / (x'^2 + y'^2)^{3/2} of a parametrised planar curve.
inline double parametric_curvature(double xp, double yp, double xpp, double ypp) {
    return (xp * ypp - yp * xpp) / std::pow(xp * xp + yp * yp, 1.5);
}

/// K(w) = ((1 + C w')^2 + w'^2)^{1/2} together with min K^2 over the collocation points.
inline std::pair<PeriodicEvenFunction, double> conformal_factor(const PeriodicEvenFunction& w) {
    const auto [vy, wp] = surface_gradient_V(w);
    const Eigen::VectorXd a = vy.half_values();
    const Eigen::VectorXd b = wp.half_values();
    const Eigen::VectorXd k2 = a.cwiseProduct(a) + b.cwiseProduct(b);
    return {PeriodicEvenFunction::from_half_values(w.grid(), k2.cwiseSqrt()), k2.minCoeff()};
}

/// Curvature of the surface x -> (x + C w, w): ((1 + C w') w'' - w' C w'') / K^3.
inline PeriodicEvenFunction curvature(const PeriodicEvenFunction& w) {
    const auto [vy, wp] = surface_gradient_V(w);
    const PeriodicEvenFunction wpp = w.second_derivative();
    const PeriodicOddFunction cwpp = hilbert_strip(wpp);
    const Eigen::VectorXd a = vy.half_values(), b = wp.half_values();
    const Eigen::VectorXd ap = cwpp.half_values(), bp = wpp.half_values();
    Eigen::VectorXd kappa(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double k2 = a(i) * a(i) + b(i) * b(i);
        if (!(k2 > 0.0)) throw InvalidInput("curvature: conformality lost (K^2 = 0)");
        kappa(i) = parametric_curvature(a(i), b(i), ap(i), bp(i));
    }
    return PeriodicEvenFunction::from_half_values(w.grid(), kappa);
}

/// Every intermediate quantity of one evaluation of F, on the half grid where pointwise.
struct Evaluation {
    Eigen::VectorXd vy;       // 1 + C w'
    Eigen::VectorXd wp;       // w'
    Eigen::VectorXd K;        // K(w)
    double min_K2 = 0.0;
    ModalField A;             // solution of the Poisson problem
    Eigen::VectorXd B;
    double Q = 0.0;
    Eigen::VectorXd R;
    double R_mean = 0.0;      // <R> before any correction
    double S_mean = 0.0;      // <(1 + C w') R + w' C R> before projection
    PeriodicEvenFunction F1;
    ModalField F2;

    explicit Evaluation(const GridSpec& g) : A(g), F1(g), F2(g) {}
};

namespace detail {

/// |grad V[w + h]|^2 on the half grid from the exact modal derivatives.
inline Eigen::MatrixXd grad_V_squared(const PeriodicEvenFunction& w) {
    const auto& g = w.grid();
    const auto& t = g.tables();
    PeriodicEvenFunction wh = w;
    wh.coeffs()(0) += g.h();
    const ModalField V = harmonic_extension_modal(wh);
    Eigen::MatrixXd vx_modal = V.a;
    for (int k = 0; k <= g.N(); ++k) vx_modal.row(k) *= -k * g.nu();
    const Eigen::MatrixXd vx = t.sin_synthesis * vx_modal;
    const Eigen::MatrixXd vyy = t.cos_synthesis * harmonic_extension_dy_modal(wh).a;
    return vx.cwiseProduct(vx) + vyy.cwiseProduct(vyy);
}

}  // namespace detail

/// Solution of the Dirichlet problem for A with source -gamma(phi + psi) |grad V|^2 + gamma(psi).
inline ModalField solve_A(const Problem& p, const State& s) {
    const auto& g = s.grid();
    const auto flow = p.flow(s.lambda);
    const auto& vort = p.vorticity();
    if (vort.is_identically_zero()) return ModalField(g);
    const Eigen::MatrixXd grad2 = detail::grad_V_squared(s.w);
    const Eigen::MatrixXd stream = s.phi.half_values().rowwise() + flow->psi.transpose();
    Eigen::MatrixXd rhs(stream.rows(), stream.cols());
    for (Eigen::Index j = 0; j < stream.cols(); ++j) {
        const double gpsi = vort.gamma(flow->psi(j));
        for (Eigen::Index i = 0; i < stream.rows(); ++i) rhs(i, j) = -vort.gamma(stream(i, j)) * grad2(i, j) + gpsi;
    }
    return poisson_dirichlet(ModalField::from_half_values(g, rhs));
}

/// Threshold on the relative mean defect before the inverse of d^2/dx^2 is applied.
inline constexpr double mean_defect_tol = 1e-10;

/// Full evaluation of F at `s`. Throws InvalidInput when K^2 vanishes somewhere and
/// NumericalFailure when the mean defect exceeds mean_defect_tol (aliasing; increase N).
inline Evaluation evaluate(const Problem& p, const State& s) {
    const auto& g = s.grid();
    require(g == p.grid(), "evaluate: state and problem grids differ");
    const auto& t = g.tables();
    Evaluation e(g);
    const auto [vy_f, wp_f] = surface_gradient_V(s.w);
    e.vy = vy_f.half_values();
    e.wp = wp_f.half_values();
    const Eigen::VectorXd K2 = e.vy.cwiseProduct(e.vy) + e.wp.cwiseProduct(e.wp);
    e.min_K2 = K2.minCoeff();
    if (!(e.min_K2 > 0.0)) throw InvalidInput("evaluate: conformality lost (min K^2 <= 0)");
    e.K = K2.cwiseSqrt();

    e.A = solve_A(p, s);
    const Eigen::VectorXd ay = top_dy(e.A).half_values().array() + s.lambda;
    e.B = ay.cwiseProduct(ay).cwiseQuotient(2.0 * K2);
    const Eigen::VectorXd gw = p.g() * s.w.half_values();
    const Eigen::VectorXd bg = e.B + gw;
    e.Q = mean_of_product(e.K, bg, g) / t.trapezoid.dot(e.K);
    e.R = e.K.cwiseProduct((bg.array() - e.Q).matrix()) / p.sigma();
    e.R_mean = t.trapezoid.dot(e.R);

    PeriodicEvenFunction R = PeriodicEvenFunction::from_half_values(g, e.R);
    R.coeffs()(0) = 0.0;
    const Eigen::VectorXd cr = hilbert_strip(R).half_values();
    const Eigen::VectorXd S = e.vy.cwiseProduct(e.R) + e.wp.cwiseProduct(cr);
    PeriodicEvenFunction Sf = PeriodicEvenFunction::from_half_values(g, S);
    e.S_mean = Sf.coeff(0);
    const double scale = std::max(1.0, S.lpNorm<Eigen::Infinity>());
    if (!(std::abs(e.S_mean) <= mean_defect_tol * scale)) {
        throw NumericalFailure("evaluate: mean defect " + std::to_string(e.S_mean) +
                               " before inverting d^2/dx^2 (aliasing; increase N)");
    }
    Sf.coeffs()(0) = 0.0;
    e.F1 = s.w - antiderivative2(Sf);
    e.F2 = s.phi - e.A;
    e.F2.a.col(0).setZero();
    e.F2.a.col(g.M()).setZero();
    return e;
}

/// F(lambda, w, phi) as a pair (F1, F2).
inline std::pair<PeriodicEvenFunction, ModalField> F_map(const Problem& p, const State& s) {
    Evaluation e = evaluate(p, s);
    return {std::move(e.F1), std::move(e.F2)};
}

struct BernoulliTerms {
    PeriodicEvenFunction B;
    double Q = 0.0;
    PeriodicEvenFunction R;
};

inline BernoulliTerms bernoulli_terms(const Problem& p, const State& s) {
    const Evaluation e = evaluate(p, s);
    const auto& g = s.grid();
    return {PeriodicEvenFunction::from_half_values(g, e.B), e.Q, PeriodicEvenFunction::from_half_values(g, e.R)};
}

namespace detail {

/// Cubic interpolation of every mode of `f` onto a y-grid with twice the resolution.
inline ModalField refine_modal_y(const ModalField& f) {
    const GridSpec fine = f.grid.refined_y(2);
    const int M = f.grid.M();
    ModalField out(fine);
    for (int j = 0; j <= M; ++j) out.a.col(2 * j) = f.a.col(j);
    out.a.col(1) = (5 * f.a.col(0) + 15 * f.a.col(1) - 5 * f.a.col(2) + f.a.col(3)) / 16.0;
    for (int j = 1; j <= M - 2; ++j)
        out.a.col(2 * j + 1) = (-f.a.col(j - 1) + 9 * f.a.col(j) + 9 * f.a.col(j + 1) - f.a.col(j + 2)) / 16.0;
    out.a.col(2 * M - 1) = (f.a.col(M - 3) - 5 * f.a.col(M - 2) + 15 * f.a.col(M - 1) + 5 * f.a.col(M)) / 16.0;
    return out;
}

}  // namespace detail

/// Sup-norm residual of the pointwise Bernoulli equation
///   ((1 + C w') w'' - w' C w'') / K^2 = K (S[|grad(A + psi)|^2 / (2 |grad V|^2)] + g w - Q) / sigma,
/// with the right-hand side evaluated on a y-grid refined by 2 (phi interpolated per mode), so that
/// the result measures the discretisation error of the y-direction.
inline double bernoulli_residual(const Problem& p, const State& s) {
    const Problem fine = p.refined_y(2);
    const State sf(s.lambda, PeriodicEvenFunction(fine.grid(), s.w.coeffs()), detail::refine_modal_y(s.phi));
    const Evaluation e = evaluate(fine, sf);
    const PeriodicEvenFunction kappa = curvature(s.w);
    const Eigen::VectorXd lhs = kappa.half_values().cwiseProduct(e.K);
    return (lhs - e.R).lpNorm<Eigen::Infinity>();
}

/// Sup over interior levels of the discrete Laplacian of V[w + h] (zero for the exact modal extension
/// up to the y-discretisation error).
inline double harmonicity_residual(const PeriodicEvenFunction& w) {
    PeriodicEvenFunction wh = w;
    wh.coeffs()(0) += w.grid().h();
    return discrete_laplacian(harmonic_extension_modal(wh)).half_values().lpNorm<Eigen::Infinity>();
}

struct Diagnostics {
    double Q = 0.0;
    double bernoulli_residual = 0.0;
    double F_residual = 0.0;           // sup norm of (F1, F2) on the collocation grid
    double min_K2 = 0.0;
    double min_depth = 0.0;
    double max_curvature = 0.0;        // sup |kappa|
    double min_surface_speed = 0.0;
    double vorticity_Lp = 0.0;
    double amplitude = 0.0;            // max |w|
    double amplitude_norm = 0.0;       // l1 norm of the coefficients of w' plus max |w|
    bool self_intersecting = false;
    bool overhanging = false;
};

/// Sup norm of F over collocation values (w-part on the x-grid, phi-part on the strip grid).
inline double residual_norm(const std::pair<PeriodicEvenFunction, ModalField>& F) {
    return std::max(F.first.half_values().lpNorm<Eigen::Infinity>(), F.second.half_values().lpNorm<Eigen::Infinity>());
}

/// (int over one period of the strip of |gamma(phi + psi)|^p |grad V|^2)^{1/p}.
inline double vorticity_Lp(const Problem& p, const State& s, double pexp = 2.0) {
    require(pexp >= 1.0, "vorticity_Lp: p must be at least 1");
    const auto& g = s.grid();
    const auto flow = p.flow(s.lambda);
    const Eigen::MatrixXd grad2 = detail::grad_V_squared(s.w);
    const Eigen::MatrixXd stream = s.phi.half_values().rowwise() + flow->psi.transpose();
    const auto& tx = g.tables().trapezoid;
    double total = 0.0;
    for (int j = 0; j <= g.M(); ++j) {
        const double wy = (j == 0 || j == g.M()) ? 0.5 * g.dy() : g.dy();
        double row = 0.0;
        for (int i = 0; i <= g.N(); ++i)
            row += tx(i) * std::pow(std::abs(p.vorticity().gamma(stream(i, j))), pexp) * grad2(i, j);
        total += wy * row * g.L();
    }
    return std::pow(total, 1.0 / pexp);
}

inline Diagnostics diagnostics(const Problem& p, const State& s, double vorticity_p = 2.0) {
    Diagnostics d;
    const Evaluation e = evaluate(p, s);
    d.Q = e.Q;
    d.F_residual = std::max(e.F1.half_values().lpNorm<Eigen::Infinity>(), e.F2.half_values().lpNorm<Eigen::Infinity>());
    d.min_K2 = e.min_K2;
    d.bernoulli_residual = bernoulli_residual(p, s);
    d.max_curvature = curvature(s.w).half_values().lpNorm<Eigen::Infinity>();
    d.min_surface_speed = (top_dy(s.phi).half_values().array() + s.lambda).abs().minCoeff();
    d.vorticity_Lp = vorticity_Lp(p, s, vorticity_p);
    const Eigen::VectorXd wv = s.w.half_values();
    d.amplitude = wv.lpNorm<Eigen::Infinity>();
    double l1 = 0.0;
    for (int k = 1; k <= s.grid().N(); ++k) l1 += k * s.grid().nu() * std::abs(s.w.coeff(k));
    d.amplitude_norm = l1 + d.amplitude;
    const SurfaceGeometry geo = surface_geometry(s.w);
    d.min_depth = std::min(geo.min_depth, wv.minCoeff() + s.grid().h());
    d.self_intersecting = geo.self_intersecting;
    d.overhanging = geo.overhanging || e.vy.minCoeff() < 0.0;
    return d;
}

}  // namespace wavebif
