#pragma once

// Derivatives of F at trivial states, the good unknown, kernel vectors and finite-difference Jacobians.
//
// Packed coordinates: w cosine modes k = 1..N first (index k - 1), then phi cosine modes k = 0..N on the
// interior levels j = 1..M-1, mode-major (index N + k (M - 1) + j - 1). Residuals use the same layout.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "wavebif/dispersion.hpp"
#include "wavebif/error.hpp"
#include "wavebif/operator.hpp"

namespace wavebif {

class PackedLayout {
public:
    explicit PackedLayout(const GridSpec& g) : N_(g.N()), M_(g.M()) {}

    int size() const { return N_ + (N_ + 1) * (M_ - 1); }
    int w_index(int k) const { return k - 1; }
    int phi_index(int k, int j) const { return N_ + k * (M_ - 1) + j - 1; }
    /// Indices of the mode-k block: (w_k, phi_{k,1..M-1}) for k >= 1, phi_{0,1..M-1} for k = 0.
    std::vector<int> block_indices(int k) const {
        std::vector<int> idx;
        if (k > 0) idx.push_back(w_index(k));
        for (int j = 1; j < M_; ++j) idx.push_back(phi_index(k, j));
        return idx;
    }

    Eigen::VectorXd pack(const PeriodicEvenFunction& w, const ModalField& phi) const {
        Eigen::VectorXd v(size());
        v.head(N_) = w.coeffs().tail(N_);
        for (int k = 0; k <= N_; ++k) v.segment(phi_index(k, 1), M_ - 1) = phi.a.row(k).segment(1, M_ - 1).transpose();
        return v;
    }
    Eigen::VectorXd pack(const State& s) const { return pack(s.w, s.phi); }

    std::pair<PeriodicEvenFunction, ModalField> unpack(const GridSpec& g, const Eigen::VectorXd& v) const {
        require(v.size() == size(), "packed vector: size mismatch");
        PeriodicEvenFunction w(g);
        w.coeffs().tail(N_) = v.head(N_);
        ModalField phi(g);
        for (int k = 0; k <= N_; ++k) phi.a.row(k).segment(1, M_ - 1) = v.segment(phi_index(k, 1), M_ - 1).transpose();
        return {std::move(w), std::move(phi)};
    }
    State unpack_state(const GridSpec& g, double lambda, const Eigen::VectorXd& v) const {
        auto [w, phi] = unpack(g, v);
        return State(lambda, std::move(w), std::move(phi));
    }

private:
    int N_;
    int M_;
};

/// Direction (dw, dphi, dlambda) at a state.
struct TangentVector {
    PeriodicEvenFunction dw;
    ModalField dphi;
    double dlambda = 0.0;

    explicit TangentVector(const GridSpec& g) : dw(g), dphi(g) {}
    TangentVector(PeriodicEvenFunction w, ModalField phi, double lam = 0.0)
        : dw(std::move(w)), dphi(std::move(phi)), dlambda(lam) {}
};

struct KernelElement {
    int k = 0;
    ModalField theta;           // beta(y) cos(k nu x) with beta(0) = 1
    TangentVector predictor;    // T(lambda0) theta
};

/// F at `s` in packed coordinates.
inline Eigen::VectorXd F_packed(const Problem& p, const State& s) {
    const auto e = evaluate(p, s);
    return PackedLayout(p.grid()).pack(e.F1, e.F2);
}

namespace detail {

/// Solves u'' - (k nu)^2 u = r on the interior levels with zero end values (three-point stencil).
inline Eigen::VectorXd mode_poisson(const GridSpec& g, int k, const Eigen::VectorXd& r) {
    const int m = g.M() - 1;
    const double inv = 1.0 / (g.dy() * g.dy());
    const double diag = -2.0 * inv - std::pow(k * g.nu(), 2);
    Eigen::VectorXd cp(m), dp(m), u(m);
    double denom = diag;
    cp(0) = inv / denom;
    dp(0) = r(0) / denom;
    for (int j = 1; j < m; ++j) {
        denom = diag - inv * cp(j - 1);
        cp(j) = inv / denom;
        dp(j) = (r(j) - inv * dp(j - 1)) / denom;
    }
    u(m - 1) = dp(m - 1);
    for (int j = m - 2; j >= 0; --j) u(j) = dp(j) - cp(j) * u(j + 1);
    return u;
}

/// Weights of the one-sided top derivative on the interior values (the top value itself is zero).
inline Eigen::RowVectorXd top_dy_weights(const GridSpec& g) {
    Eigen::RowVectorXd t = Eigen::RowVectorXd::Zero(g.M() - 1);
    t(g.M() - 2) = -4.0 / (2.0 * g.dy());
    t(g.M() - 3) += 1.0 / (2.0 * g.dy());
    return t;
}

}  // namespace detail

/// Block of the discrete trivial Jacobian F'(lambda, 0, 0) acting on mode k (see PackedLayout::block_indices).
inline Eigen::MatrixXd trivial_jacobian_block(const Problem& p, double lambda, int k) {
    const auto& g = p.grid();
    const int m = g.M() - 1;
    const auto flow = p.flow(lambda);
    const auto& vort = p.vorticity();
    Eigen::VectorXd gam(m), gamp(m);
    for (int j = 1; j < g.M(); ++j) {
        gam(j - 1) = vort.gamma(flow->psi(j));
        gamp(j - 1) = vort.gamma_prime(flow->psi(j));
    }
    Eigen::MatrixXd Aphi = Eigen::MatrixXd::Zero(m, m);
    if (gamp.cwiseAbs().maxCoeff() > 0.0) {
        for (int c = 0; c < m; ++c) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
            r(c) = -gamp(c);
            Aphi.col(c) = detail::mode_poisson(g, k, r);
        }
    }
    const Eigen::MatrixXd D = Eigen::MatrixXd::Identity(m, m) - Aphi;
    if (k == 0) return D;
    const double kn = k * g.nu();
    Eigen::VectorXd r(m);
    for (int j = 1; j < g.M(); ++j) r(j - 1) = -2.0 * gam(j - 1) * kn * g.tables().cosh_ratio(k, j);
    const Eigen::VectorXd aw = detail::mode_poisson(g, k, r);
    const Eigen::RowVectorXd top = detail::top_dy_weights(g);
    const double c = 1.0 / (p.sigma() * kn * kn);
    Eigen::MatrixXd J(m + 1, m + 1);
    // C dw' has no Nyquist component (see PeriodicEvenFunction::derivative).
    const double cdw = k == g.N() ? 0.0 : kn * g.tables().coth_k(k);
    J(0, 0) = 1.0 + c * (lambda * top.dot(aw) - lambda * lambda * cdw + p.g());
    J.block(0, 1, 1, m) = c * lambda * top * Aphi;
    J.block(1, 0, m, 1) = -aw;
    J.block(1, 1, m, m) = D;
    return J;
}

/// Dense trivial Jacobian in packed coordinates (small grids only).
inline Eigen::MatrixXd trivial_jacobian_dense(const Problem& p, double lambda) {
    const PackedLayout lay(p.grid());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(lay.size(), lay.size());
    for (int k = 0; k <= p.grid().N(); ++k) {
        const auto idx = lay.block_indices(k);
        const Eigen::MatrixXd B = trivial_jacobian_block(p, lambda, k);
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) J(idx[a], idx[b]) = B(a, b);
    }
    return J;
}

/// Applies F'(lambda, 0, 0) through the displayed formulas:
///   F_w dw = (dw - sigma^{-1} d_x^{-2}(lambda P S d_y A_w - lambda^2 C dw' + g dw), -A_w),
///   F_phi dphi = (-sigma^{-1} lambda d_x^{-2}(P S d_y A_phi), dphi - A_phi),
/// with Lap A_w = -2 gamma(psi) d_y V[dw] and Lap A_phi = -gamma'(psi) dphi, both zero on the boundary.
inline TangentVector trivial_jacobian_apply(const Problem& p, double lambda, const TangentVector& v) {
    const auto& g = p.grid();
    const auto flow = p.flow(lambda);
    const auto& vort = p.vorticity();
    ModalField rhs_w = harmonic_extension_dy_modal(v.dw);
    ModalField rhs_phi = v.dphi;
    for (int j = 0; j <= g.M(); ++j) {
        rhs_w.a.col(j) *= -2.0 * vort.gamma(flow->psi(j));
        rhs_phi.a.col(j) *= -vort.gamma_prime(flow->psi(j));
    }
    const ModalField A = poisson_dirichlet(rhs_w) + poisson_dirichlet(rhs_phi);
    PeriodicEvenFunction inner = lambda * top_dy(A) - lambda * lambda * hilbert_strip_odd(v.dw.derivative()) + p.g() * v.dw;
    inner.coeffs()(0) = 0.0;
    TangentVector out(g);
    out.dw = v.dw - (1.0 / p.sigma()) * antiderivative2(inner);
    out.dphi = v.dphi - A;
    out.dphi.a.col(0).setZero();
    out.dphi.a.col(g.M()).setZero();
    return out;
}

/// T(lambda) theta = (-S theta / lambda, theta - (psi_y / lambda) V[S theta]).
inline TangentVector good_unknown(const Problem& p, double lambda, const ModalField& theta) {
    require(lambda != 0.0, "good_unknown: lambda must be nonzero");
    const auto& g = p.grid();
    const auto flow = p.flow(lambda);
    const PeriodicEvenFunction top = trace(theta, Level::top);
    require(top.is_zero_mean(1e-12), "good_unknown: the top trace of theta must have zero mean");
    ModalField V = harmonic_extension_modal(top);
    TangentVector out(g);
    out.dw = (-1.0 / lambda) * top;
    out.dw.coeffs()(0) = 0.0;
    out.dphi = theta;
    for (int j = 0; j <= g.M(); ++j) out.dphi.a.col(j) -= (flow->psi_y(j) / lambda) * V.a.col(j);
    out.dphi.a.col(0).setZero();
    out.dphi.a.col(g.M()).setZero();
    return out;
}

/// [T(lambda)]^{-1}(dw, dphi) = dphi - psi_y V[dw].
inline ModalField good_unknown_inverse(const Problem& p, double lambda, const TangentVector& v) {
    const auto flow = p.flow(lambda);
    ModalField V = harmonic_extension_modal(v.dw);
    ModalField theta = v.dphi;
    for (int j = 0; j <= p.grid().M(); ++j) theta.a.col(j) -= flow->psi_y(j) * V.a.col(j);
    return theta;
}

/// L(lambda) theta:
///   L1 = -S theta / lambda - sigma^{-1} d_x^{-2}(lambda P S d_y(A_phi theta + V[S theta]) + (gamma(0) - g / lambda) S theta),
///   L2 = theta - (A_phi theta + V[S theta]).
inline std::pair<PeriodicEvenFunction, ModalField> L_apply(const Problem& p, double lambda, const ModalField& theta) {
    require(lambda != 0.0, "L_apply: lambda must be nonzero");
    const auto& g = p.grid();
    const auto flow = p.flow(lambda);
    const auto& vort = p.vorticity();
    const PeriodicEvenFunction top = trace(theta, Level::top);
    ModalField rhs = theta;
    for (int j = 0; j <= g.M(); ++j) rhs.a.col(j) *= -vort.gamma_prime(flow->psi(j));
    const ModalField Aphi = poisson_dirichlet(rhs);
    const ModalField V = harmonic_extension_modal(top);
    const ModalField U = Aphi + V;
    // S d_y V[S theta] is taken from the exact modal profile.
    const PeriodicEvenFunction dyV = harmonic_extension_dy_modal(top).level(g.M());
    PeriodicEvenFunction inner = lambda * (top_dy(Aphi) + dyV) + (vort.gamma(0.0) - p.g() / lambda) * top;
    inner.coeffs()(0) = 0.0;
    PeriodicEvenFunction L1 = (-1.0 / lambda) * top - (1.0 / p.sigma()) * antiderivative2(inner);
    L1.coeffs()(0) = 0.0;
    ModalField L2 = theta - U;
    L2.a.col(0).setZero();
    L2.a.col(g.M()).setZero();
    return {std::move(L1), std::move(L2)};
}

/// theta = beta^{-(k nu)^2, lambda}(y) cos(k nu x) on the grid levels, normalised by beta(0) = 1.
inline ModalField beta_mode(const Problem& p, double lambda, int k) {
    const auto& g = p.grid();
    const auto flow = p.flow(lambda);
    const BetaProfile b = beta_profile(-std::pow(k * g.nu(), 2), *flow, p.ode_tol());
    if (b.in_dirichlet_spectrum) throw InvalidInput("beta_mode: -(k nu)^2 lies in the Dirichlet spectrum");
    ModalField theta(g);
    theta.a.row(k) = b.beta.transpose();
    return theta;
}

/// Kernel vector and branch predictor at a simple bifurcation point.
inline KernelElement kernel_element(const Problem& p, const BifurcationPoint& bp) {
    if (bp.kernel_dim != 1)
        throw InvalidInput("kernel_element: kernel dimension " + std::to_string(bp.kernel_dim) +
                           " (re-pose on the period L / k0 to isolate a simple kernel)");
    const auto& g = p.grid();
    require(bp.k0 >= 1 && bp.k0 <= g.N(), "kernel_element: k0 outside the resolved modes");
    ModalField theta = beta_mode(p, bp.lambda0, bp.k0);
    TangentVector pred = good_unknown(p, bp.lambda0, theta);
    return KernelElement{bp.k0, std::move(theta), std::move(pred)};
}

/// Packed F'(lambda, 0, 0) applied to packed v, via trivial_jacobian_apply.
inline Eigen::VectorXd trivial_jacobian_apply_packed(const Problem& p, double lambda, const Eigen::VectorXd& v) {
    const PackedLayout lay(p.grid());
    auto [w, phi] = lay.unpack(p.grid(), v);
    const TangentVector out = trivial_jacobian_apply(p, lambda, TangentVector(std::move(w), std::move(phi)));
    return lay.pack(out.dw, out.dphi);
}

enum class Stencil { forward, central };

/// Column `i` of the finite-difference Jacobian of packed F at `s`, step eps_scale (1 + |x_i|).
inline Eigen::VectorXd fd_jacobian_column(const Problem& p, const State& s, int i, Stencil stencil, double eps_scale,
                                          const Eigen::VectorXd* f0 = nullptr) {
    const PackedLayout lay(p.grid());
    const Eigen::VectorXd x = lay.pack(s);
    const double h = eps_scale * (1.0 + std::abs(x(i)));
    Eigen::VectorXd xp = x;
    xp(i) += h;
    const Eigen::VectorXd fp = F_packed(p, lay.unpack_state(p.grid(), s.lambda, xp));
    Eigen::VectorXd col;
    if (stencil == Stencil::forward) {
        col = (fp - (f0 ? *f0 : F_packed(p, s))) / h;
    } else {
        Eigen::VectorXd xm = x;
        xm(i) -= h;
        col = (fp - F_packed(p, lay.unpack_state(p.grid(), s.lambda, xm))) / (2.0 * h);
    }
    if (!col.allFinite()) throw NumericalFailure("fd_jacobian: non-finite entry in column " + std::to_string(i));
    return col;
}

inline double default_fd_eps(Stencil stencil) { return stencil == Stencil::forward ? 1e-7 : 1e-5; }

/// Runs body(i) for i in [0, n) on all hardware threads.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    const int nt = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
    if (nt == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += nt) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Dense finite-difference Jacobian of packed F at `s`, columns computed in parallel.
inline Eigen::MatrixXd fd_jacobian(const Problem& p, const State& s, Stencil stencil = Stencil::central,
                                   double eps_scale = -1.0) {
    if (eps_scale <= 0.0) eps_scale = default_fd_eps(stencil);
    const PackedLayout lay(p.grid());
    const Eigen::VectorXd f0 = F_packed(p, s);
    Eigen::MatrixXd J(lay.size(), lay.size());
    parallel_for(lay.size(), [&](int i) { J.col(i) = fd_jacobian_column(p, s, i, stencil, eps_scale, &f0); });
    return J;
}

/// Central-difference derivative of packed F in lambda.
inline Eigen::VectorXd F_lambda(const Problem& p, const State& s, double eps_scale = 1e-6) {
    const double h = eps_scale * (1.0 + std::abs(s.lambda));
    State sp = s, sm = s;
    sp.lambda += h;
    sm.lambda -= h;
    return (F_packed(p, sp) - F_packed(p, sm)) / (2.0 * h);
}

/// Discrete counterpart of d(-(k nu)^2, lambda): the Schur complement of the mode-k trivial block on
/// the w_k entry, scaled by -sigma (k nu)^2 / lambda^2. Its zeros are exactly where the block is singular.
inline double discrete_dispersion(const Problem& p, double lambda, int k) {
    require(k >= 1 && k <= p.grid().N(), "discrete_dispersion: k outside the resolved modes");
    const Eigen::MatrixXd J = trivial_jacobian_block(p, lambda, k);
    const int m = static_cast<int>(J.rows()) - 1;
    const Eigen::VectorXd z = J.block(1, 1, m, m).partialPivLu().solve(J.block(1, 0, m, 1));
    const double schur = J(0, 0) - (J.block(0, 1, 1, m) * z)(0);
    const double kn = k * p.grid().nu();
    return -schur * p.sigma() * kn * kn / (lambda * lambda);
}

/// Root of discrete_dispersion near `lambda0`, searched in lambda0 (1 -+ rel_window).
inline double refine_bifurcation_lambda(const Problem& p, int k, double lambda0, double rel_window = 1e-2) {
    auto f = [&](double l) { return discrete_dispersion(p, l, k); };
    double a = lambda0 * (1.0 - rel_window), b = lambda0 * (1.0 + rel_window);
    if (a > b) std::swap(a, b);
    const double fa = f(a), fb = f(b);
    if (!(fa * fb < 0.0)) throw NumericalFailure("refine_bifurcation_lambda: no sign change near lambda0");
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (lo + hi);
}

/// All singular values of the packed trivial Jacobian, gathered from the mode blocks (descending).
inline Eigen::VectorXd trivial_singular_values(const Problem& p, double lambda) {
    std::vector<double> sv;
    for (int k = 0; k <= p.grid().N(); ++k) {
        const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(trivial_jacobian_block(p, lambda, k)).singularValues();
        sv.insert(sv.end(), s.data(), s.data() + s.size());
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return Eigen::Map<Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
}

/// Number of singular values of the trivial Jacobian below rel_threshold times the largest one.
inline int null_space_dimension(const Problem& p, double lambda, double rel_threshold = 1e-6) {
    const Eigen::VectorXd s = trivial_singular_values(p, lambda);
    return static_cast<int>((s.array() < rel_threshold * s(0)).count());
}

}  // namespace wavebif
