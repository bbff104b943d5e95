#pragma once

// Fourier toolkit on the period-L circle and on the strip (-h, 0).

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "wavebif/error.hpp"
#include "wavebif/grid.hpp"

namespace wavebif {

class PeriodicOddFunction;

/// Even L-periodic function f(x) = sum_k c_k cos(k nu x), k = 0..N.
class PeriodicEvenFunction {
public:
    explicit PeriodicEvenFunction(GridSpec grid)
        : grid_(std::move(grid)), c_(Eigen::VectorXd::Zero(grid_.N() + 1)) {}
    PeriodicEvenFunction(GridSpec grid, Eigen::VectorXd coeffs) : grid_(std::move(grid)), c_(std::move(coeffs)) {
        require(c_.size() == grid_.N() + 1, "even function: expected N+1 cosine coefficients");
        require(c_.allFinite(), "even function: non-finite coefficient");
    }

    static PeriodicEvenFunction constant(const GridSpec& grid, double value) {
        PeriodicEvenFunction f(grid);
        f.c_(0) = value;
        return f;
    }
    static PeriodicEvenFunction mode(const GridSpec& grid, int k, double amplitude = 1.0) {
        require(k >= 0 && k <= grid.N(), "even function: mode index out of range");
        PeriodicEvenFunction f(grid);
        f.c_(k) = amplitude;
        return f;
    }
    /// Interpolates samples at the half-grid points x_0..x_N.
    static PeriodicEvenFunction from_half_values(const GridSpec& grid, const Eigen::VectorXd& values) {
        require(values.size() == grid.N() + 1, "even function: expected N+1 half-grid samples");
        return PeriodicEvenFunction(grid, grid.tables().cos_analysis * values);
    }

    const GridSpec& grid() const { return grid_; }
    const Eigen::VectorXd& coeffs() const { return c_; }
    Eigen::VectorXd& coeffs() { return c_; }
    double coeff(int k) const { return c_(k); }

    double mean() const { return c_(0); }
    bool is_zero_mean(double tol = 1e-12) const { return std::abs(c_(0)) <= tol * std::max(1.0, c_.lpNorm<Eigen::Infinity>()); }

    /// Samples at x_0..x_N.
    Eigen::VectorXd half_values() const { return grid_.tables().cos_synthesis * c_; }
    /// Samples at all 2N collocation points.
    Eigen::VectorXd full_values() const { return grid_.tables().full_cos * c_; }
    double operator()(double x) const {
        double s = 0.0;
        for (int k = 0; k <= grid_.N(); ++k) s += c_(k) * std::cos(k * grid_.nu() * x);
        return s;
    }

    PeriodicOddFunction derivative() const;
    PeriodicEvenFunction second_derivative() const {
        Eigen::VectorXd d(c_.size());
        for (int k = 0; k < c_.size(); ++k) d(k) = -std::pow(k * grid_.nu(), 2) * c_(k);
        return PeriodicEvenFunction(grid_, std::move(d));
    }

    PeriodicEvenFunction& operator+=(const PeriodicEvenFunction& o) { c_ += o.c_; return *this; }
    PeriodicEvenFunction& operator-=(const PeriodicEvenFunction& o) { c_ -= o.c_; return *this; }
    PeriodicEvenFunction& operator*=(double a) { c_ *= a; return *this; }
    friend PeriodicEvenFunction operator+(PeriodicEvenFunction a, const PeriodicEvenFunction& b) { return a += b; }
    friend PeriodicEvenFunction operator-(PeriodicEvenFunction a, const PeriodicEvenFunction& b) { return a -= b; }
    friend PeriodicEvenFunction operator*(double s, PeriodicEvenFunction a) { return a *= s; }

private:
    GridSpec grid_;
    Eigen::VectorXd c_;
};

/// Odd L-periodic function g(x) = sum_k s_k sin(k nu x), k = 1..N (entry 0 is kept at zero).
class PeriodicOddFunction {
public:
    explicit PeriodicOddFunction(GridSpec grid)
        : grid_(std::move(grid)), s_(Eigen::VectorXd::Zero(grid_.N() + 1)) {}
    PeriodicOddFunction(GridSpec grid, Eigen::VectorXd coeffs) : grid_(std::move(grid)), s_(std::move(coeffs)) {
        require(s_.size() == grid_.N() + 1, "odd function: expected N+1 sine coefficients");
        require(s_.allFinite(), "odd function: non-finite coefficient");
        s_(0) = 0.0;
    }

    static PeriodicOddFunction mode(const GridSpec& grid, int k, double amplitude = 1.0) {
        require(k >= 1 && k <= grid.N(), "odd function: mode index out of range");
        PeriodicOddFunction f(grid);
        f.s_(k) = amplitude;
        return f;
    }
    /// Interpolates samples at x_0..x_N. The Nyquist sine mode vanishes on the grid and is dropped.
    static PeriodicOddFunction from_half_values(const GridSpec& grid, const Eigen::VectorXd& values) {
        require(values.size() == grid.N() + 1, "odd function: expected N+1 half-grid samples");
        return PeriodicOddFunction(grid, grid.tables().sin_analysis * values);
    }

    const GridSpec& grid() const { return grid_; }
    const Eigen::VectorXd& coeffs() const { return s_; }
    Eigen::VectorXd& coeffs() { return s_; }
    double coeff(int k) const { return s_(k); }

    Eigen::VectorXd half_values() const { return grid_.tables().sin_synthesis * s_; }
    Eigen::VectorXd full_values() const { return grid_.tables().full_sin * s_; }
    double operator()(double x) const {
        double s = 0.0;
        for (int k = 1; k <= grid_.N(); ++k) s += s_(k) * std::sin(k * grid_.nu() * x);
        return s;
    }

    PeriodicEvenFunction derivative() const {
        Eigen::VectorXd d(s_.size());
        for (int k = 0; k < s_.size(); ++k) d(k) = k * grid_.nu() * s_(k);
        return PeriodicEvenFunction(grid_, std::move(d));
    }

    PeriodicOddFunction& operator+=(const PeriodicOddFunction& o) { s_ += o.s_; return *this; }
    PeriodicOddFunction& operator*=(double a) { s_ *= a; return *this; }
    friend PeriodicOddFunction operator+(PeriodicOddFunction a, const PeriodicOddFunction& b) { return a += b; }
    friend PeriodicOddFunction operator*(double s, PeriodicOddFunction a) { return a *= s; }

private:
    GridSpec grid_;
    Eigen::VectorXd s_;
};

/// The Nyquist sine mode vanishes on the grid and is dropped, which keeps the discrete
/// Hilbert transform skew-adjoint for the trapezoid mean.
inline PeriodicOddFunction PeriodicEvenFunction::derivative() const {
    Eigen::VectorXd d(c_.size());
    for (int k = 0; k < c_.size(); ++k) d(k) = -k * grid_.nu() * c_(k);
    d(grid_.N()) = 0.0;
    return PeriodicOddFunction(grid_, std::move(d));
}

/// Modal representation of an x-even strip field: row k holds the cos(k nu x)
/// coefficient on each y-level (columns j = 0..M).
struct ModalField {
    GridSpec grid;
    Eigen::MatrixXd a;

    explicit ModalField(GridSpec g) : grid(std::move(g)), a(Eigen::MatrixXd::Zero(grid.N() + 1, grid.M() + 1)) {}
    ModalField(GridSpec g, Eigen::MatrixXd coeffs) : grid(std::move(g)), a(std::move(coeffs)) {
        require(a.rows() == grid.N() + 1 && a.cols() == grid.M() + 1, "modal field: shape mismatch");
    }

    /// Half-grid samples, (N+1) x (M+1).
    Eigen::MatrixXd half_values() const { return grid.tables().cos_synthesis * a; }
    static ModalField from_half_values(const GridSpec& g, const Eigen::MatrixXd& v) {
        return ModalField(g, g.tables().cos_analysis * v);
    }
    PeriodicEvenFunction level(int j) const { return PeriodicEvenFunction(grid, a.col(j)); }

    ModalField& operator+=(const ModalField& o) { a += o.a; return *this; }
    ModalField& operator-=(const ModalField& o) { a -= o.a; return *this; }
    ModalField& operator*=(double s) { a *= s; return *this; }
    friend ModalField operator+(ModalField x, const ModalField& y) { return x += y; }
    friend ModalField operator-(ModalField x, const ModalField& y) { return x -= y; }
    friend ModalField operator*(double s, ModalField x) { return x *= s; }
};

/// Field on the strip sampled at all 2N x-collocation points and M+1 y-levels.
class StripField {
public:
    explicit StripField(GridSpec grid)
        : grid_(std::move(grid)), v_(Eigen::MatrixXd::Zero(grid_.num_points(), grid_.M() + 1)) {}
    StripField(GridSpec grid, Eigen::MatrixXd values) : grid_(std::move(grid)), v_(std::move(values)) {
        require(v_.rows() == grid_.num_points() && v_.cols() == grid_.M() + 1, "strip field: shape mismatch");
        require(v_.allFinite(), "strip field: non-finite value");
    }
    explicit StripField(const ModalField& m) : grid_(m.grid), v_(m.grid.tables().full_cos * m.a) {}

    const GridSpec& grid() const { return grid_; }
    const Eigen::MatrixXd& values() const { return v_; }
    double operator()(int i, int j) const { return v_(i, j); }

    /// Even projection onto cosine modes; uses the half grid after symmetrisation.
    ModalField modal() const {
        const int n = grid_.N();
        Eigen::MatrixXd half(n + 1, grid_.M() + 1);
        half.row(0) = v_.row(0);
        half.row(n) = v_.row(n);
        for (int i = 1; i < n; ++i) half.row(i) = 0.5 * (v_.row(i) + v_.row(2 * n - i));
        return ModalField::from_half_values(grid_, half);
    }

    /// Largest |f(x_i) - f(x_{2N-i})|, which vanishes for even fields.
    double evenness_defect() const {
        const int n = grid_.N();
        double d = 0.0;
        for (int i = 1; i < n; ++i) d = std::max(d, (v_.row(i) - v_.row(2 * n - i)).lpNorm<Eigen::Infinity>());
        return d;
    }

private:
    GridSpec grid_;
    Eigen::MatrixXd v_;
};

enum class Level { top, bottom };

inline double mean(const PeriodicEvenFunction& f) { return f.mean(); }

inline PeriodicEvenFunction trace(const ModalField& field, Level level) {
    return field.level(level == Level::top ? field.grid.M() : 0);
}
inline PeriodicEvenFunction trace(const StripField& field, Level level) {
    const int j = level == Level::top ? field.grid().M() : 0;
    return PeriodicEvenFunction::from_half_values(field.grid(), field.values().col(j).head(field.grid().N() + 1));
}

namespace detail {

inline void require_zero_mean(const PeriodicEvenFunction& f, const char* who) {
    if (!f.is_zero_mean(1e-10)) throw InvalidInput(std::string(who) + ": input must have zero mean");
}

}  // namespace detail

/// Hilbert transform on the strip applied to an even function: cos(k nu x) -> coth(k nu h) sin(k nu x).
inline PeriodicOddFunction hilbert_strip(const PeriodicEvenFunction& f) {
    detail::require_zero_mean(f, "hilbert_strip");
    const auto& coth = f.grid().tables().coth_k;
    Eigen::VectorXd s = coth.cwiseProduct(f.coeffs());
    s(0) = 0.0;
    s(f.grid().N()) = 0.0;  // invisible on the grid
    return PeriodicOddFunction(f.grid(), std::move(s));
}

/// Hilbert transform on the strip applied to an odd function: sin(k nu x) -> -coth(k nu h) cos(k nu x).
inline PeriodicEvenFunction hilbert_strip_odd(const PeriodicOddFunction& g) {
    const auto& coth = g.grid().tables().coth_k;
    Eigen::VectorXd c = -coth.cwiseProduct(g.coeffs());
    c(0) = 0.0;
    return PeriodicEvenFunction(g.grid(), std::move(c));
}

/// Inverse of d^2/dx^2 on zero-mean functions: symbol -1/(k nu)^2.
inline PeriodicEvenFunction antiderivative2(const PeriodicEvenFunction& f) {
    detail::require_zero_mean(f, "antiderivative2");
    Eigen::VectorXd c(f.coeffs().size());
    c(0) = 0.0;
    for (int k = 1; k < c.size(); ++k) c(k) = -f.coeff(k) / std::pow(k * f.grid().nu(), 2);
    return PeriodicEvenFunction(f.grid(), std::move(c));
}

/// Harmonic function on the strip equal to v at y = 0 and to 0 at y = -h, evaluated mode by mode.
inline ModalField harmonic_extension_modal(const PeriodicEvenFunction& v) {
    const auto& g = v.grid();
    return ModalField(g, v.coeffs().asDiagonal() * g.tables().sinh_ratio);
}
inline StripField harmonic_extension(const PeriodicEvenFunction& v) { return StripField(harmonic_extension_modal(v)); }

/// y-derivative of harmonic_extension(v), computed from the exact modal profiles.
inline ModalField harmonic_extension_dy_modal(const PeriodicEvenFunction& v) {
    const auto& g = v.grid();
    Eigen::MatrixXd d(g.N() + 1, g.M() + 1);
    d.row(0).setConstant(v.coeff(0) / g.h());
    for (int k = 1; k <= g.N(); ++k) d.row(k) = (k * g.nu() * v.coeff(k)) * g.tables().cosh_ratio.row(k);
    return ModalField(g, std::move(d));
}

/// Surface gradient of V[w + h]: the pair (1 + C w', w').
inline std::pair<PeriodicEvenFunction, PeriodicOddFunction> surface_gradient_V(const PeriodicEvenFunction& w) {
    detail::require_zero_mean(w, "surface_gradient_V");
    PeriodicOddFunction wp = w.derivative();
    PeriodicEvenFunction vy = hilbert_strip_odd(wp);
    vy.coeffs()(0) += 1.0;
    return {std::move(vy), std::move(wp)};
}

/// Solves u_yy - (k nu)^2 u = r for every cosine mode with u = 0 at y = -h and y = 0,
/// using second-order central differences. Boundary columns of `rhs` are ignored.
inline ModalField poisson_dirichlet(const ModalField& rhs) {
    const auto& g = rhs.grid;
    const int M = g.M();
    const double inv_dy2 = 1.0 / (g.dy() * g.dy());
    ModalField u(g);
    Eigen::VectorXd cprime(M);
    Eigen::VectorXd dprime(M);
    for (int k = 0; k <= g.N(); ++k) {
        const double diag = -2.0 * inv_dy2 - std::pow(k * g.nu(), 2);
        // Thomas algorithm on the interior levels 1..M-1 (sub- and super-diagonal inv_dy2).
        double denom = diag;
        cprime(1) = inv_dy2 / denom;
        dprime(1) = rhs.a(k, 1) / denom;
        for (int j = 2; j <= M - 1; ++j) {
            denom = diag - inv_dy2 * cprime(j - 1);
            if (!(std::abs(denom) > 0.0)) throw NumericalFailure("poisson_dirichlet: singular tridiagonal system");
            cprime(j) = inv_dy2 / denom;
            dprime(j) = (rhs.a(k, j) - inv_dy2 * dprime(j - 1)) / denom;
        }
        u.a(k, M - 1) = dprime(M - 1);
        for (int j = M - 2; j >= 1; --j) u.a(k, j) = dprime(j) - cprime(j) * u.a(k, j + 1);
    }
    return u;
}
inline StripField poisson_dirichlet(const StripField& rhs) { return StripField(poisson_dirichlet(rhs.modal())); }

/// Discrete Laplacian (spectral in x, 3-point in y) on interior levels; boundary columns are zero.
inline ModalField discrete_laplacian(const ModalField& f) {
    const auto& g = f.grid;
    const double inv_dy2 = 1.0 / (g.dy() * g.dy());
    ModalField out(g);
    for (int k = 0; k <= g.N(); ++k) {
        const double k2 = std::pow(k * g.nu(), 2);
        for (int j = 1; j < g.M(); ++j) {
            out.a(k, j) = (f.a(k, j + 1) - 2.0 * f.a(k, j) + f.a(k, j - 1)) * inv_dy2 - k2 * f.a(k, j);
        }
    }
    return out;
}

/// One-sided second-order y-derivative at the top level, per mode.
inline PeriodicEvenFunction top_dy(const ModalField& f) {
    const auto& g = f.grid;
    const int M = g.M();
    Eigen::VectorXd d = (3.0 * f.a.col(M) - 4.0 * f.a.col(M - 1) + f.a.col(M - 2)) / (2.0 * g.dy());
    return PeriodicEvenFunction(g, std::move(d));
}

/// Central second-order y-derivative on interior levels, one-sided second-order at both ends.
inline ModalField dy(const ModalField& f) {
    const auto& g = f.grid;
    const int M = g.M();
    const double s = 1.0 / (2.0 * g.dy());
    ModalField out(g);
    out.a.col(0) = (-3.0 * f.a.col(0) + 4.0 * f.a.col(1) - f.a.col(2)) * s;
    for (int j = 1; j < M; ++j) out.a.col(j) = (f.a.col(j + 1) - f.a.col(j - 1)) * s;
    out.a.col(M) = (3.0 * f.a.col(M) - 4.0 * f.a.col(M - 1) + f.a.col(M - 2)) * s;
    return out;
}

/// Pointwise product of even functions, re-expanded on the collocation grid.
inline PeriodicEvenFunction product(const PeriodicEvenFunction& a, const PeriodicEvenFunction& b) {
    return PeriodicEvenFunction::from_half_values(a.grid(), a.half_values().cwiseProduct(b.half_values()));
}
inline PeriodicEvenFunction product(const PeriodicOddFunction& a, const PeriodicOddFunction& b) {
    return PeriodicEvenFunction::from_half_values(a.grid(), a.half_values().cwiseProduct(b.half_values()));
}

/// Mean of f1 g1 computed by trapezoid quadrature on the collocation grid.
inline double mean_of_product(const Eigen::VectorXd& half_f, const Eigen::VectorXd& half_g, const GridSpec& grid) {
    return grid.tables().trapezoid.dot(half_f.cwiseProduct(half_g));
}

}  // namespace wavebif
