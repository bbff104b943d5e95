#pragma once

// Discretisation of the period-L circle and the reference strip (-h, 0).
//
// x: 2N equispaced collocation points x_i = i L / (2N) over one period. Even
//    functions are carried as cosine coefficients c_0..c_N, odd ones as sine
//    coefficients s_1..s_N; because of the symmetry, only the half grid
//    i = 0..N is needed for pointwise products (DCT-I pairs).
// y: M uniform intervals, y_j = -h + j h / M, j = 0..M (j = 0 is the bed,
//    j = M the surface).

#include <cmath>
#include <memory>
#include <numbers>

#include <Eigen/Dense>

#include "wavebif/error.hpp"

namespace wavebif {

namespace detail {

/// sinh(x (y + h)) / sinh(x h) for y in [-h, 0], without overflow for large x h.
inline double sinh_ratio(double x, double y, double h) {
    if (x == 0.0) return (y + h) / h;
    return std::exp(x * y) * (-std::expm1(-2.0 * x * (y + h))) / (-std::expm1(-2.0 * x * h));
}

/// cosh(x (y + h)) / sinh(x h).
inline double cosh_sinh_ratio(double x, double y, double h) {
    return std::exp(x * y) * (1.0 + std::exp(-2.0 * x * (y + h))) / (-std::expm1(-2.0 * x * h));
}

inline double coth(double z) {
    return (1.0 + std::exp(-2.0 * z)) / (-std::expm1(-2.0 * z));
}

struct SpectralTables {
    Eigen::MatrixXd cos_synthesis;  // (N+1) points x (N+1) modes, half grid
    Eigen::MatrixXd sin_synthesis;  // (N+1) points x (N+1) modes, column 0 unused (zero)
    Eigen::MatrixXd cos_analysis;   // (N+1) modes x (N+1) points, inverse DCT-I
    Eigen::MatrixXd sin_analysis;   // (N+1) modes x (N+1) points, inverse DST-I; rows 0 and N are zero
    Eigen::VectorXd trapezoid;      // half-grid weights; dot(trapezoid, f) == period mean
    Eigen::MatrixXd full_cos;       // 2N points x (N+1) modes
    Eigen::MatrixXd full_sin;       // 2N points x (N+1) modes
    Eigen::VectorXd coth_k;         // coth(k nu h), entry 0 unused
    Eigen::MatrixXd sinh_ratio;     // (N+1) x (M+1): sinh(k nu (y_j+h)) / sinh(k nu h); row 0 = (y+h)/h
    Eigen::MatrixXd cosh_ratio;     // (N+1) x (M+1): cosh(k nu (y_j+h)) / sinh(k nu h); row 0 unused
};

}  // namespace detail

class GridSpec {
public:
    GridSpec(double L, double h, int N, int M) : L_(L), h_(h), N_(N), M_(M) {
        require(std::isfinite(L) && L > 0.0, "grid: period L must be positive");
        require(std::isfinite(h) && h > 0.0, "grid: depth h must be positive");
        require(N >= 4, "grid: N must be at least 4");
        require(M >= 8, "grid: M must be at least 8");
        tables_ = build_tables();
    }

    double L() const { return L_; }
    double h() const { return h_; }
    int N() const { return N_; }
    int M() const { return M_; }
    double nu() const { return 2.0 * std::numbers::pi / L_; }
    double dy() const { return h_ / M_; }
    double y(int j) const { return -h_ + j * dy(); }
    double x(int i) const { return i * L_ / (2.0 * N_); }
    int num_points() const { return 2 * N_; }

    const detail::SpectralTables& tables() const { return *tables_; }

    /// Same discretisation with the y-resolution multiplied by `factor`.
    GridSpec refined_y(int factor) const { return GridSpec(L_, h_, N_, M_ * factor); }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.L_ == b.L_ && a.h_ == b.h_ && a.N_ == b.N_ && a.M_ == b.M_;
    }

private:
    std::shared_ptr<const detail::SpectralTables> build_tables() const {
        auto t = std::make_shared<detail::SpectralTables>();
        const int n = N_;
        const double pi = std::numbers::pi;
        t->cos_synthesis.resize(n + 1, n + 1);
        t->sin_synthesis.resize(n + 1, n + 1);
        t->cos_analysis.resize(n + 1, n + 1);
        for (int i = 0; i <= n; ++i) {
            for (int k = 0; k <= n; ++k) {
                // Exact values at the symmetric nodes keep even/odd structure clean.
                const long ik = static_cast<long>(i) * k % (2 * n);
                t->cos_synthesis(i, k) = std::cos(pi * static_cast<double>(ik) / n);
                t->sin_synthesis(i, k) = (ik % n == 0) ? 0.0 : std::sin(pi * static_cast<double>(ik) / n);
            }
        }
        t->trapezoid = Eigen::VectorXd::Constant(n + 1, 1.0 / n);
        t->trapezoid(0) *= 0.5;
        t->trapezoid(n) *= 0.5;
        for (int k = 0; k <= n; ++k) {
            const double scale = (k == 0 || k == n) ? 1.0 : 2.0;
            for (int i = 0; i <= n; ++i) {
                t->cos_analysis(k, i) = scale * t->trapezoid(i) * t->cos_synthesis(i, k);
            }
        }
        t->sin_analysis = 2.0 * (t->sin_synthesis.array().colwise() * t->trapezoid.array()).matrix().transpose();
        t->full_cos.resize(2 * n, n + 1);
        t->full_sin.resize(2 * n, n + 1);
        for (int i = 0; i < 2 * n; ++i) {
            for (int k = 0; k <= n; ++k) {
                const long ik = static_cast<long>(i) * k % (2 * n);
                t->full_cos(i, k) = std::cos(pi * static_cast<double>(ik) / n);
                t->full_sin(i, k) = (ik % n == 0) ? 0.0 : std::sin(pi * static_cast<double>(ik) / n);
            }
        }
        t->coth_k.resize(n + 1);
        t->coth_k(0) = 0.0;
        t->sinh_ratio.resize(n + 1, M_ + 1);
        t->cosh_ratio.resize(n + 1, M_ + 1);
        for (int k = 0; k <= n; ++k) {
            const double kn = k * nu();
            if (k > 0) t->coth_k(k) = detail::coth(kn * h_);
            for (int j = 0; j <= M_; ++j) {
                t->sinh_ratio(k, j) = detail::sinh_ratio(kn, y(j), h_);
                t->cosh_ratio(k, j) = k > 0 ? detail::cosh_sinh_ratio(kn, y(j), h_) : 0.0;
            }
        }
        return t;
    }

    double L_;
    double h_;
    int N_;
    int M_;
    std::shared_ptr<const detail::SpectralTables> tables_;
};

}  // namespace wavebif
