#pragma once

// Newton correction, branch switching and pseudo-arclength continuation.
//
// Linear systems are solved by restarted GMRES with Jacobian-vector products from forward differences of F,
// right-preconditioned by the block LU of the trivial Jacobian at the current lambda. A bordering row and
// column (pin or arclength constraint) are kept in the preconditioner only on the k0 block.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavebif/dispersion.hpp"
#include "wavebif/error.hpp"
#include "wavebif/linearization.hpp"
#include "wavebif/operator.hpp"

namespace wavebif {

enum class Termination {
    max_steps,
    lambda_unbounded,
    amplitude_unbounded,
    vorticity_Lp_unbounded,
    returned_to_trivial,
    conformality_degeneracy,
    self_intersection,
    bed_contact,
    newton_failure,
};

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::max_steps: return "max_steps";
        case Termination::lambda_unbounded: return "lambda_unbounded";
        case Termination::amplitude_unbounded: return "amplitude_unbounded";
        case Termination::vorticity_Lp_unbounded: return "vorticity_Lp_unbounded";
        case Termination::returned_to_trivial: return "returned_to_trivial";
        case Termination::conformality_degeneracy: return "conformality_degeneracy";
        case Termination::self_intersection: return "self_intersection";
        case Termination::bed_contact: return "bed_contact";
        case Termination::newton_failure: return "newton_failure";
    }
    return "unknown";
}

inline Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::max_steps, Termination::lambda_unbounded, Termination::amplitude_unbounded,
                   Termination::vorticity_Lp_unbounded, Termination::returned_to_trivial,
                   Termination::conformality_degeneracy, Termination::self_intersection, Termination::bed_contact,
                   Termination::newton_failure})
        if (to_string(t) == s) return t;
    throw InvalidInput("unknown termination label '" + s + "'");
}

struct ContinuationConfig {
    double ds0 = 0.02;
    double ds_min = 1e-5;
    double ds_max = 0.2;
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    int max_steps = 40;
    double s0 = 1e-3;                    // amplitude parameter of the first point
    int direction = 1;                   // sign of s0
    double min_K2_stop = 1e-4;
    double min_depth_stop = -1.0;        // negative selects 1e-3 h
    double max_curvature_stop = std::numeric_limits<double>::infinity();
    double lambda_bound = 1e3;
    double amplitude_bound = 1e3;        // on Diagnostics::amplitude_norm
    double vorticity_Lp_bound = 1e8;
    double vorticity_p = 2.0;
    double trivial_return_amplitude = 1e-6;
    double trivial_departure_amplitude = 1e-3;
    bool polish = true;
    int gmres_restart = 60;
    int gmres_max_iter = 600;
    double lambda_weight = 1e-2;         // weight of lambda in the arclength norm

    double depth_stop(double h) const { return min_depth_stop < 0.0 ? 1e-3 * h : min_depth_stop; }

    void validate() const {
        require(ds_min > 0.0 && ds_min <= ds0 && ds0 <= ds_max, "continuation: need 0 < ds_min <= ds0 <= ds_max");
        require(newton_tol > 0.0 && newton_max_iter > 0, "continuation: invalid Newton settings");
        require(max_steps >= 0, "continuation: max_steps must be non-negative");
        require(s0 > 0.0, "continuation: s0 must be positive");
        require(direction == 1 || direction == -1, "continuation: direction must be +1 or -1");
        require(min_K2_stop >= 0.0, "continuation: min_K2_stop must be non-negative");
        require(gmres_restart > 0 && gmres_max_iter > 0, "continuation: invalid GMRES settings");
        require(lambda_weight > 0.0, "continuation: lambda_weight must be positive");
    }
};

/// Coordinates (packed state, lambda) with the weighted inner product used by the arclength constraint:
/// weight 1 on w coefficients, 1 / (M - 1) on phi entries and lambda_weight on lambda.
class ExtendedSpace {
public:
    explicit ExtendedSpace(const GridSpec& g, double lambda_weight = 1e-2) : grid_(g), layout_(g) {
        weights_ = Eigen::VectorXd::Ones(layout_.size() + 1);
        weights_.segment(g.N(), layout_.size() - g.N()).setConstant(1.0 / (g.M() - 1));
        weights_(layout_.size()) = lambda_weight;
    }
    int size() const { return layout_.size() + 1; }
    const PackedLayout& layout() const { return layout_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    Eigen::VectorXd pack(const State& s) const {
        Eigen::VectorXd z(size());
        z.head(layout_.size()) = layout_.pack(s);
        z(layout_.size()) = s.lambda;
        return z;
    }
    State unpack(const Eigen::VectorXd& z) const {
        return layout_.unpack_state(grid_, z(layout_.size()), z.head(layout_.size()));
    }
    double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return (weights_.array() * a.array() * b.array()).sum(); }
    double norm(const Eigen::VectorXd& a) const { return std::sqrt(dot(a, a)); }

private:
    GridSpec grid_;
    PackedLayout layout_;
    Eigen::VectorXd weights_;
};

/// Block LU of the trivial Jacobian, optionally bordered on one block by (col, row, corner).
class TrivialBlockPreconditioner {
public:
    TrivialBlockPreconditioner(const Problem& p, double lambda, int k_border = 0, const Eigen::VectorXd* col = nullptr,
                               const Eigen::VectorXd* row = nullptr, double corner = 0.0)
        : layout_(p.grid()), bordered_(col != nullptr), k_border_(k_border) {
        const int N = p.grid().N();
        for (int k = 0; k <= N; ++k) {
            const auto idx = layout_.block_indices(k);
            Eigen::MatrixXd B = trivial_jacobian_block(p, lambda, k);
            if (bordered_ && k == k_border_) {
                const int m = static_cast<int>(idx.size());
                Eigen::MatrixXd Bb = Eigen::MatrixXd::Zero(m + 1, m + 1);
                Bb.topLeftCorner(m, m) = B;
                for (int a = 0; a < m; ++a) {
                    Bb(a, m) = (*col)(idx[a]);
                    Bb(m, a) = (*row)(idx[a]);
                }
                Bb(m, m) = corner;
                B = std::move(Bb);
            }
            indices_.push_back(idx);
            lu_.emplace_back(B);
        }
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(r.size());
        for (std::size_t k = 0; k < lu_.size(); ++k) {
            const auto& idx = indices_[k];
            const bool b = bordered_ && static_cast<int>(k) == k_border_;
            Eigen::VectorXd rk(idx.size() + (b ? 1 : 0));
            for (std::size_t a = 0; a < idx.size(); ++a) rk(a) = r(idx[a]);
            if (b) rk(idx.size()) = r(r.size() - 1);
            const Eigen::VectorXd xk = lu_[k].solve(rk);
            for (std::size_t a = 0; a < idx.size(); ++a) x(idx[a]) = xk(a);
            if (b) x(r.size() - 1) = xk(idx.size());
        }
        return x;
    }

private:
    PackedLayout layout_;
    bool bordered_;
    int k_border_;
    std::vector<std::vector<int>> indices_;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

struct GmresResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Restarted right-preconditioned GMRES for A x = b.
template <class Apply, class Precond>
GmresResult gmres(const Apply& A, const Precond& Minv, const Eigen::VectorXd& b, double rtol, int restart, int max_iter) {
    GmresResult res;
    const int n = static_cast<int>(b.size());
    res.x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    Eigen::VectorXd r = b;
    while (res.iterations < max_iter) {
        const double beta = r.norm();
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= rtol) {
            res.converged = true;
            return res;
        }
        const int m = std::min(restart, max_iter - res.iterations);
        Eigen::MatrixXd V(n, m + 1), H = Eigen::MatrixXd::Zero(m + 1, m);
        Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m), gvec = Eigen::VectorXd::Zero(m + 1);
        V.col(0) = r / beta;
        gvec(0) = beta;
        int j = 0;
        for (; j < m; ++j) {
            Eigen::VectorXd w = A(Minv(V.col(j)));
            for (int i = 0; i <= j; ++i) {
                H(i, j) = w.dot(V.col(i));
                w -= H(i, j) * V.col(i);
            }
            H(j + 1, j) = w.norm();
            if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);
            for (int i = 0; i < j; ++i) {
                const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
                H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
                H(i, j) = t;
            }
            const double den = std::hypot(H(j, j), H(j + 1, j));
            cs(j) = den > 0.0 ? H(j, j) / den : 1.0;
            sn(j) = den > 0.0 ? H(j + 1, j) / den : 0.0;
            H(j, j) = den;
            H(j + 1, j) = 0.0;
            gvec(j + 1) = -sn(j) * gvec(j);
            gvec(j) = cs(j) * gvec(j);
            ++res.iterations;
            if (std::abs(gvec(j + 1)) / bnorm <= rtol || !(H(j, j) > 0.0)) {
                ++j;
                break;
            }
        }
        const Eigen::VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(gvec.head(j));
        res.x += Minv(V.leftCols(j) * y);
        r = b - A(res.x);
        if (!r.allFinite()) break;
    }
    res.relative_residual = r.norm() / bnorm;
    res.converged = res.relative_residual <= rtol;
    return res;
}

/// Extra equation appended to F = 0.
struct Constraint {
    enum class Kind { none, pin, arclength } kind = Kind::none;
    // pin: packed coordinate `index` equals `value`.
    int index = 0;
    double value = 0.0;
    // arclength: <z - origin, tangent>_W = ds.
    Eigen::VectorXd origin;
    Eigen::VectorXd tangent;
    Eigen::VectorXd weights;
    double ds = 0.0;
    int k_border = 1;  // block carrying the bordering in the preconditioner

    static Constraint none() { return {}; }
    static Constraint pin(int index, double value, int k_border) {
        Constraint c;
        c.kind = Kind::pin;
        c.index = index;
        c.value = value;
        c.k_border = k_border;
        return c;
    }
    static Constraint arclength(const ExtendedSpace& X, Eigen::VectorXd origin, Eigen::VectorXd tangent, double ds,
                                int k_border) {
        Constraint c;
        c.kind = Kind::arclength;
        c.origin = std::move(origin);
        c.tangent = std::move(tangent);
        c.weights = X.weights();
        c.ds = ds;
        c.k_border = k_border;
        return c;
    }
};

enum class NewtonStatus { converged, max_iter, diverged, left_domain };

struct NewtonResult {
    std::optional<State> state;
    NewtonStatus status = NewtonStatus::max_iter;
    int iterations = 0;
    int iterations_to_tol = 0;      // iterations before polishing
    std::vector<double> residuals;  // packed sup norm of F before each iteration and at the end
    int gmres_iterations = 0;
    std::string message;
    bool converged() const { return status == NewtonStatus::converged; }
};

namespace detail {

inline double constraint_value(const Constraint& c, const Eigen::VectorXd& z) {
    switch (c.kind) {
        case Constraint::Kind::none: return 0.0;
        case Constraint::Kind::pin: return z(c.index) - c.value;
        case Constraint::Kind::arclength: return (c.weights.array() * (z - c.origin).array() * c.tangent.array()).sum() - c.ds;
    }
    return 0.0;
}

/// Gradient of the constraint with respect to z (size n + 1).
inline Eigen::VectorXd constraint_row(const Constraint& c, int size) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(size);
    if (c.kind == Constraint::Kind::pin) r(c.index) = 1.0;
    if (c.kind == Constraint::Kind::arclength) r = c.weights.cwiseProduct(c.tangent);
    return r;
}

}  // namespace detail

/// Newton's method for F = 0 (plus the constraint when present, with lambda as an extra unknown).
inline NewtonResult newton_correct(const Problem& p, const State& guess, const Constraint& con, double tol = 1e-10,
                                   int max_iter = 25, bool polish = true, int gmres_restart = 60, int gmres_max_iter = 600) {
    NewtonResult out;
    const ExtendedSpace X(p.grid());
    const int n = X.layout().size();
    const bool with_lambda = con.kind != Constraint::Kind::none;
    Eigen::VectorXd z = X.pack(guess);
    auto residual_of = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& Fz) -> bool {
        try {
            Fz = F_packed(p, X.unpack(zz));
            return Fz.allFinite();
        } catch (const InvalidInput&) {
            return false;
        }
    };
    Eigen::VectorXd F;
    if (!residual_of(z, F)) {
        out.status = NewtonStatus::left_domain;
        out.message = "initial guess outside the conformal domain";
        return out;
    }
    auto merit = [&](const Eigen::VectorXd& Fz, const Eigen::VectorXd& zz) {
        return std::max(Fz.lpNorm<Eigen::Infinity>(), std::abs(detail::constraint_value(con, zz)));
    };
    double r = merit(F, z);
    out.residuals.push_back(r);
    int extra = 0;
    bool reached = r <= tol;
    if (reached && !polish) {
        out.status = NewtonStatus::converged;
        out.state = X.unpack(z);
        return out;
    }
    const Eigen::VectorXd crow = detail::constraint_row(con, X.size());
    for (int it = 0; it < max_iter + 3; ++it) {
        if (reached) {
            if (!polish || extra >= 3 || r < 1e-14) break;
            ++extra;
        } else if (it >= max_iter) {
            break;
        }
        const State s = X.unpack(z);
        Eigen::VectorXd Flam = Eigen::VectorXd::Zero(n);
        if (with_lambda) Flam = F_lambda(p, s);
        const Eigen::VectorXd x = z.head(n);
        const double xscale = 1.0 + x.lpNorm<Eigen::Infinity>();
        auto A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
            const Eigen::VectorXd vx = v.head(n);
            const double vn = vx.lpNorm<Eigen::Infinity>();
            Eigen::VectorXd Av(v.size());
            if (vn == 0.0) {
                Av.head(n).setZero();
            } else {
                const double eps = 1e-7 * xscale / vn;
                Av.head(n) = (F_packed(p, X.layout().unpack_state(p.grid(), s.lambda, x + eps * vx)) - F) / eps;
            }
            if (with_lambda) {
                Av.head(n) += Flam * v(n);
                Av(n) = crow.head(n).dot(vx) + crow(n) * v(n);
            }
            return Av;
        };
        const Eigen::VectorXd col = Flam;
        const Eigen::VectorXd row = crow.head(n);
        const TrivialBlockPreconditioner P =
            with_lambda ? TrivialBlockPreconditioner(p, s.lambda, con.k_border, &col, &row, crow(n))
                        : TrivialBlockPreconditioner(p, s.lambda);
        auto Minv = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return P.solve(v); };
        Eigen::VectorXd rhs(with_lambda ? n + 1 : n);
        rhs.head(n) = -F;
        if (with_lambda) rhs(n) = -detail::constraint_value(con, z);
        const double eta = reached ? 1e-6 : std::min(1e-3, std::max(1e-8, r));
        const GmresResult g = gmres(A, Minv, rhs, eta, gmres_restart, gmres_max_iter);
        out.gmres_iterations += g.iterations;
        if (!g.x.allFinite()) {
            out.status = NewtonStatus::diverged;
            out.message = "linear solve produced non-finite values";
            break;
        }
        Eigen::VectorXd dz = Eigen::VectorXd::Zero(X.size());
        dz.head(n) = g.x.head(n);
        if (with_lambda) dz(n) = g.x(n);
        // Backtracking on the residual.
        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd Fn;
        Eigen::VectorXd zn;
        for (int ls = 0; ls < 8; ++ls) {
            zn = z + alpha * dz;
            if (residual_of(zn, Fn) && merit(Fn, zn) < (1.0 - 1e-4 * alpha) * r) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (reached) break;  // polishing stagnated
            out.status = residual_of(z + dz, Fn) ? NewtonStatus::diverged : NewtonStatus::left_domain;
            out.message = "line search failed at residual " + std::to_string(r);
            out.iterations = it + 1;
            return out;
        }
        z = zn;
        F = Fn;
        const double rn = merit(F, z);
        out.iterations = it + 1;
        out.residuals.push_back(rn);
        if (reached && rn > 0.1 * r) {
            r = rn;
            break;  // no further gain from polishing
        }
        r = rn;
        if (r <= tol && !reached) {
            reached = true;
            out.iterations_to_tol = out.iterations;
        }
    }
    if (reached) {
        out.status = NewtonStatus::converged;
        out.state = X.unpack(z);
    } else if (out.status != NewtonStatus::diverged && out.status != NewtonStatus::left_domain) {
        out.status = NewtonStatus::max_iter;
        out.message = "no convergence after " + std::to_string(max_iter) + " iterations (residual " + std::to_string(r) + ")";
    }
    return out;
}

struct BranchPoint {
    int step = 0;
    double ds = 0.0;
    int newton_iterations = 0;
    State state;
    Diagnostics diagnostics;
};

struct Branch {
    BifurcationPoint origin;
    int direction = 1;
    std::vector<BranchPoint> points;
    Termination termination = Termination::max_steps;
    std::optional<double> returned_lambda;
    std::string message;
};

/// First point of the bifurcating branch: Newton from (lambda0, s0 T(lambda0) theta) with the k0 cosine
/// coefficient of w pinned to its predictor value.
inline NewtonResult switch_branch(const Problem& p, const BifurcationPoint& bp, double s0,
                                  const ContinuationConfig& cfg = {}) {
    require(bp.kernel_dim == 1, "switch_branch: needs a one-dimensional kernel");
    require(bp.d_lambda != 0.0 && !bp.tangential, "switch_branch: transversality fails at this point");
    const KernelElement ke = kernel_element(p, bp);
    const State guess(bp.lambda0, s0 * ke.predictor.dw, s0 * ke.predictor.dphi);
    const PackedLayout lay(p.grid());
    const int idx = lay.w_index(bp.k0);
    return newton_correct(p, guess, Constraint::pin(idx, guess.w.coeff(bp.k0), bp.k0), cfg.newton_tol,
                          cfg.newton_max_iter, cfg.polish, cfg.gmres_restart, cfg.gmres_max_iter);
}

/// One predictor-corrector step from z along `tangent` (unit in the weighted norm) with length ds.
inline NewtonResult arclength_step(const Problem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& tangent, double ds,
                                   int k_border, const ContinuationConfig& cfg) {
    const ExtendedSpace X(p.grid(), cfg.lambda_weight);
    const Eigen::VectorXd pred = z + ds * tangent;
    return newton_correct(p, X.unpack(pred), Constraint::arclength(X, z, tangent, ds, k_border), cfg.newton_tol,
                          cfg.newton_max_iter, cfg.polish, cfg.gmres_restart, cfg.gmres_max_iter);
}

/// Unit secant from a to b in the weighted norm.
inline Eigen::VectorXd secant_tangent(const ExtendedSpace& X, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd d = b - a;
    const double nrm = X.norm(d);
    if (!(nrm > 0.0)) throw NumericalFailure("secant tangent of coincident points");
    return d / nrm;
}

/// Monitors of the global alternatives on an accepted point; returns the first that fires.
inline std::optional<Termination> check_alternatives(const Problem& p, const BranchPoint& bp, const ContinuationConfig& cfg,
                                                     double max_amplitude_so_far) {
    const auto& d = bp.diagnostics;
    if (std::abs(bp.state.lambda) > cfg.lambda_bound) return Termination::lambda_unbounded;
    if (d.amplitude_norm > cfg.amplitude_bound || d.max_curvature > cfg.max_curvature_stop)
        return Termination::amplitude_unbounded;
    if (d.vorticity_Lp > cfg.vorticity_Lp_bound) return Termination::vorticity_Lp_unbounded;
    if (max_amplitude_so_far > cfg.trivial_departure_amplitude && d.amplitude < cfg.trivial_return_amplitude)
        return Termination::returned_to_trivial;
    if (d.min_K2 < cfg.min_K2_stop) return Termination::conformality_degeneracy;
    if (d.self_intersecting) return Termination::self_intersection;
    if (d.min_depth < cfg.depth_stop(p.grid().h())) return Termination::bed_contact;
    return std::nullopt;
}

/// Traces the branch bifurcating from `bp` in the direction cfg.direction.
inline Branch run_branch(const Problem& p, const BifurcationPoint& bp, const ContinuationConfig& cfg) {
    cfg.validate();
    Branch br;
    br.origin = bp;
    br.direction = cfg.direction;
    const ExtendedSpace X(p.grid(), cfg.lambda_weight);
    const NewtonResult first = switch_branch(p, bp, cfg.direction * cfg.s0, cfg);
    if (!first.converged()) {
        br.termination = Termination::newton_failure;
        br.message = "branch switching failed: " + first.message;
        return br;
    }
    BranchPoint bp0{0, 0.0, first.iterations, *first.state, diagnostics(p, *first.state, cfg.vorticity_p)};
    br.points.push_back(bp0);
    double max_amp = bp0.diagnostics.amplitude;
    if (auto t = check_alternatives(p, bp0, cfg, max_amp)) {
        br.termination = *t;
        return br;
    }
    Eigen::VectorXd z_prev = X.pack(State::trivial(p.grid(), bp.lambda0));
    Eigen::VectorXd z = X.pack(*first.state);
    double ds = cfg.ds0;
    for (int step = 1; step <= cfg.max_steps; ++step) {
        const Eigen::VectorXd t = secant_tangent(X, z_prev, z);
        std::optional<NewtonResult> res;
        while (true) {
            NewtonResult r = arclength_step(p, z, t, ds, bp.k0, cfg);
            if (r.converged()) {
                res = std::move(r);
                break;
            }
            ds *= 0.5;
            if (ds < cfg.ds_min) {
                br.termination = Termination::newton_failure;
                br.message = "step " + std::to_string(step) + ": " + r.message;
                return br;
            }
        }
        const State& s = *res->state;
        BranchPoint pt{step, ds, res->iterations, s, diagnostics(p, s, cfg.vorticity_p)};
        br.points.push_back(pt);
        max_amp = std::max(max_amp, pt.diagnostics.amplitude);
        if (auto term = check_alternatives(p, pt, cfg, max_amp)) {
            br.termination = *term;
            if (*term == Termination::returned_to_trivial) br.returned_lambda = s.lambda;
            return br;
        }
        z_prev = z;
        z = X.pack(s);
        if (res->iterations_to_tol <= 3) ds = std::min(1.3 * ds, cfg.ds_max);
    }
    br.termination = Termination::max_steps;
    return br;
}

/// Re-solves step i of a branch backwards: from point i along the reversed tangent of that step with the
/// same length. The result should reproduce point i - 1.
inline NewtonResult retrace_step(const Problem& p, const Branch& br, std::size_t i, const ContinuationConfig& cfg) {
    require(i >= 1 && i < br.points.size(), "retrace_step: index must refer to an arclength step");
    const ExtendedSpace X(p.grid(), cfg.lambda_weight);
    const Eigen::VectorXd z_prev =
        i >= 2 ? X.pack(br.points[i - 2].state) : X.pack(State::trivial(p.grid(), br.origin.lambda0));
    const Eigen::VectorXd z_from = X.pack(br.points[i - 1].state);
    const Eigen::VectorXd t = secant_tangent(X, z_prev, z_from);
    return arclength_step(p, X.pack(br.points[i].state), -t, br.points[i].ds, br.origin.k0, cfg);
}

}  // namespace wavebif
