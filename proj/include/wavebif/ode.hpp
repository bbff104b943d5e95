#pragma once

// Thin wrapper around the Boost.Odeint Dormand-Prince 5(4) pair with dense output.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "wavebif/error.hpp"

namespace wavebif::ode {

inline constexpr int default_max_steps = 1000000;

/// Integrates x' = f(x, t) from times.front() to times.back() (increasing) and
/// returns the state at every entry of `times`.
template <std::size_t K, class System>
std::vector<std::array<double, K>> integrate_at(System&& system, std::array<double, K> x0,
                                                const std::vector<double>& times, double tol,
                                                const std::string& what) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, K>;
    require(times.size() >= 2, what + ": need at least two output times");
    std::vector<State> out;
    out.reserve(times.size());
    auto observer = [&](const State& x, double) {
        for (double v : x) {
            if (!std::isfinite(v)) throw NumericalFailure(what + ": solution became non-finite");
        }
        out.push_back(x);
    };
    auto rhs = [&](const State& x, State& dxdt, double t) { system(x, dxdt, t); };
    auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
    const double span = times.back() - times.front();
    try {
        odeint::integrate_times(stepper, rhs, x0, times.begin(), times.end(), span * 1e-3, observer,
                                odeint::max_step_checker(default_max_steps));
    } catch (const odeint::step_adjustment_error&) {
        throw NumericalFailure(what + ": step size underflow");
    } catch (const odeint::no_progress_error&) {
        throw NumericalFailure(what + ": integration made no progress");
    } catch (const odeint::odeint_error& e) {
        throw NumericalFailure(what + ": " + e.what());
    }
    if (out.size() != times.size()) throw NumericalFailure(what + ": integration stopped early");
    return out;
}

/// Uniform output times a, a + (b-a)/n, ..., b.
inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> t(n + 1);
    for (int j = 0; j <= n; ++j) t[j] = a + (b - a) * j / n;
    t[n] = b;
    return t;
}

}  // namespace wavebif::ode
