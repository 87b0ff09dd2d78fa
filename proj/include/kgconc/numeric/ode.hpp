#pragma once

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "kgconc/error.hpp"

namespace kgconc::numeric {

namespace odeint = boost::numeric::odeint;

template <std::size_t N>
using State = std::array<double, N>;

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double initial_step = 1e-3;
    double min_step = 1e-13;
    std::size_t max_steps = 200000;
    double event_tol = 1e-12;  ///< target accuracy of |g| at a located event
};

template <std::size_t N>
struct EventResult {
    bool hit = false;
    double t = 0.0;
    State<N> x{};
    std::size_t steps = 0;
};

namespace detail {

template <std::size_t N>
using Dopri = odeint::runge_kutta_dopri5<State<N>>;

inline double signed_step(double t0, double t1, double h)
{
    return t1 >= t0 ? std::fabs(h) : -std::fabs(h);
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (either direction), landing exactly on t1.
template <std::size_t N, class Sys>
State<N> integrate_to(Sys&& sys, State<N> x, double t0, double t1, const OdeOptions& opt,
                      std::size_t* steps = nullptr)
{
    if (t0 == t1) return x;
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, detail::Dopri<N>());
    const double dt = detail::signed_step(t0, t1, std::min(opt.initial_step, std::fabs(t1 - t0)));
    std::size_t n = 0;
    try {
        n = odeint::integrate_adaptive(stepper, sys, x, t0, t1, dt);
    } catch (const odeint::step_adjustment_error& e) {
        fail(ErrorKind::construction, std::string("ODE step-size underflow: ") + e.what());
    }
    if (steps) *steps += n;
    return x;
}

/// Integrate from t0 toward t_max until the event function g(t, x) changes sign from
/// negative to non-negative. The crossing is bracketed on the dense output, then polished
/// by exact re-integration and Newton steps on g using dg/dt supplied by `gdot(t, x)`.
template <std::size_t N, class Sys, class G, class GDot, class Visitor>
EventResult<N> integrate_until(Sys&& sys, State<N> x0, double t0, double t_max, G&& g, GDot&& gdot,
                               Visitor&& on_step, const OdeOptions& opt)
{
    EventResult<N> res;
    auto dense = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, detail::Dopri<N>());
    dense.initialize(x0, t0, detail::signed_step(t0, t_max, opt.initial_step));
    const double dir = t_max >= t0 ? 1.0 : -1.0;
    State<N> xa = x0, xb{};
    double ta = t0;
    if (g(t0, x0) >= 0.0) {
        res.hit = true;
        res.t = t0;
        res.x = x0;
        return res;
    }
    while (true) {
        std::pair<double, double> span;
        try {
            span = dense.do_step(sys);
        } catch (const odeint::step_adjustment_error& e) {
            fail(ErrorKind::construction, std::string("ODE step-size underflow: ") + e.what());
        }
        ++res.steps;
        const double tb = span.second;
        xb = dense.current_state();
        if (std::fabs(tb - span.first) < opt.min_step) {
            std::ostringstream os;
            os << "ODE step-size underflow at t=" << tb;
            fail(ErrorKind::construction, os.str());
        }
        if (res.steps > opt.max_steps) fail(ErrorKind::construction, "ODE step budget exhausted");
        const bool past_end = dir * (tb - t_max) >= 0.0;
        const double te = past_end ? t_max : tb;
        State<N> xe = xb;
        if (past_end) dense.calc_state(t_max, xe);
        if (g(te, xe) >= 0.0) {
            // Bracket on the interpolant.
            double lo = ta, hi = te;
            State<N> xm{};
            for (int it = 0; it < 200 && std::fabs(hi - lo) > 1e-15 * (1.0 + std::fabs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                dense.calc_state(mid, xm);
                (g(mid, xm) >= 0.0 ? hi : lo) = mid;
            }
            // Polish: exact integration from the accepted step start, then Newton on g.
            double ts = hi;
            State<N> xs = integrate_to(sys, xa, ta, ts, opt, &res.steps);
            for (int it = 0; it < 4; ++it) {
                const double gv = g(ts, xs);
                if (std::fabs(gv) <= 0.1 * opt.event_tol) break;
                const double dg = gdot(ts, xs);
                if (dg == 0.0) break;
                const double tn = ts - gv / dg;
                xs = integrate_to(sys, xs, ts, tn, opt, &res.steps);
                ts = tn;
            }
            res.hit = true;
            res.t = ts;
            res.x = xs;
            on_step(ta, ts, xs);
            return res;
        }
        on_step(ta, te, xe);
        if (past_end) {
            res.t = t_max;
            res.x = xe;
            return res;
        }
        ta = tb;
        xa = xb;
    }
}

}  // namespace kgconc::numeric
