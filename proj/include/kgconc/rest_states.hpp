#pragma once

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "kgconc/error.hpp"
#include "kgconc/nonlinearity.hpp"
#include "kgconc/numeric/ode.hpp"
#include "kgconc/numeric/quadrature.hpp"
#include "kgconc/numeric/stencil.hpp"

namespace kgconc {

/// Radial standing-wave profile at unit size and unit L2 norm.
struct RestState {
    double xi = 0.0;              ///< eigenvalue of the unit-size problem
    int node_count = 0;
    std::vector<double> r;        ///< uniform radial grid on [0, r_max]
    std::vector<double> profile;  ///< psi_1(r); zero beyond the truncation radius
    std::vector<double> dprofile; ///< psi_1'(r)
    double r_trunc = 0.0;         ///< where the shooting tail was cut (|psi| minimal after the last node)
    double l2_norm = 1.0;
    double grad_norm2 = 0.0;      ///< int |grad psi_1|^2 d^3x
    double theta0 = 0.0;          ///< grad_norm2 / 3
    int shots = 0;                ///< trajectories integrated by the solver
};

struct RestSolverOptions {
    double r_max = 12.0;          ///< outer radius of the stored profile
    std::size_t grid = 4096;
    double shoot_radius = 20.0;   ///< shooting runs this far unless the solution blows up first
    double r_start = 1e-6;        ///< series start off the singular origin
    double blowup = 5.0;          ///< |psi| > blowup * psi(0) ends a shot
    double bracket_lo = -6.0;     ///< shooting-parameter bracket (log amplitude or xi)
    double bracket_hi = 12.0;
    int bisection_steps = 60;
    numeric::OdeOptions ode{1e-12, 1e-16, 1e-4, 1e-14, 400000, 1e-12};
};

namespace detail {

using RadialState = numeric::State<4>;  // psi, psi', int psi^2 d^3x, int |psi'|^2 d^3x

struct RadialSystem {
    const Nonlinearity* nl;
    double xi;
    void operator()(const RadialState& x, RadialState& dx, double r) const
    {
        const double p = x[0], dp = x[1];
        dx[0] = dp;
        dx[1] = (nl->g1prime(p * p) - xi) * p - 2.0 * dp / r;
        const double w = 4.0 * std::numbers::pi * r * r;
        dx[2] = w * p * p;
        dx[3] = w * dp * dp;
    }
};

inline RadialState radial_start(const Nonlinearity& nl, double amp, double xi, double r0)
{
    // psi = A + c r^2 near the origin with 6c = (G'(A^2) - xi) A.
    const double c = (nl.g1prime(amp * amp) - xi) * amp / 6.0;
    const double w = 4.0 * std::numbers::pi;
    return {amp + c * r0 * r0, 2.0 * c * r0, w * amp * amp * r0 * r0 * r0 / 3.0, w * 4.0 * c * c * std::pow(r0, 5) / 5.0};
}

/// Number of sign changes before blow-up (or before the shooting radius).
inline int count_nodes(const Nonlinearity& nl, double amp, double xi, const RestSolverOptions& opt, int& shots)
{
    ++shots;
    const RadialSystem sys{&nl, xi};
    int nodes = 0;
    double last = amp;
    auto g = [&](double, const RadialState& x) { return std::fabs(x[0]) - opt.blowup * amp; };
    auto gdot = [&](double, const RadialState& x) { return (x[0] >= 0 ? 1.0 : -1.0) * x[1]; };
    auto visit = [&](double, double, const RadialState& x) {
        if (x[0] != 0.0 && (x[0] > 0) != (last > 0)) {
            ++nodes;
            last = x[0];
        }
    };
    numeric::integrate_until<4>(sys, radial_start(nl, amp, xi, opt.r_start), opt.r_start, opt.shoot_radius, g, gdot,
                                visit, opt.ode);
    return nodes;
}

/// Samples one shot on the profile grid, cut at min |psi| after the last node.
inline RestState sample_shot(const Nonlinearity& nl, double amp, double xi, int node_count, const RestSolverOptions& opt)
{
    RestState rs;
    const std::size_t n = opt.grid;
    const double h = opt.r_max / double(n - 1);
    rs.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) rs.r[i] = h * double(i);
    std::vector<RadialState> st(n);
    const RadialSystem sys{&nl, xi};
    st[0] = {amp, 0.0, 0.0, 0.0};
    RadialState x = radial_start(nl, amp, xi, opt.r_start);
    double r = opt.r_start;
    std::size_t last = n - 1;
    for (std::size_t i = 1; i < n; ++i) {
        x = numeric::integrate_to<4>(sys, x, r, rs.r[i], opt.ode);
        r = rs.r[i];
        st[i] = x;
        if (std::fabs(x[0]) > opt.blowup * amp) {
            last = i;
            break;
        }
    }
    // Cut after the requested number of nodes at the smallest |psi|.
    int nodes = 0;
    std::size_t after = 0;
    for (std::size_t i = 1; i <= last; ++i) {
        if ((st[i][0] > 0) != (st[i - 1][0] > 0) && nodes < node_count) {
            ++nodes;
            after = i;
        }
    }
    require(nodes == node_count, ErrorKind::construction, "shot lost its node count while sampling");
    std::size_t cut = after;
    for (std::size_t i = after; i <= last; ++i)
        if (std::fabs(st[i][0]) < std::fabs(st[cut][0])) cut = i;
    require(cut + 1 < n || std::fabs(st[cut][0]) < 1e-6 * amp, ErrorKind::domain,
            "rest-state tail does not decay inside the outer radius");
    rs.profile.assign(n, 0.0);
    rs.dprofile.assign(n, 0.0);
    for (std::size_t i = 0; i <= cut; ++i) {
        rs.profile[i] = st[i][0];
        rs.dprofile[i] = st[i][1];
    }
    rs.r_trunc = rs.r[cut];
    rs.l2_norm = std::sqrt(st[cut][2]);
    rs.grad_norm2 = st[cut][3];
    rs.xi = xi;
    rs.node_count = node_count;
    return rs;
}

/// Bisection on a shooting parameter p with count(p) monotone non-decreasing; returns the
/// largest p with count(p) <= n.
template <class Count>
double bisect_on_nodes(Count&& count, int n, double lo, double hi, int steps)
{
    require(count(lo) <= n, ErrorKind::construction, "eigenvalue not found: lower bracket already has too many nodes");
    require(count(hi) > n, ErrorKind::construction, "eigenvalue not found: upper bracket has too few nodes");
    for (int k = 0; k < steps && hi - lo > 1e-15 * (1.0 + std::fabs(lo)); ++k) {
        const double mid = 0.5 * (lo + hi);
        (count(mid) <= n ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace detail

/// Radial shooting for the unit-size eigenvalue problem lap psi = G'_1(psi^2) psi - xi psi, ||psi|| = 1.
/// The logarithmic member shoots in the central amplitude at xi = 0 and recovers xi from the rescaling
/// identity G'_1(l^2 s) = G'_1(s) - ln l^2; other members use an outer secant on the amplitude.
inline RestState solve_rest_state(const Nonlinearity& nl, int node_count, const RestSolverOptions& opt = {})
{
    require(nl.mode == Mode::nonlinear, ErrorKind::parameter_domain, "rest states need the nonlinear mode");
    require(node_count >= 0 && node_count <= 2, ErrorKind::parameter_domain, "node_count must be 0, 1 or 2");
    int shots = 0;
    RestState rs;
    if (nl.gs.kind == Family::gaussian) {
        const double a0 = nl.gs.norm;
        auto count = [&](double l) { return detail::count_nodes(nl, a0 * std::exp(l), 0.0, opt, shots); };
        const double l = detail::bisect_on_nodes(count, node_count, 0.5 * opt.bracket_lo, 0.5 * opt.bracket_hi,
                                                 opt.bisection_steps);
        rs = detail::sample_shot(nl, a0 * std::exp(l), 0.0, node_count, opt);
        // Unit norm: psi / sqrt(N) solves the same problem with xi shifted by ln N.
        const double norm2 = rs.l2_norm * rs.l2_norm;
        const double s = 1.0 / rs.l2_norm;
        for (auto& v : rs.profile) v *= s;
        for (auto& v : rs.dprofile) v *= s;
        rs.xi = std::log(norm2);
        rs.grad_norm2 /= norm2;
        rs.l2_norm = 1.0;
    } else {
        // Outer secant on ln A for unit norm, inner bisection on xi.
        auto shot_norm = [&](double la, RestState* out) {
            const double amp = std::exp(la);
            auto count = [&](double xi) { return detail::count_nodes(nl, amp, xi, opt, shots); };
            const double xi = detail::bisect_on_nodes(count, node_count, opt.bracket_lo, opt.bracket_hi, opt.bisection_steps);
            RestState r = detail::sample_shot(nl, amp, xi, node_count, opt);
            if (out) *out = r;
            return std::log(r.l2_norm);
        };
        double x0 = std::log(nl.gs.psi(0.0)), x1 = x0 + 0.1;
        double f0 = shot_norm(x0, nullptr), f1 = shot_norm(x1, nullptr);
        for (int it = 0; it < 40 && std::fabs(f1) > 1e-12; ++it) {
            require(f1 != f0, ErrorKind::construction, "amplitude secant stalled");
            const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = shot_norm(x1, nullptr);
        }
        require(std::fabs(f1) <= 1e-9, ErrorKind::construction, "amplitude secant did not reach unit norm");
        shot_norm(x1, &rs);
    }
    rs.shots = shots;
    rs.theta0 = rs.grad_norm2 / 3.0;
    return rs;
}

/// Shape coefficient (1/3) ||grad psi||^2 of a form factor by adaptive radial quadrature.
inline double shape_coefficient(const GroundState& gs)
{
    const double k = numeric::integrate(
        [&](double r) { const double d = gs.dpsi(r); return 4.0 * std::numbers::pi * r * r * d * d; }, 0.0, 40.0,
        {1e-14, 20});
    return k / 3.0;
}

/// max |psi'' + 2 psi'/r - (G'_1(psi^2) - xi) psi| on the stored grid inside the truncation radius,
/// with psi'' from 4th-order differences of the stored slope. Points within four cells of a node are
/// skipped: psi ln psi^2 has a logarithmically divergent derivative there, so the difference quotient
/// loses its order.
inline double rest_residual(const RestState& rs, const Nonlinearity& nl)
{
    const std::size_t n = rs.r.size();
    const double h = rs.r[1] - rs.r[0];
    double worst = 0.0;
    auto near_node = [&](std::size_t i) {
        const std::size_t lo = i >= 4 ? i - 4 : 0, hi = std::min(i + 4, n - 1);
        for (std::size_t k = lo; k < hi; ++k)
            if ((rs.profile[k] > 0) != (rs.profile[k + 1] > 0)) return true;
        return false;
    };
    for (std::size_t i = 2; i + 2 < n && rs.r[i + 2] <= rs.r_trunc; ++i) {
        if (near_node(i)) continue;
        const double d2 = numeric::d1_central4(&rs.dprofile[i - 2], h);
        const double p = rs.profile[i];
        const double res = d2 + 2.0 * rs.dprofile[i] / rs.r[i] - (nl.g1prime(p * p) - rs.xi) * p;
        worst = std::max(worst, std::fabs(res));
    }
    return worst;
}

/// Which root of the frequency relation to take.
enum class OmegaBranch { upper, lower };

struct RestObservables {
    double omega = 0.0;
    double omega0 = 0.0;
    double theta = 0.0;        ///< Theta(omega)
    double energy = 0.0;       ///< chi omega (1 + Theta)
    double xi_check = 0.0;     ///< xi recomputed from omega
    double charge_norm = 0.0;  ///< omega0 / omega
};

/// xi as a function of x = omega^2 / omega0^2.
inline double xi_of_frequency(double x, double a, double a_c)
{
    return (a * a) / (a_c * a_c) * (x - 1.0) - 0.5 * std::log(x);
}

inline RestObservables rest_observables(const RestState& rs, double a, double a_c, double chi, double m, double c,
                                        OmegaBranch branch = OmegaBranch::upper)
{
    require(a > 0 && a_c > 0 && chi > 0 && m > 0 && c > 0, ErrorKind::parameter_domain, "a, a_C, chi, m, c must be positive");
    require(std::fabs(a_c - chi / (m * c)) <= 1e-12 * a_c, ErrorKind::consistency, "a_C must equal chi/(m c)");
    RestObservables o;
    o.omega0 = m * c * c / chi;
    // xi(x) has its minimum at x* = a_C^2 / (2 a^2); each branch is monotone.
    const double k = (a * a) / (a_c * a_c), xstar = 0.5 / k;
    auto f = [&](double x) { return xi_of_frequency(x, a, a_c) - rs.xi; };
    require(f(xstar) <= 0.0, ErrorKind::construction, "frequency relation has no root for this xi and a/a_C");
    double x;
    if (std::fabs(rs.xi) <= 1e-300 && xstar <= 1.0 && branch == OmegaBranch::upper) {
        x = 1.0;
    } else {
        double lo, hi;
        if (branch == OmegaBranch::upper) {
            lo = xstar;
            hi = std::max(2.0 * xstar, 1.0);
            for (int i = 0; f(hi) < 0.0; ++i) {
                require(i < 200, ErrorKind::construction, "frequency root not bracketed");
                hi *= 2.0;
            }
        } else {
            hi = xstar;
            lo = 0.5 * xstar;
            for (int i = 0; f(lo) < 0.0; ++i) {
                require(i < 2000, ErrorKind::construction, "frequency root not bracketed");
                lo *= 0.5;
            }
        }
        std::uintmax_t it = 200;
        const auto br = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
        x = 0.5 * (br.first + br.second);
    }
    o.omega = o.omega0 * std::sqrt(x);
    o.theta = rs.theta0 * (a_c * a_c) / (a * a) / x;
    o.energy = chi * o.omega * (1.0 + o.theta);
    o.xi_check = xi_of_frequency(x, a, a_c);
    o.charge_norm = 1.0 / std::sqrt(x);
    return o;
}

/// Standing-wave energy by quadrature of the profile: the energy density integrated over R^3 for
/// psi(x) = l a^{-3/2} psi_1(x/a), l^2 = omega0/omega, with the single prefactor chi^2/2m.
inline double standing_wave_energy(const RestState& rs, const Nonlinearity& nl, const RestObservables& o, double a,
                                   double chi, double m, double c)
{
    const std::size_t n = rs.r.size();
    const double h = rs.r[1] - rs.r[0];
    const auto w = numeric::simpson_weights(n, h);
    const double l2 = o.charge_norm;
    double norm = 0, grad = 0, pot = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rs.r[i], wr = 4.0 * std::numbers::pi * r * r * w[i];
        const double p = rs.profile[i], dp = rs.dprofile[i];
        norm += wr * p * p;
        grad += wr * dp * dp;
        pot += wr * nl.g1(l2 * p * p);
    }
    const double kappa0 = m * c / chi;
    // int |psi|^2 = l^2 N, int |grad psi|^2 = l^2 K / a^2, int G_a(|psi|^2) = a^{-2} int G_1(l^2 psi_1^2).
    const double bracket = (o.omega * o.omega / (c * c) + kappa0 * kappa0) * l2 * norm + l2 * grad / (a * a) + pot / (a * a);
    return chi * chi / (2.0 * m) * bracket;
}

}  // namespace kgconc
