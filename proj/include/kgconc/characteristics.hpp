#pragma once

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "kgconc/error.hpp"
#include "kgconc/numeric/ode.hpp"
#include "kgconc/numeric/quadrature.hpp"
#include "kgconc/scale.hpp"
#include "kgconc/trajectory.hpp"

namespace kgconc {

struct CharOptions {
    numeric::OdeOptions ode{1e-10, 1e-14, 1e-3, 1e-13, 200000, 1e-12};
    double h_tau_factor = 1e-3;   ///< tau step of the balancing-potential derivative, in units of theta_bar
    double quad_rel_tol = 1e-10;  ///< adaptive quadrature of Theta along z
    double root_tol = 1e-14;      ///< characteristic-map inversion, absolute in s
    std::size_t fan_size = 129;   ///< characteristics per fan in the patch fast path
    double fan_margin = 1.08;     ///< fans reach this multiple of theta_bar
};

/// Everything the moving-frame construction depends on: trajectory, scale point and the
/// Gaussian width in z (1, or gamma0 for a fixed contraction).
struct CharContext {
    std::shared_ptr<const Trajectory> traj;  ///< owned copy, so contexts outlive the caller's trajectory
    ScaleParams sp;
    double q = 1.0;
    double gamma0 = 0.0;  ///< 0 selects the moving contraction; > 0 fixes it
    Admissibility bounds;
    CharOptions opt;

    double width() const { return gamma0 > 0.0 ? gamma0 : 1.0; }
    TauView view() const { return TauView{traj.get(), sp.a}; }
    double h_tau() const { return sp.theta_bar * opt.h_tau_factor; }
};

/// Context on the time window [t_lo, t_hi]; admissibility is checked there.
inline CharContext make_context(const Trajectory& tr, const ScaleParams& sp, double t_lo, double t_hi,
                                double gamma0 = 0.0, const CharOptions& opt = {}, double q = 1.0)
{
    require(std::fabs(tr.c() - sp.c) <= 1e-15 * sp.c, ErrorKind::config, "trajectory and scale use different c");
    require(gamma0 == 0.0 || gamma0 >= 1.0, ErrorKind::config, "gamma0 must be >= 1 when set");
    CharContext ctx;
    ctx.traj = std::make_shared<const Trajectory>(tr);
    ctx.sp = sp;
    ctx.q = q;
    ctx.gamma0 = gamma0;
    ctx.opt = opt;
    // Characteristics reach a few tau units beyond the window; pad by a generous margin.
    const double pad = 50.0 * sp.a / sp.c;
    ctx.bounds = admissibility(tr, t_lo - pad, t_hi + pad);
    require_admissible(tr, t_lo - pad, t_hi + pad);
    return ctx;
}

/// Trajectory-dependent coefficients at rescaled time tau.
struct FrameCoeffs {
    double beta, beta_t, beta_tt;
    double gamma, gamma_t;
    double sigma, sigma_t, sigma_tt;
};

inline FrameCoeffs frame_coeffs(const CharContext& ctx, double tau)
{
    const auto v = ctx.view();
    FrameCoeffs f;
    f.beta = v.beta(tau);
    f.beta_t = v.beta_tau(tau);
    f.beta_tt = v.beta_tautau(tau);
    const double g2 = 1.0 / (1.0 - f.beta * f.beta);
    f.gamma = std::sqrt(g2);
    f.gamma_t = f.gamma * g2 * f.beta * f.beta_t;
    f.sigma = -0.5 * std::log(f.gamma) + (ctx.gamma0 > 0.0 ? 0.5 * std::log(ctx.gamma0) : 0.0);
    f.sigma_t = -0.5 * g2 * f.beta * f.beta_t;
    f.sigma_tt = -0.5 * (2.0 * g2 * g2 * f.beta * f.beta * f.beta_t * f.beta_t + g2 * f.beta_t * f.beta_t +
                         g2 * f.beta * f.beta_tt);
    return f;
}

/// Q and dQ/dz: zeta^2 [-(sigma'' + sigma'^2) - w^2 z beta' - 2 beta w^2 z sigma' + gamma^-2 (w^4 z^2 - w^2) - G'],
/// where G' = -2 sigma + w^2 z^2 - 1 is the 1D logarithmic law on the Gaussian (zero in linear mode).
struct QValue {
    double q = 0.0;
    double qz = 0.0;
};

inline QValue q_value(const CharContext& ctx, const FrameCoeffs& f, double z)
{
    const double zeta2 = ctx.sp.zeta * ctx.sp.zeta;
    const double w2 = ctx.width() * ctx.width();
    const double ig2 = 1.0 - f.beta * f.beta;
    const bool nonlinear = ctx.sp.mode == Mode::nonlinear;
    const double gp = nonlinear ? -2.0 * f.sigma + w2 * z * z - 1.0 : 0.0;
    const double gpz = nonlinear ? 2.0 * w2 * z : 0.0;
    QValue r;
    r.q = zeta2 * (-(f.sigma_tt + f.sigma_t * f.sigma_t) - w2 * z * f.beta_t - 2.0 * f.beta * w2 * z * f.sigma_t +
                   ig2 * (w2 * w2 * z * z - w2) - gp);
    r.qz = zeta2 * (-w2 * f.beta_t - 2.0 * f.beta * w2 * f.sigma_t + 2.0 * ig2 * w2 * w2 * z - gpz);
    return r;
}

inline double q_term(double tau, double z, const CharContext& ctx)
{
    return q_value(ctx, frame_coeffs(ctx, tau), z).q;
}

/// Imaginary part of the Q operator, 2 zeta gamma sigma' + zeta gamma'; zero for the chosen sigma.
inline double imag_q(double tau, const CharContext& ctx)
{
    const auto f = frame_coeffs(ctx, tau);
    return 2.0 * ctx.sp.zeta * f.gamma * f.sigma_t + ctx.sp.zeta * f.gamma_t;
}

struct ThetaValue {
    double theta = 0.0;
    double theta_dphi = 0.0;
    double theta_dz = 0.0;
    double discriminant = 0.0;
};

/// Small root Z = -beta gamma + sign(beta) sqrt(D) of Q - 2 gamma Phi + Phi^2 - 2 beta gamma Z - Z^2 = 0,
/// D = Phi^2 - 2 gamma Phi + beta^2 gamma^2 + Q.
inline ThetaValue theta_from(double phi, double beta, double gamma, const QValue& q)
{
    ThetaValue t;
    t.discriminant = phi * phi - 2.0 * gamma * phi + beta * beta * gamma * gamma + q.q;
    if (!(t.discriminant > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "discriminant collapse: D=" << t.discriminant << " Phi=" << phi << " beta=" << beta << " Q=" << q.q;
        fail(ErrorKind::construction, os.str());
    }
    const double sd = std::sqrt(t.discriminant), sg = beta >= 0.0 ? 1.0 : -1.0;
    // sqrt(D) - |beta| gamma without cancellation.
    const double num = phi * phi - 2.0 * gamma * phi + q.q;
    t.theta = sg * num / (sd + std::fabs(beta) * gamma);
    t.theta_dphi = sg * (phi - gamma) / sd;
    t.theta_dz = sg * q.qz / (2.0 * sd);
    return t;
}

inline ThetaValue theta_of_phi(double phi, double tau, double z, const CharContext& ctx)
{
    const auto f = frame_coeffs(ctx, tau);
    return theta_from(phi, f.beta, f.gamma, q_value(ctx, f, z));
}

namespace detail {

using CharState = numeric::State<2>;  // z, Phi

struct CharSystem {
    const CharContext* ctx;
    double tau0;
    void operator()(const CharState& x, CharState& dx, double s) const
    {
        const double tau = tau0 + s, z = x[0], phi = x[1];
        const auto f = frame_coeffs(*ctx, tau);
        const auto th = theta_from(phi, f.beta, f.gamma, q_value(*ctx, f, z));
        const double w2 = ctx->width() * ctx->width();
        dx[0] = -th.theta_dphi - f.beta;
        dx[1] = -2.0 * phi * (f.sigma_t + f.beta * w2 * z) - 2.0 * w2 * z * th.theta + th.theta_dz;
    }
};

inline CharState char_state(const CharContext& ctx, double tau0, double s)
{
    return numeric::integrate_to(CharSystem{&ctx, tau0}, CharState{0.0, 0.0}, 0.0, s, ctx.opt.ode);
}

/// Upper bound of |s| for a characteristic to reach |z| = zmax, from |z| >= b_min |s| / 2.
inline double s_bound(const CharContext& ctx, double zmax) { return 2.0 * zmax / ctx.bounds.b_min(); }

}  // namespace detail

/// One characteristic through (tau0, z = 0), sampled at the accepted steps in both directions.
struct CharPath {
    double tau0 = 0.0;
    std::vector<double> s, z, phi;  ///< ascending in s, includes s = 0
    double s_minus = 0.0, s_plus = 0.0;
    double max_abs_phi = 0.0;
    bool phi_bound_ok = true;       ///< |Phi| <= zeta^{2 - delta}
    bool cone_ok = true;            ///< b_min |s| / 2 <= |z| <= 2 b_max |s|
    bool discriminant_ok = true;    ///< D >= Phi^2 + beta_check^2 / 4
    double min_discriminant_margin = INFINITY;
};

/// Integrates the characteristic system from (tau0, 0, 0) in both directions until |z| = theta_bar.
/// Raises a construction failure if |Phi| exceeds zeta or the discriminant collapses.
inline CharPath integrate_characteristic(double tau0, const CharContext& ctx)
{
    CharPath path;
    path.tau0 = tau0;
    const double th = ctx.sp.theta_bar, zeta = ctx.sp.zeta;
    const double smax = 1.5 * detail::s_bound(ctx, th);
    const detail::CharSystem sys{&ctx, tau0};
    std::vector<std::array<double, 3>> fwd, bwd;
    for (int dir : {1, -1}) {
        auto& rec = dir > 0 ? fwd : bwd;
        auto g = [&](double, const detail::CharState& x) { return std::fabs(x[0]) - th; };
        auto gdot = [&](double s, const detail::CharState& x) {
            detail::CharState dx{};
            sys(x, dx, s);
            return (x[0] >= 0 ? 1.0 : -1.0) * dx[0];
        };
        auto visit = [&](double, double s, const detail::CharState& x) {
            if (std::fabs(x[1]) > zeta) {
                std::ostringstream os;
                os.precision(17);
                os << "|Phi| exceeds zeta at tau=" << tau0 + s << " z=" << x[0] << " Phi=" << x[1];
                fail(ErrorKind::construction, os.str());
            }
            rec.push_back({s, x[0], x[1]});
        };
        const auto res = numeric::integrate_until(sys, detail::CharState{0.0, 0.0}, 0.0, dir * smax, g, gdot, visit,
                                                  ctx.opt.ode);
        if (!res.hit) fail(ErrorKind::construction, "characteristic did not leave the strip within the s bound");
        (dir > 0 ? path.s_plus : path.s_minus) = res.t;
        rec.back() = {res.t, res.x[0] >= 0 ? th : -th, res.x[1]};
    }
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) {
        path.s.push_back((*it)[0]);
        path.z.push_back((*it)[1]);
        path.phi.push_back((*it)[2]);
    }
    path.s.push_back(0.0);
    path.z.push_back(0.0);
    path.phi.push_back(0.0);
    for (const auto& r : fwd) {
        path.s.push_back(r[0]);
        path.z.push_back(r[1]);
        path.phi.push_back(r[2]);
    }
    const double budget = std::pow(zeta, 2.0 - ctx.sp.delta);
    const double bmin = ctx.bounds.b_min(), bmax = ctx.bounds.b_max(), bc = ctx.bounds.beta_check;
    for (std::size_t i = 0; i < path.s.size(); ++i) {
        const double s = path.s[i], z = path.z[i], phi = path.phi[i];
        path.max_abs_phi = std::max(path.max_abs_phi, std::fabs(phi));
        if (std::fabs(phi) > budget) path.phi_bound_ok = false;
        const double az = std::fabs(z), as = std::fabs(s);
        if (az < 0.5 * bmin * as * (1 - 1e-9) || az > 2.0 * bmax * as * (1 + 1e-9) + 1e-12) path.cone_ok = false;
        const auto t = theta_of_phi(phi, tau0 + s, z, ctx);
        const double margin = t.discriminant - (phi * phi + 0.25 * bc * bc);
        path.min_discriminant_margin = std::min(path.min_discriminant_margin, margin);
        if (margin < 0.0) path.discriminant_ok = false;
    }
    return path;
}

/// Phi at (tau, z): finds the characteristic through the point by bracketed root finding on
/// its parameter s (bracket from the cone bound), then integrates it to s.
inline double phi_at(double tau, double z, const CharContext& ctx)
{
    if (z == 0.0) return 0.0;
    const double bmin = ctx.bounds.b_min(), bmax = ctx.bounds.b_max();
    const double sgn = (z > 0 ? 1.0 : -1.0) * (frame_coeffs(ctx, tau).beta > 0 ? 1.0 : -1.0);
    auto f = [&](double s) { return detail::char_state(ctx, tau - s, s)[0] - z; };
    double lo = sgn * std::fabs(z) / (2.0 * bmax), hi = sgn * 2.0 * std::fabs(z) / bmin;
    if (lo > hi) std::swap(lo, hi);
    const double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) {
        std::ostringstream os;
        os << "characteristic map not inverted at tau=" << tau << " z=" << z;
        fail(ErrorKind::domain, os.str());
    }
    std::uintmax_t it = 100;
    const double tol = ctx.opt.root_tol;
    const auto br = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, [tol](double a, double b) { return std::fabs(b - a) <= tol; }, it);
    const double s = 0.5 * (br.first + br.second);
    return detail::char_state(ctx, tau - s, s)[1];
}

/// int_0^z Theta(Phi(tau, z1)) dz1 by adaptive quadrature over phi_at.
inline double theta_integral(double tau, double z, const CharContext& ctx)
{
    if (z == 0.0) return 0.0;
    numeric::QuadOptions q;
    q.rel_tol = ctx.opt.quad_rel_tol;
    q.max_depth = 12;
    return numeric::integrate([&](double z1) { return theta_of_phi(phi_at(tau, z1, ctx), tau, z1, ctx).theta; }, 0.0,
                              z, q);
}

/// Phase S = -zeta^{-1} int_0^z Theta dz1 (S(tau, 0) = 0).
inline double phase_S(double tau, double z, const CharContext& ctx)
{
    return -theta_integral(tau, z, ctx) / ctx.sp.zeta;
}

/// Balancing potential (m c^2 / q)(Phi - d_tau int_0^z Theta + beta Theta); the tau derivative is a
/// 5-point central difference with step h_tau.
inline double balancing_potential(double tau, double z, const CharContext& ctx)
{
    if (z == 0.0) return 0.0;
    const double h = ctx.h_tau();
    const double d = (theta_integral(tau - 2 * h, z, ctx) - 8.0 * theta_integral(tau - h, z, ctx) +
                      8.0 * theta_integral(tau + h, z, ctx) - theta_integral(tau + 2 * h, z, ctx)) /
                     (12.0 * h);
    const double phi = phi_at(tau, z, ctx);
    const auto f = frame_coeffs(ctx, tau);
    const double th = theta_of_phi(phi, tau, z, ctx).theta;
    return ctx.sp.m * ctx.sp.c * ctx.sp.c / ctx.q * (phi - d + f.beta * th);
}

struct AcceleratingPotential {
    double phi_ac = 0.0;
    double phi_ac_slope = 0.0;  ///< d phi_ac / dx = -(m/q) d/dt (gamma v)
    double s_phase = 0.0;       ///< int_0^t [q phi0/chi - v^2 omega0 gamma / c^2 + gamma omega0] dt'
};

inline AcceleratingPotential accelerating_potential(double t, double y, const Trajectory& tr,
                                                    const std::function<double(double)>& phi0, double m, double q,
                                                    double chi)
{
    const double c = tr.c(), w0 = m * c * c / chi;
    AcceleratingPotential r;
    r.phi_ac_slope = -(m / q) * tr.d_gamma_v(t);
    const double p0 = phi0 ? phi0(t) : 0.0;
    r.phi_ac = p0 + r.phi_ac_slope * y;
    auto rate = [&](double u) {
        const double g = tr.gamma(u), v = tr.v(u);
        return (phi0 ? q * phi0(u) / chi : 0.0) - v * v * w0 * g / (c * c) + g * w0;
    };
    numeric::QuadOptions qo;
    qo.rel_tol = 1e-13;
    r.s_phase = numeric::integrate(rate, 0.0, t, qo);
    return r;
}

/// Phi on a patch of tau columns by the characteristic-fan fast path: characteristics started on a
/// uniform tau0 grid are integrated exactly to every column, and Phi(tau_j, .) is interpolated
/// in z from the resulting nodes (8-point Lagrange). Returns phi[j][i] for columns tau[j], nodes z[i].
inline std::vector<std::vector<double>> phi_patch(const std::vector<double>& taus, const std::vector<double>& zs,
                                                  const CharContext& ctx)
{
    require(!taus.empty() && !zs.empty(), ErrorKind::resolution, "empty patch");
    const double th = ctx.sp.theta_bar;
    const double zreach = ctx.opt.fan_margin * th;
    for (double z : zs) require(std::fabs(z) <= th * (1 + 1e-12), ErrorKind::domain, "patch node outside the strip");
    const auto [tmin_it, tmax_it] = std::minmax_element(taus.begin(), taus.end());
    const double tau_mid = 0.5 * (*tmin_it + *tmax_it);

    // s-extent to reach |z| = zreach from the middle column, both directions.
    const detail::CharSystem mid_sys{&ctx, tau_mid};
    double ext[2];
    for (int k = 0; k < 2; ++k) {
        const double dir = k == 0 ? 1.0 : -1.0;
        auto g = [&](double, const detail::CharState& x) { return std::fabs(x[0]) - zreach; };
        auto gdot = [&](double s, const detail::CharState& x) {
            detail::CharState dx{};
            mid_sys(x, dx, s);
            return (x[0] >= 0 ? 1.0 : -1.0) * dx[0];
        };
        const auto res = numeric::integrate_until(mid_sys, detail::CharState{0.0, 0.0}, 0.0,
                                                  dir * 1.5 * detail::s_bound(ctx, zreach), g, gdot,
                                                  [](double, double, const detail::CharState&) {}, ctx.opt.ode);
        require(res.hit, ErrorKind::construction, "fan characteristic did not reach the strip edge");
        ext[k] = std::fabs(res.t);
    }
    // Characteristics with positive s come from earlier tau0.
    const double lo = tau_mid - ext[0] - (*tmax_it - *tmin_it), hi = tau_mid + ext[1] + (*tmax_it - *tmin_it);
    const std::size_t nf = ctx.opt.fan_size;
    const std::size_t nt = taus.size();
    std::vector<std::vector<double>> zk(nt, std::vector<double>(nf, NAN)), pk(nt, std::vector<double>(nf, NAN));
    for (std::size_t k = 0; k < nf; ++k) {
        const double tau0 = lo + (hi - lo) * double(k) / double(nf - 1);
        const detail::CharSystem sys{&ctx, tau0};
        std::vector<std::size_t> order(nt);
        for (std::size_t j = 0; j < nt; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return taus[a] < taus[b]; });
        // Walk outward from s = 0 in each direction through the sorted targets.
        for (int dir : {1, -1}) {
            detail::CharState x{0.0, 0.0};
            double s = 0.0;
            try {
                for (std::size_t n = 0; n < nt; ++n) {
                    const std::size_t j = dir > 0 ? order[n] : order[nt - 1 - n];
                    const double st = taus[j] - tau0;
                    if ((dir > 0 && st < 0) || (dir < 0 && st >= 0)) continue;
                    x = numeric::integrate_to(sys, x, s, st, ctx.opt.ode);
                    s = st;
                    if (std::fabs(x[0]) > 1.25 * th) break;
                    zk[j][k] = x[0];
                    pk[j][k] = x[1];
                }
            } catch (const Error&) {
                // Far outside the strip the discriminant may fail; such nodes are not needed.
            }
        }
    }
    std::vector<std::vector<double>> out(nt, std::vector<double>(zs.size(), 0.0));
    for (std::size_t j = 0; j < nt; ++j) {
        std::vector<std::pair<double, double>> nodes;
        for (std::size_t k = 0; k < nf; ++k)
            if (std::isfinite(zk[j][k]) && std::fabs(zk[j][k]) > 1e-9) nodes.emplace_back(zk[j][k], pk[j][k]);
        nodes.emplace_back(0.0, 0.0);
        std::sort(nodes.begin(), nodes.end());
        require(nodes.size() >= 16, ErrorKind::construction, "characteristic fan too sparse");
        require(nodes.front().first <= -th && nodes.back().first >= th, ErrorKind::construction,
                "characteristic fan does not cover the strip");
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const double z = zs[i];
            if (z == 0.0) continue;
            auto it = std::lower_bound(nodes.begin(), nodes.end(), std::make_pair(z, -HUGE_VAL));
            std::ptrdiff_t c = it - nodes.begin();
            std::ptrdiff_t first = std::clamp<std::ptrdiff_t>(c - 4, 0, std::ptrdiff_t(nodes.size()) - 8);
            double v = 0.0;
            for (std::ptrdiff_t a = first; a < first + 8; ++a) {
                double l = 1.0;
                for (std::ptrdiff_t b = first; b < first + 8; ++b)
                    if (b != a) l *= (z - nodes[std::size_t(b)].first) / (nodes[std::size_t(a)].first - nodes[std::size_t(b)].first);
                v += l * nodes[std::size_t(a)].second;
            }
            out[j][i] = v;
        }
    }
    return out;
}

}  // namespace kgconc
