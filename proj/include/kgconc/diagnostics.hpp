#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kgconc/assembly.hpp"
#include "kgconc/densities.hpp"
#include "kgconc/error.hpp"
#include "kgconc/nonlinearity.hpp"
#include "kgconc/numeric/parallel.hpp"
#include "kgconc/numeric/quadrature.hpp"
#include "kgconc/numeric/stats.hpp"
#include "kgconc/numeric/stencil.hpp"
#include "kgconc/scale.hpp"
#include "kgconc/trajectory.hpp"

namespace kgconc {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

/// Energy, charge and ergocenter restricted to the neighbourhood |x - r(t)| <= R, sampled in time.
struct RestrictedObservables {
    double R = 0.0;
    std::vector<double> t, energy, charge, ergocenter, r_hat;
    std::vector<double> grad_phi;       ///< slope of the limiting linear potential at r(t)
    std::vector<double> boundary_flux;  ///< |charge flux| summed over the faces of the moving region
    std::vector<double> ergo_identity;  ///< (1/E) int (x - r_n) E, zero up to rounding
    double eminmc = nan_value;          ///< sup |E a / (m c^2 gamma^2 a Psi_hat^2) - 1| over the strip
};

namespace detail {

inline double nearest_index(const Axis& ax, double x)
{
    return std::clamp(std::round((x - ax.lo) / ax.h), 0.0, double(ax.n - 1));
}

}  // namespace detail

/// Restricted quantities of a sampled field. 1D frames integrate over the slab |x - r(t)| <= R with
/// the transverse factor already integrated out; 3D frames integrate over the ball. In a moving
/// frame the axis is already x - r(t).
inline RestrictedObservables restricted_quantities(const FieldFrame& f, const Nonlinearity& nl, const Trajectory& tr,
                                                   double R)
{
    require(R > 0.0, ErrorKind::domain, "restriction radius must be positive");
    const auto dg = densities(f, nl);
    RestrictedObservables out;
    out.R = R;
    std::array<std::vector<double>, 3> w;
    for (int d = 0; d < f.dim; ++d) w[d] = numeric::trapezoid_weights(f.x[d].n, f.x[d].h);
    if (f.dim == 1) w[1] = w[2] = {1.0};
    for (std::size_t it = 0; it < f.t.n; ++it) {
        const double t = f.t.at(it);
        const double rh = f.frame == FrameKind::moving ? 0.0 : tr.r(t);
        require(rh - R >= f.x[0].lo - 1e-12 * R && rh + R <= f.x[0].hi() + 1e-12 * R, ErrorKind::domain,
                "restriction region leaves the grid");
        if (f.dim == 3)
            for (int d = 1; d < 3; ++d)
                require(-R >= f.x[d].lo - 1e-12 * R && R <= f.x[d].hi() + 1e-12 * R, ErrorKind::domain,
                        "restriction ball leaves the grid");
        // Pass 0 accumulates E, Q and the first moment; pass 1 the moment about the ergocenter.
        double E = 0, Q = 0, XE = 0, ID = 0;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < f.x[0].n; ++i)
                for (std::size_t j = 0; j < (f.dim == 3 ? f.x[1].n : 1); ++j)
                    for (std::size_t k = 0; k < (f.dim == 3 ? f.x[2].n : 1); ++k) {
                        const double x = f.x[0].at(i) - rh;
                        const double y = f.dim == 3 ? f.x[1].at(j) : 0.0, z = f.dim == 3 ? f.x[2].at(k) : 0.0;
                        if (x * x + y * y + z * z > R * R) continue;
                        const double wt = w[0][i] * w[1][j] * w[2][k];
                        const std::size_t idx = dg.index(it, i, j, k);
                        if (pass == 1) {
                            ID += wt * (x - XE / E) * dg.energy[idx];
                            continue;
                        }
                        E += wt * dg.energy[idx];
                        Q += wt * dg.rho[idx];
                        XE += wt * x * dg.energy[idx];
                    }
        out.t.push_back(t);
        out.r_hat.push_back(rh);
        out.energy.push_back(E);
        out.charge.push_back(Q);
        out.ergocenter.push_back(rh + XE / E);
        out.ergo_identity.push_back(ID / E);
        // Slope of phi at the node nearest to r(t), central differences along x.
        const std::size_t i0 = std::size_t(detail::nearest_index(f.x[0], rh));
        const std::size_t j0 = f.dim == 3 ? std::size_t(detail::nearest_index(f.x[1], 0.0)) : 0;
        const std::size_t k0 = f.dim == 3 ? std::size_t(detail::nearest_index(f.x[2], 0.0)) : 0;
        out.grad_phi.push_back(numeric::d1_order2<double>(
            [&](std::size_t i) { return f.phi[f.index(it, i, j0, k0)]; }, i0, f.x[0].n, f.x[0].h));
        out.boundary_flux.push_back(nan_value);
    }
    return out;
}

/// Restricted quantities of the assembled solution over the strip |z| <= theta_bar, from the exact
/// moving-frame line densities. The transverse Gaussian integrates to one.
inline RestrictedObservables restricted_quantities(const AssembledSolution& sol)
{
    const auto& ctx = sol.ctx;
    const double a = ctx.sp.a, R = ctx.sp.theta_bar * a;
    const auto w = numeric::simpson_weights(sol.z.size(), a * sol.hz());
    const double zeta2d = std::pow(ctx.sp.zeta, 2.0 - ctx.sp.delta);
    const double m = sol.par.m, c = sol.par.c, q = sol.par.q, w2 = ctx.width() * ctx.width();
    RestrictedObservables out;
    out.R = R;
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.patches.size(); ++k) {
        const auto d = assembled_densities(sol, k);
        const double t = sol.times[k];
        const auto& p = sol.patches[k];
        const auto f = frame_coeffs(ctx, p.taus[p.center()]);
        double E = 0, Q = 0, YE = 0;
        for (std::size_t i = 0; i < sol.z.size(); ++i) {
            const double y = a * sol.z[i];
            E += w[i] * d.energy[i];
            Q += w[i] * d.rho[i];
            YE += w[i] * y * d.energy[i];
            const double ref = m * c * c * f.gamma * f.gamma * std::exp(2.0 * f.sigma - w2 * sol.z[i] * sol.z[i]) /
                               std::sqrt(std::numbers::pi) / a;
            worst = std::max(worst, std::fabs(d.energy[i] / ref - 1.0));
        }
        const double yn = YE / E;
        double id = 0.0;
        for (std::size_t i = 0; i < sol.z.size(); ++i) id += w[i] * (a * sol.z[i] - yn) * d.energy[i];
        const double rh = ctx.traj->r(t);
        out.t.push_back(t);
        out.r_hat.push_back(rh);
        out.energy.push_back(E);
        out.charge.push_back(Q);
        out.ergocenter.push_back(rh + yn);
        out.ergo_identity.push_back(id / E);
        out.grad_phi.push_back(sol.phi_slope[k]);
        // Flux through the faces moving with r(t): J - rho v = c q Psi_hat^2 (Theta + beta Phi).
        const std::size_t c0 = p.center(), last = sol.z.size() - 1;
        double flux = 0.0;
        for (std::size_t i : {std::size_t(0), last}) {
            const double psi2 = std::exp(2.0 * f.sigma - w2 * sol.z[i] * sol.z[i]) / std::sqrt(std::numbers::pi) / a;
            flux += std::fabs(c * q * psi2 * (p.theta[c0][i] + f.beta * p.phi[c0][i]));
        }
        out.boundary_flux.push_back(flux);
    }
    out.eminmc = worst / zeta2d;
    return out;
}

/// One row of the concentration checks: interior bound, boundary integral, energy floor and the
/// two potential gates.
struct ConcentrationRow {
    double zeta = 0, a = 0, theta = 0;
    double interior = 0;        ///< max_t int [a_C^2 |grad_0 psi|^2 + a_C^2 |G| + |psi|^2]
    double boundary = 0;        ///< max_t of the same integrand over the boundary
    double energy_min = 0;      ///< min_t restricted energy
    double potential_bound = 0; ///< max (|phi| + |grad_0 phi|)
    double potential_gap = 0;   ///< max (|phi - phi_inf| + |grad_0 (phi - phi_inf)|)
    double anthen = nan_value;  ///< a^{-1} theta^{2 - (1 + alpha) N} for synthetic families
};

struct ConcentrationReport {
    std::string name;
    std::vector<ConcentrationRow> rows;
    bool bounded = false;
    bool boundary_decay = false;
    bool energy_floor = false;
    bool potential_bounded = false;
    bool potential_converges = false;
    bool all() const { return bounded && boundary_decay && energy_floor && potential_bounded && potential_converges; }
};

/// Verdicts over a sequence ordered by increasing n. Sampled proxies: bounded means the largest row
/// stays within twice the first; decay means strictly decreasing; the energy floor requires every
/// minimum to stay above half of the largest one.
inline ConcentrationReport concentration_checks(std::vector<ConcentrationRow> rows, std::string name = "")
{
    require(rows.size() >= 2, ErrorKind::resolution, "concentration checks need at least two rows");
    ConcentrationReport r;
    r.name = std::move(name);
    r.rows = std::move(rows);
    std::vector<double> in, bd, en, pb, pg;
    for (const auto& x : r.rows) {
        in.push_back(x.interior);
        bd.push_back(x.boundary);
        en.push_back(x.energy_min);
        pb.push_back(x.potential_bound);
        pg.push_back(x.potential_gap);
    }
    auto within = [](const std::vector<double>& v) {
        return std::isfinite(numeric::max_abs(v)) && numeric::max_abs(v) <= 2.0 * std::fabs(v.front()) + 1e-300;
    };
    r.bounded = within(in);
    r.boundary_decay = numeric::strictly_decreasing(bd);
    const double emax = *std::max_element(en.begin(), en.end());
    r.energy_floor = std::all_of(en.begin(), en.end(), [&](double e) { return e > 0.0 && e >= 0.5 * emax; });
    r.potential_bounded = within(pb);
    r.potential_converges =
        numeric::max_abs(pg) == 0.0 || (numeric::strictly_decreasing(pg) && pg.back() < pg.front());
    return r;
}

namespace detail {

/// int_0^inf e^{-u} |u + c| du.
inline double transverse_abs(double c) { return c >= 0.0 ? 1.0 + c : 2.0 * std::exp(c) - 1.0 - c; }

}  // namespace detail

/// Concentration row of an assembled solution. Integrals use the covariant time derivative (equal to
/// the plain one up to the bounded potential) and the slab faces |y| = R as the boundary.
inline ConcentrationRow concentration_row(const AssembledSolution& sol)
{
    const auto& ctx = sol.ctx;
    const double a = ctx.sp.a, zeta = ctx.sp.zeta, z2 = zeta * zeta, w2 = ctx.width() * ctx.width();
    const bool nonlinear = ctx.sp.mode == Mode::nonlinear;
    const double m = sol.par.m, c = sol.par.c, q = sol.par.q, unit = m * c * c / q;
    const auto ws = numeric::simpson_weights(sol.z.size(), sol.hz());
    const auto obs = restricted_quantities(sol);
    ConcentrationRow row;
    row.zeta = zeta;
    row.a = a;
    row.theta = ctx.sp.theta_bar;
    row.energy_min = *std::min_element(obs.energy.begin(), obs.energy.end());

    std::vector<double> p0(sol.times.size(), 0.0);
    for (std::size_t k = 0; k < p0.size(); ++k) p0[k] = sol.phi0 ? sol.phi0(sol.times[k]) : 0.0;
    const double ht = sol.times[1] - sol.times[0];
    const auto dp0 = numeric::d1_series4(p0, ht), dslope = numeric::d1_series4(sol.phi_slope, ht);

    const std::size_t nz = sol.z.size();
    for (std::size_t k = 0; k < sol.patches.size(); ++k) {
        const auto& p = sol.patches[k];
        const std::size_t c0 = p.center();
        const auto f = frame_coeffs(ctx, p.taus[c0]);
        auto integrand = [&](std::size_t i) {
            const double z = sol.z[i], Phi = p.phi[c0][i], Th = p.theta[c0][i];
            const double adv = f.sigma_t + f.beta * w2 * z;
            const double time = (f.gamma - Phi) * (f.gamma - Phi) + z2 * adv * adv;
            const double space = (f.gamma * f.beta + Th) * (f.gamma * f.beta + Th) + z2 * w2 * w2 * z * z + z2;
            const double G = nonlinear ? z2 * detail::transverse_abs(w2 * z * z - 2.0 * f.sigma) : 0.0;
            return std::exp(2.0 * f.sigma - w2 * z * z) / std::sqrt(std::numbers::pi) * (time + space + G + 1.0);
        };
        double in = 0.0;
        for (std::size_t i = 0; i < nz; ++i) in += ws[i] * integrand(i);
        row.interior = std::max(row.interior, in);
        row.boundary = std::max(row.boundary, (integrand(0) + integrand(nz - 1)) / a);

        // Potential gates on interior nodes.
        const auto pot = reduced_potential(sol, k);
        const double h = ctx.h_tau(), hz = sol.hz();
        for (std::size_t i = 2; i + 2 < nz; ++i) {
            const double y = a * sol.z[i];
            const double pt = (pot[0][i] - 8.0 * pot[1][i] + 8.0 * pot[3][i] - pot[4][i]) / (12.0 * h);
            const double pz = (pot[2][i - 2] - 8.0 * pot[2][i - 1] + 8.0 * pot[2][i + 1] - pot[2][i + 2]) / (12.0 * hz);
            const double gb_t = unit / a * (pt - f.beta * pz), gb_y = unit / a * pz, pb = unit * pot[2][i];
            row.potential_gap = std::max(row.potential_gap, std::fabs(pb) + std::hypot(gb_t, gb_y));
            const double phi = p0[k] + sol.phi_slope[k] * y + pb;
            const double gt = (dp0[k] + dslope[k] * y - ctx.traj->v(sol.times[k]) * sol.phi_slope[k]) / c + gb_t;
            const double gy = sol.phi_slope[k] + gb_y;
            row.potential_bound = std::max(row.potential_bound, std::fabs(phi) + std::hypot(gt, gy));
        }
    }
    return row;
}

/// Radial profiles psi = a^{-3/2} psi0((x - r)/a) on a sequence theta_n, a_n = theta_n^{-a_power},
/// zeta_n = zeta_over_a a_n (not solutions; only the integrals are checked).
struct SyntheticFamily {
    GroundState profile;
    double N = 8.0;
    double alpha = 0.9;
    std::vector<double> theta, a, zeta;
};

inline SyntheticFamily synthetic_family(const GroundState& profile, double N, double alpha,
                                        const std::vector<double>& thetas, double a_power, double zeta_over_a = 1.0)
{
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::config, "alpha must lie in (0, 1)");
    require(N > 1.5, ErrorKind::config, "decay exponent N must exceed 3/2");
    require(a_power > 0.0 && zeta_over_a > 0.0, ErrorKind::config, "a_power and zeta/a must be positive");
    SyntheticFamily fam;
    fam.profile = profile;
    fam.N = N;
    fam.alpha = alpha;
    for (double th : thetas) {
        require(th >= 1.0, ErrorKind::config, "theta_n must be at least 1");
        if (!fam.theta.empty())
            require(th > fam.theta.back(), ErrorKind::config, "theta_n must increase");
        fam.theta.push_back(th);
        fam.a.push_back(std::pow(th, -a_power));
        fam.zeta.push_back(std::min(1.0, zeta_over_a * fam.a.back()));
    }
    return fam;
}

/// True when 3 - (1 + alpha) N < 0 and a^{-1} theta^{2 - (1 + alpha) N} strictly decreases.
inline bool anthen_holds(const SyntheticFamily& fam)
{
    if (3.0 - (1.0 + fam.alpha) * fam.N >= 0.0) return false;
    std::vector<double> v;
    for (std::size_t n = 0; n < fam.theta.size(); ++n)
        v.push_back(std::pow(fam.theta[n], 2.0 - (1.0 + fam.alpha) * fam.N) / fam.a[n]);
    return numeric::strictly_decreasing(v);
}

/// Rows of a synthetic family moving with the trajectory; |d_t psi| = |v . grad psi| is averaged over
/// directions (factor 1 + beta^2/3, with the largest |beta| of the window).
inline std::vector<ConcentrationRow> synthetic_rows(const SyntheticFamily& fam, const Nonlinearity& nl, double beta_max,
                                                    double mc2 = 1.0)
{
    const auto& gs = fam.profile;
    const double kin = 1.0 + beta_max * beta_max / 3.0, fourpi = 4.0 * std::numbers::pi;
    std::vector<ConcentrationRow> rows;
    for (std::size_t n = 0; n < fam.theta.size(); ++n) {
        const double th = fam.theta[n], z2 = fam.zeta[n] * fam.zeta[n];
        auto dens = [&](double r, bool absolute) {
            const double psi = gs.psi(r), dpsi = gs.dpsi(r), G = nl.g1(psi * psi);
            return z2 * kin * dpsi * dpsi + z2 * (absolute ? std::fabs(G) : G) + psi * psi;
        };
        numeric::QuadOptions qo;
        qo.rel_tol = 1e-10;
        ConcentrationRow row;
        row.zeta = fam.zeta[n];
        row.a = fam.a[n];
        row.theta = th;
        row.interior = fourpi * numeric::integrate([&](double r) { return r * r * dens(r, true); }, 0.0, th, qo);
        row.boundary = fourpi * th * th * dens(th, true) / fam.a[n];
        row.energy_min = 0.5 * mc2 * fourpi * numeric::integrate([&](double r) { return r * r * dens(r, false); }, 0.0, th, qo);
        row.anthen = std::pow(th, 2.0 - (1.0 + fam.alpha) * fam.N) / fam.a[n];
        rows.push_back(row);
    }
    return rows;
}

/// Newton-Einstein quantities of one scale point.
struct NewtonEinsteinRow {
    double energy_dev = nan_value;     ///< sup_t |E_n - gamma m c^2|
    double charge_dev = nan_value;     ///< sup_t |rho_n - q|
    double ergo_dev = nan_value;       ///< sup_t |r_n - r|
    double newton = nan_value;         ///< sup_t |d_t((E_n/c^2) d_t r_n) + rho_n grad phi_inf|
    double m0_mean = nan_value;        ///< mean of M_0 = E_n / (c^2 gamma)
    double m0_flatness = nan_value;    ///< relative standard deviation of M_0
    double energy_defect = nan_value;  ///< sup_t |E_n(t) - E_n(t0) + int rho_n v grad phi_inf|
    double charge_drift = nan_value;   ///< sup_t |rho_n(t) - rho_n(t0)|
    double flux_bound = nan_value;     ///< sup_t |int_{t0}^t boundary flux|
    double rho_crosscheck = nan_value; ///< sup_t |rho_est - rho_n| / |rho_n|, rho_est from M_0 and the trajectory
};

namespace detail {

/// Cumulative integral from index i0 with cubic Lagrange panels (4th order).
inline std::vector<double> cumulative_integral(const std::vector<double>& f, double h, std::size_t i0)
{
    const std::size_t n = f.size();
    auto panel = [&](std::size_t i) {  // int over [t_i, t_{i+1}]
        if (n < 4) return 0.5 * h * (f[i] + f[i + 1]);
        const std::size_t s = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, n - 4);
        // Weights of the cubic through s..s+3 integrated over [i, i+1].
        const double x0 = double(i) - double(s);
        std::array<double, 4> w{};
        for (int k = 0; k < 4; ++k) {
            // Antiderivative of the Lagrange basis l_k on [x0, x0 + 1] by 3-point Gauss (exact for cubics).
            const double g[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
            for (int q = 0; q < 3; ++q) {
                const double x = x0 + 0.5 + 0.5 * g[q];
                double l = 1.0;
                for (int j = 0; j < 4; ++j)
                    if (j != k) l *= (x - j) / double(k - j);
                w[std::size_t(k)] += 0.5 * gw[q] * l;
            }
        }
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += w[std::size_t(k)] * f[s + std::size_t(k)];
        return h * v;
    };
    std::vector<double> out(n, 0.0);
    for (std::size_t i = i0; i + 1 < n; ++i) out[i + 1] = out[i] + panel(i);
    for (std::size_t i = i0; i-- > 0;) out[i] = out[i + 1] - panel(i);
    return out;
}

}  // namespace detail

inline NewtonEinsteinRow newton_einstein_row(const RestrictedObservables& obs, const Trajectory& tr, double m, double q,
                                             std::optional<double> t0 = std::nullopt)
{
    const std::size_t n = obs.t.size();
    require(n >= 5, ErrorKind::resolution, "Newton-Einstein checks need at least 5 time samples");
    const double c = tr.c(), c2 = c * c, h = obs.t[1] - obs.t[0];
    const double tmid = t0.value_or(0.5 * (obs.t.front() + obs.t.back()));
    const std::size_t i0 = std::size_t(std::clamp(std::round((tmid - obs.t.front()) / h), 0.0, double(n - 1)));
    NewtonEinsteinRow r;
    r.energy_dev = r.charge_dev = r.ergo_dev = 0.0;
    std::vector<double> m0(n), mom(n), src(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = obs.t[k], g = tr.gamma(t);
        r.energy_dev = std::max(r.energy_dev, std::fabs(obs.energy[k] - g * m * c2));
        r.charge_dev = std::max(r.charge_dev, std::fabs(obs.charge[k] - q));
        r.ergo_dev = std::max(r.ergo_dev, std::fabs(obs.ergocenter[k] - obs.r_hat[k]));
        m0[k] = obs.energy[k] / (c2 * g);
        src[k] = obs.charge[k] * tr.v(t) * obs.grad_phi[k];
    }
    const auto vn = numeric::d1_series4(obs.ergocenter, h);
    for (std::size_t k = 0; k < n; ++k) mom[k] = obs.energy[k] / c2 * vn[k];
    const auto dmom = numeric::d1_series4(mom, h);
    r.newton = 0.0;
    const std::size_t edge = n >= 13 ? 4 : 0;
    for (std::size_t k = edge; k + edge < n; ++k)
        r.newton = std::max(r.newton, std::fabs(dmom[k] + obs.charge[k] * obs.grad_phi[k]));
    r.m0_mean = numeric::mean(m0);
    r.m0_flatness = numeric::relative_std(m0);
    const auto work = detail::cumulative_integral(src, h, i0);
    r.energy_defect = r.charge_drift = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        r.energy_defect = std::max(r.energy_defect, std::fabs(obs.energy[k] - obs.energy[i0] + work[k]));
        r.charge_drift = std::max(r.charge_drift, std::fabs(obs.charge[k] - obs.charge[i0]));
    }
    if (std::all_of(obs.boundary_flux.begin(), obs.boundary_flux.end(), [](double x) { return std::isfinite(x); })) {
        const auto fl = detail::cumulative_integral(obs.boundary_flux, h, i0);
        r.flux_bound = numeric::max_abs(fl);
    }
    // M_0 gamma^3 dv/dt = -rho grad phi_inf fixes rho wherever the force is not negligible.
    const double gmax = numeric::max_abs(obs.grad_phi);
    if (gmax > 0.0) {
        r.rho_crosscheck = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (std::fabs(obs.grad_phi[k]) < 1e-3 * gmax) continue;
            const double est = -r.m0_mean * tr.d_gamma_v(obs.t[k]) / obs.grad_phi[k];
            r.rho_crosscheck = std::max(r.rho_crosscheck, std::fabs(est - obs.charge[k]) / std::fabs(obs.charge[k]));
        }
    }
    return r;
}

struct NewtonEinsteinReport {
    std::vector<NewtonEinsteinRow> rows;
    double energy_inf_t0 = nan_value;  ///< E_inf(t0), from the finest row
    double rho_inf = nan_value;        ///< from the finest row
};

/// Rows ordered by decreasing zeta; limits are taken from the last (finest) row.
inline NewtonEinsteinReport newton_einstein_report(const std::vector<RestrictedObservables>& obs, const Trajectory& tr,
                                                   const std::vector<ScaleParams>& sps, double q = 1.0,
                                                   std::optional<double> t0 = std::nullopt)
{
    require(obs.size() >= 3 && obs.size() == sps.size(), ErrorKind::resolution,
            "Newton-Einstein report needs at least three matching scale points");
    NewtonEinsteinReport rep;
    for (std::size_t n = 0; n < obs.size(); ++n) rep.rows.push_back(newton_einstein_row(obs[n], tr, sps[n].m, q, t0));
    const auto& fin = obs.back();
    const double h = fin.t[1] - fin.t[0];
    const double tm = t0.value_or(0.5 * (fin.t.front() + fin.t.back()));
    const std::size_t i0 = std::size_t(std::clamp(std::round((tm - fin.t.front()) / h), 0.0, double(fin.t.size() - 1)));
    rep.energy_inf_t0 = fin.energy[i0];
    rep.rho_inf = numeric::mean(fin.charge);
    return rep;
}

/// Everything the sweep needs besides the trajectory and the zeta list.
struct SweepConfig {
    double one_plus = 1.1, two_plus = 2.1, delta = 0.003;
    double m = 1.0, c = 1.0, q = 1.0;
    Mode mode = Mode::nonlinear;
    double gamma0 = 0.0;
    AssemblyGrid grid;
    CharOptions opt;
    std::function<double(double)> phi0;
    std::optional<double> t0;
    bool ablation = true;  ///< also evaluate the residual with phi_b = 0
};

struct SweepRow {
    ScaleParams sp;
    double sup_phi = nan_value;   ///< sup |Phi| over the strip
    double sup_phib = nan_value;  ///< sup |phi_b|
    ResidualNorms kg, kg_ablated{nan_value, nan_value};
    double shape = nan_value;
    NewtonEinsteinRow ne;
    double eminmc = nan_value;
    ConcentrationRow conc;
    RestrictedObservables obs;
    std::string error;  ///< empty on success
    bool ok() const { return error.empty(); }
};

struct SweepSlopes {
    double phi_vs_zeta = nan_value;
    double phib_vs_zeta = nan_value;
    double ergo_vs_R = nan_value;
    double energy_vs_zeta = nan_value;
    double newton_vs_zeta = nan_value;
};

struct SweepReport {
    std::string trajectory;
    Mode mode = Mode::nonlinear;
    std::vector<SweepRow> rows;
    SweepSlopes slopes;
    double energy_inf_t0 = nan_value, rho_inf = nan_value;
    std::optional<ConcentrationReport> concentration;
};

/// One scale point: assembly, residuals, restricted observables and the Newton-Einstein row.
inline SweepRow sweep_row(const Trajectory& tr, const ScaleParams& sp, const SweepConfig& cfg, const Nonlinearity& nl)
{
    SweepRow row;
    row.sp = sp;
    try {
        const auto ctx = make_context(tr, sp, cfg.grid.t_lo, cfg.grid.t_hi, cfg.gamma0, cfg.opt, cfg.q);
        const auto sol = assemble_field(ctx, cfg.grid, cfg.phi0);
        row.sup_phi = row.sup_phib = 0.0;
        const double unit = sol.par.m * sol.par.c * sol.par.c / sol.par.q;
        for (std::size_t k = 0; k < sol.patches.size(); ++k) {
            const auto& p = sol.patches[k];
            for (double v : p.phi[p.center()]) row.sup_phi = std::max(row.sup_phi, std::fabs(v));
            const auto pot = reduced_potential(sol, k);
            for (double v : pot[2]) row.sup_phib = std::max(row.sup_phib, unit * std::fabs(v));
        }
        row.kg = kg_residual(sol, nl);
        if (cfg.ablation) row.kg_ablated = kg_residual(sol, nl, false);
        row.shape = shape_deviation(sol);
        row.obs = restricted_quantities(sol);
        row.eminmc = row.obs.eminmc;
        row.ne = newton_einstein_row(row.obs, tr, sp.m, cfg.q, cfg.t0);
        row.conc = concentration_row(sol);
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

/// Full sweep over a strictly decreasing zeta list: rows run concurrently, slopes use the rows that
/// succeeded (at least three).
inline SweepReport convergence_sweep(const Trajectory& tr, const std::vector<double>& zetas, const SweepConfig& cfg,
                                     const Nonlinearity& nl)
{
    require(zetas.size() >= 3, ErrorKind::config, "a sweep needs at least three zeta values");
    const auto sps = scale_sequence(zetas, cfg.one_plus, cfg.two_plus, cfg.delta, cfg.m, cfg.c, cfg.mode);
    SweepReport rep;
    rep.trajectory = tr.describe();
    rep.mode = cfg.mode;
    rep.rows.resize(sps.size());
    parallel_for(sps.size(), [&](std::size_t n) { rep.rows[n] = sweep_row(tr, sps[n], cfg, nl); });

    std::vector<double> z, R, phi, phib, ergo, en, nw;
    std::vector<ConcentrationRow> conc;
    const SweepRow* finest = nullptr;
    for (const auto& r : rep.rows) {
        if (!r.ok()) continue;
        z.push_back(r.sp.zeta);
        R.push_back(r.sp.R);
        phi.push_back(r.sup_phi);
        phib.push_back(r.sup_phib);
        ergo.push_back(r.ne.ergo_dev);
        en.push_back(r.ne.energy_dev);
        nw.push_back(r.ne.newton);
        conc.push_back(r.conc);
        finest = &r;
    }
    if (z.size() >= 3) {
        auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
            for (double v : y)
                if (!(v > 0.0)) return nan_value;
            return numeric::loglog_slope(x, y);
        };
        rep.slopes.phi_vs_zeta = slope(z, phi);
        rep.slopes.phib_vs_zeta = slope(z, phib);
        rep.slopes.ergo_vs_R = slope(R, ergo);
        rep.slopes.energy_vs_zeta = slope(z, en);
        rep.slopes.newton_vs_zeta = slope(z, nw);
    }
    if (finest) {
        const auto& o = finest->obs;
        const double h = o.t[1] - o.t[0];
        const double tm = cfg.t0.value_or(0.5 * (o.t.front() + o.t.back()));
        const std::size_t i0 = std::size_t(std::clamp(std::round((tm - o.t.front()) / h), 0.0, double(o.t.size() - 1)));
        rep.energy_inf_t0 = o.energy[i0];
        rep.rho_inf = numeric::mean(o.charge);
    }
    if (conc.size() >= 2) rep.concentration = concentration_checks(conc, "assembled");
    return rep;
}

}  // namespace kgconc
