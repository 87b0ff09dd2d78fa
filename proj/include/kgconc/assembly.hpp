#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <ostream>
#include <vector>

#include "kgconc/characteristics.hpp"
#include "kgconc/error.hpp"
#include "kgconc/field.hpp"
#include "kgconc/nonlinearity.hpp"
#include "kgconc/numeric/parallel.hpp"
#include "kgconc/numeric/quadrature.hpp"

namespace kgconc {

/// Sampling of the moving-frame strip: uniform physical times, uniform z nodes including z = 0.
struct AssemblyGrid {
    double t_lo = -3.0;
    double t_hi = 3.0;
    std::size_t time_samples = 161;  ///< the Newton residual needs h <= 0.04 to clear its FD floor
    std::size_t z_per_unit = 64;
    std::size_t patch_half = 4;  ///< tau columns on each side of a time sample
};

/// Phi, Theta and int_0^z Theta on the tau columns around one time sample.
struct AssembledPatch {
    double t = 0.0;
    std::vector<double> taus;
    std::vector<std::vector<double>> phi, theta, integral;  ///< [column][z node]
    std::size_t center() const { return taus.size() / 2; }
};

struct AssembledSolution {
    CharContext ctx;
    PhysParams par;
    std::function<double(double)> phi0;
    std::vector<double> times;
    std::vector<double> z;
    std::vector<AssembledPatch> patches;
    std::vector<double> s_phase;   ///< accelerating phase s(t)
    std::vector<double> phi_slope; ///< d phi_ac / dx

    double hz() const { return z[1] - z[0]; }
    double zeta() const { return ctx.sp.zeta; }
};

namespace detail {

/// Nodes of the 4-point Gauss rule on every z cell, in cell order.
inline void cell_gauss_nodes(const std::vector<double>& z, std::vector<double>& x, std::vector<double>& w)
{
    x.clear();
    w.clear();
    std::vector<double> cx, cw;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        numeric::GaussPanel<4>::nodes(z[i], z[i + 1], cx, cw);
        x.insert(x.end(), cx.begin(), cx.end());
        w.insert(w.end(), cw.begin(), cw.end());
    }
}

inline AssembledPatch build_patch(double t, const std::vector<double>& z, const CharContext& ctx, std::size_t half)
{
    AssembledPatch p;
    p.t = t;
    const double tau_c = ctx.sp.c * t / ctx.sp.a, h = ctx.h_tau();
    for (std::size_t j = 0; j < 2 * half + 1; ++j) p.taus.push_back(tau_c + (double(j) - double(half)) * h);
    std::vector<double> gx, gw;
    cell_gauss_nodes(z, gx, gw);
    std::vector<double> nodes = z;
    nodes.insert(nodes.end(), gx.begin(), gx.end());
    const auto phi = phi_patch(p.taus, nodes, ctx);
    const std::size_t n = z.size(), zero = n / 2;
    for (std::size_t j = 0; j < p.taus.size(); ++j) {
        const auto f = frame_coeffs(ctx, p.taus[j]);
        std::vector<double> th(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            th[i] = theta_from(phi[j][i], f.beta, f.gamma, q_value(ctx, f, nodes[i])).theta;
        // Cumulative Gauss sums outward from z = 0.
        std::vector<double> I(n, 0.0);
        for (std::size_t i = zero; i + 1 < n; ++i) {
            double cell = 0.0;
            for (std::size_t k = 0; k < 4; ++k) cell += gw[4 * i + k] * th[n + 4 * i + k];
            I[i + 1] = I[i] + cell;
        }
        for (std::size_t i = zero; i-- > 0;) {
            double cell = 0.0;
            for (std::size_t k = 0; k < 4; ++k) cell += gw[4 * i + k] * th[n + 4 * i + k];
            I[i] = I[i + 1] - cell;
        }
        p.phi.emplace_back(phi[j].begin(), phi[j].begin() + std::ptrdiff_t(n));
        p.theta.emplace_back(th.begin(), th.begin() + std::ptrdiff_t(n));
        p.integral.push_back(std::move(I));
    }
    return p;
}

}  // namespace detail

/// Builds the Gaussian-shaped solution along the trajectory held by ctx: Phi and Theta on every
/// tau column, phases S = -int Theta / zeta, and the accelerating phase s(t).
inline AssembledSolution assemble_field(const CharContext& ctx, const AssemblyGrid& grid = {},
                                        std::function<double(double)> phi0 = {})
{
    require(grid.time_samples >= 5, ErrorKind::resolution, "need at least 5 time samples");
    require(grid.z_per_unit >= 64, ErrorKind::resolution, "need at least 64 points per unit z");
    require(grid.patch_half >= 4, ErrorKind::resolution, "patches need 4 tau columns per side");
    AssembledSolution sol;
    sol.ctx = ctx;
    sol.par = ctx.sp.phys(ctx.q);
    sol.phi0 = std::move(phi0);
    const double th = ctx.sp.theta_bar;
    const std::size_t nh = std::size_t(std::ceil(th * double(grid.z_per_unit)));
    for (std::size_t i = 0; i <= 2 * nh; ++i) sol.z.push_back(th * (double(i) - double(nh)) / double(nh));
    sol.z[nh] = 0.0;
    for (std::size_t k = 0; k < grid.time_samples; ++k)
        sol.times.push_back(grid.t_lo + (grid.t_hi - grid.t_lo) * double(k) / double(grid.time_samples - 1));
    sol.patches.resize(grid.time_samples);
    parallel_for(grid.time_samples, [&](std::size_t k) {
        sol.patches[k] = detail::build_patch(sol.times[k], sol.z, ctx, grid.patch_half);
    });
    for (double t : sol.times) {
        const auto acc = accelerating_potential(t, 0.0, *ctx.traj, sol.phi0, sol.par.m, sol.par.q, sol.par.chi);
        sol.s_phase.push_back(acc.s_phase);
        sol.phi_slope.push_back(acc.phi_ac_slope);
    }
    return sol;
}

/// Moving-frame fields at one sample: amplitude, phases and potentials.
struct AssembledPoint {
    double tau, z, y;
    double Psi;        ///< pi^{-1/4} e^{sigma - w^2 z^2 / 2}
    double Phi, Theta, S;
    double phi_b;      ///< balancing potential
    double phi;        ///< phi_ac + phi_b
    cplx psi;          ///< psi_1D
};

/// Evaluates the center column of patch k at node i. d_tau int Theta uses the 5-point stencil.
inline AssembledPoint assembled_point(const AssembledSolution& sol, std::size_t k, std::size_t i)
{
    const auto& p = sol.patches[k];
    const auto& ctx = sol.ctx;
    const std::size_t c = p.center();
    const double h = ctx.h_tau();
    const auto f = frame_coeffs(ctx, p.taus[c]);
    AssembledPoint r;
    r.tau = p.taus[c];
    r.z = sol.z[i];
    r.y = ctx.sp.a * r.z;
    const double w = ctx.width();
    r.Psi = std::pow(std::numbers::pi, -0.25) * std::exp(f.sigma - 0.5 * w * w * r.z * r.z);
    r.Phi = p.phi[c][i];
    r.Theta = p.theta[c][i];
    r.S = -p.integral[c][i] / ctx.sp.zeta;
    const double dI = (p.integral[c - 2][i] - 8.0 * p.integral[c - 1][i] + 8.0 * p.integral[c + 1][i] -
                       p.integral[c + 2][i]) /
                      (12.0 * h);
    r.phi_b = sol.par.m * sol.par.c * sol.par.c / sol.par.q * (r.Phi - dI + f.beta * r.Theta);
    const double t = sol.times[k];
    const auto& tr = *ctx.traj;
    r.phi = (sol.phi0 ? sol.phi0(t) : 0.0) + sol.phi_slope[k] * r.y + r.phi_b;
    const double w0 = sol.par.omega0(), c2 = sol.par.c * sol.par.c;
    const double shat = w0 / c2 * tr.gamma(t) * tr.v(t) * r.y - sol.s_phase[k] - r.S;
    r.psi = std::polar(r.Psi / std::sqrt(ctx.sp.a), shat);
    return r;
}

/// The assembled field as a moving-frame FieldFrame: axis 0 is y = x - r(t), time axis the samples.
inline FieldFrame assembled_frame(const AssembledSolution& sol)
{
    const std::size_t nt = sol.times.size(), nz = sol.z.size();
    const double a = sol.ctx.sp.a;
    FieldFrame f = make_frame(1, Axis{sol.times.front(), sol.times[1] - sol.times[0], nt},
                              {Axis{a * sol.z.front(), a * sol.hz(), nz}, Axis{}, Axis{}}, sol.par);
    f.frame = FrameKind::moving;
    f.note = "trajectory:" + sol.ctx.traj->describe();
    for (std::size_t k = 0; k < nt; ++k)
        for (std::size_t i = 0; i < nz; ++i) {
            const auto p = assembled_point(sol, k, i);
            f.psi[f.index(k, i, 0, 0)] = p.psi;
            f.phi[f.index(k, i, 0, 0)] = p.phi;
        }
    return f;
}

/// Reduced balancing potential q phi_b / (m c^2) = Phi - d_tau int Theta + beta Theta on the five
/// center columns of patch k, indexed [column - center + 2][z node].
inline std::vector<std::vector<double>> reduced_potential(const AssembledSolution& sol, std::size_t k)
{
    const auto& p = sol.patches[k];
    const std::size_t c = p.center(), nz = sol.z.size();
    const double h = sol.ctx.h_tau();
    std::vector<std::vector<double>> pot(5, std::vector<double>(nz));
    for (int dj = -2; dj <= 2; ++dj) {
        const std::size_t j = std::size_t(int(c) + dj);
        const double beta = frame_coeffs(sol.ctx, p.taus[j]).beta;
        const auto& I = p.integral;
        for (std::size_t i = 0; i < nz; ++i) {
            const double dI = (I[j - 2][i] - 8.0 * I[j - 1][i] + 8.0 * I[j + 1][i] - I[j + 2][i]) / (12.0 * h);
            pot[std::size_t(dj + 2)][i] = p.phi[j][i] - dI + beta * p.theta[j][i];
        }
    }
    return pot;
}

struct ResidualNorms {
    double linf = 0.0;
    double l2 = 0.0;  ///< root mean square over the sampled interior
};

/// Residual of the rescaled moving-frame equation
///   -(zeta d_tau + i Phi - i gamma - beta zeta d_z)^2 Psi + (zeta d_z - i Z + i beta gamma)^2 Psi - zeta^2 G'(Psi^2) Psi - Psi
/// evaluated as an operator on w = Psi e^{-iS} with potential q phi_b / (m c^2). Psi derivatives are
/// analytic; S and the potential are differentiated with 4th-order central differences. Norms are
/// relative to max Psi. `balancing = false` drops the balancing potential (ablation).
inline ResidualNorms kg_residual(const AssembledSolution& sol, const Nonlinearity& nl, bool balancing = true)
{
    require(sol.z.size() >= 9 && 1.0 / sol.hz() >= 64.0 * (1 - 1e-12), ErrorKind::resolution,
            "residual needs at least 64 points per unit z");
    if (nl.mode == Mode::nonlinear)
        require(nl.gs.kind == Family::gaussian, ErrorKind::parameter_domain,
                "the moving-frame residual uses the logarithmic nonlinearity");
    const auto& ctx = sol.ctx;
    const double zeta = ctx.sp.zeta, h = ctx.h_tau(), hz = sol.hz();
    const double w2 = ctx.width() * ctx.width();
    const bool nonlinear = nl.mode == Mode::nonlinear;
    const std::size_t nz = sol.z.size();
    std::vector<double> linf(sol.patches.size(), 0.0), sq(sol.patches.size(), 0.0), pmax(sol.patches.size(), 0.0);
    std::vector<std::size_t> count(sol.patches.size(), 0);

    parallel_for(sol.patches.size(), [&](std::size_t k) {
        const auto& p = sol.patches[k];
        const std::size_t c = p.center();
        auto d1 = [](double fm2, double fm1, double fp1, double fp2, double step) {
            return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step);
        };
        auto d2 = [](double fm2, double fm1, double f0, double fp1, double fp2, double step) {
            return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * step * step);
        };
        const auto pot = balancing ? reduced_potential(sol, k) : std::vector<std::vector<double>>(5, std::vector<double>(nz, 0.0));
        const auto f = frame_coeffs(ctx, p.taus[c]);
        auto S = [&](std::size_t j, std::size_t i) { return -p.integral[j][i] / zeta; };
        auto Sz = [&](std::size_t j, std::size_t i) { return -p.theta[j][i] / zeta; };
        for (std::size_t i = 2; i + 2 < nz; ++i) {
            const double z = sol.z[i];
            const double Psi = std::pow(std::numbers::pi, -0.25) * std::exp(f.sigma - 0.5 * w2 * z * z);
            const double Pt = f.sigma_t * Psi, Pz = -w2 * z * Psi;
            const double Ptt = (f.sigma_tt + f.sigma_t * f.sigma_t) * Psi, Pzz = (w2 * w2 * z * z - w2) * Psi;
            const double Ptz = -w2 * z * f.sigma_t * Psi;
            const double st = d1(S(c - 2, i), S(c - 1, i), S(c + 1, i), S(c + 2, i), h);
            const double stt = d2(S(c - 2, i), S(c - 1, i), S(c, i), S(c + 1, i), S(c + 2, i), h);
            const double sz = Sz(c, i);
            const double szz = d1(Sz(c, i - 2), Sz(c, i - 1), Sz(c, i + 1), Sz(c, i + 2), hz);
            const double stz = d1(Sz(c - 2, i), Sz(c - 1, i), Sz(c + 1, i), Sz(c + 2, i), h);
            const cplx I(0.0, 1.0);
            const cplx Wt = Pt - I * st * Psi, Wz = Pz - I * sz * Psi;
            const cplx Wtt = Ptt - 2.0 * I * st * Pt - (I * stt + st * st) * Psi;
            const cplx Wzz = Pzz - 2.0 * I * sz * Pz - (I * szz + sz * sz) * Psi;
            const cplx Wtz = Ptz - I * sz * Pt - I * st * Pz - (I * stz + st * sz) * Psi;
            const double u = pot[2][i] - f.gamma;
            const double ut = d1(pot[0][i], pot[1][i], pot[3][i], pot[4][i], h) - f.gamma_t;
            const double uz = d1(pot[2][i - 2], pot[2][i - 1], pot[2][i + 1], pot[2][i + 2], hz);
            const cplx Dw = zeta * (Wt - f.beta * Wz);
            const cplx DDw = zeta * zeta * (Wtt - f.beta_t * Wz - 2.0 * f.beta * Wtz + f.beta * f.beta * Wzz);
            const double Du = zeta * (ut - f.beta * uz);
            const cplx X2 = DDw + I * Du * Psi + 2.0 * I * u * Dw - u * u * Psi;
            const cplx Y2 = zeta * zeta * Wzz + 2.0 * I * f.beta * f.gamma * zeta * Wz - f.beta * f.beta * f.gamma * f.gamma * Psi;
            const double gp = nonlinear ? -2.0 * f.sigma + w2 * z * z - 1.0 : 0.0;
            const cplx R = -X2 + Y2 - zeta * zeta * gp * Psi - Psi;
            const double r = std::abs(R);
            linf[k] = std::max(linf[k], r);
            sq[k] += r * r;
            ++count[k];
            pmax[k] = std::max(pmax[k], Psi);
        }
    });
    ResidualNorms out;
    double total = 0, ps = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < linf.size(); ++k) {
        out.linf = std::max(out.linf, linf[k]);
        total += sq[k];
        n += count[k];
        ps = std::max(ps, pmax[k]);
    }
    out.linf /= ps;
    out.l2 = std::sqrt(total / double(n)) / ps;
    return out;
}

/// Max over all samples of | |psi_1D| a^{1/2} e^{-sigma} - pi^{-1/4} e^{-w^2 z^2/2} |.
inline double shape_deviation(const AssembledSolution& sol)
{
    double worst = 0.0;
    const double w2 = sol.ctx.width() * sol.ctx.width();
    for (std::size_t k = 0; k < sol.patches.size(); ++k) {
        const auto f = frame_coeffs(sol.ctx, sol.patches[k].taus[sol.patches[k].center()]);
        for (std::size_t i = 0; i < sol.z.size(); ++i) {
            const auto p = assembled_point(sol, k, i);
            const double z = sol.z[i];
            worst = std::max(worst, std::fabs(std::abs(p.psi) * std::sqrt(sol.ctx.sp.a) * std::exp(-f.sigma) -
                                              std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * w2 * z * z)));
        }
    }
    return worst;
}

/// Line densities of the assembled field from the exact moving-frame identities (no differencing of
/// the oscillating lab samples). Per unit length along the trajectory.
struct LineDensities {
    std::vector<double> rho, current, energy, momentum;
};

inline LineDensities assembled_densities(const AssembledSolution& sol, std::size_t k)
{
    const auto& ctx = sol.ctx;
    const auto& p = sol.patches[k];
    const std::size_t c = p.center();
    const auto f = frame_coeffs(ctx, p.taus[c]);
    const double zeta2 = ctx.sp.zeta * ctx.sp.zeta, w2 = ctx.width() * ctx.width();
    const double m = sol.par.m, cc = sol.par.c, q = sol.par.q, a = ctx.sp.a;
    const bool nonlinear = ctx.sp.mode == Mode::nonlinear;
    LineDensities d;
    for (std::size_t i = 0; i < sol.z.size(); ++i) {
        const double z = sol.z[i];
        const double Psi2 = std::exp(2.0 * f.sigma - w2 * z * z) / std::sqrt(std::numbers::pi) / a;
        const double Phi = p.phi[c][i], Th = p.theta[c][i];
        const double adv = f.sigma_t + f.beta * w2 * z;
        const double g = nonlinear ? w2 * z * z - 2.0 * f.sigma : 0.0;
        d.rho.push_back(q * (f.gamma - Phi) * Psi2);
        d.current.push_back(cc * q * (f.gamma * f.beta + Th) * Psi2);
        d.energy.push_back(0.5 * m * cc * cc * Psi2 *
                           ((Phi - f.gamma) * (Phi - f.gamma) + (f.gamma * f.beta + Th) * (f.gamma * f.beta + Th) + 1.0 +
                            zeta2 * (adv * adv + w2 * w2 * z * z + g)));
        d.momentum.push_back(m * cc * Psi2 * ((f.gamma - Phi) * (f.gamma * f.beta + Th) + zeta2 * adv * w2 * z));
    }
    return d;
}

/// CSV of the center columns: t, tau, z, Re psi, Im psi, phi, Phi, Z, S.
inline void write_assembled_csv(std::ostream& os, const AssembledSolution& sol)
{
    os << "t,tau,z,re_psi,im_psi,phi,Phi,Z,S\n";
    os.precision(17);
    for (std::size_t k = 0; k < sol.patches.size(); ++k)
        for (std::size_t i = 0; i < sol.z.size(); ++i) {
            const auto p = assembled_point(sol, k, i);
            os << sol.times[k] << ',' << p.tau << ',' << p.z << ',' << p.psi.real() << ',' << p.psi.imag() << ','
               << p.phi << ',' << p.Phi << ',' << p.Theta << ',' << p.S << '\n';
        }
}

}  // namespace kgconc
