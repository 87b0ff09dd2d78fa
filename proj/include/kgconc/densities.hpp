#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "kgconc/error.hpp"
#include "kgconc/field.hpp"
#include "kgconc/nonlinearity.hpp"
#include "kgconc/numeric/parallel.hpp"
#include "kgconc/numeric/quadrature.hpp"

namespace kgconc {

/// Noether densities on the grid of a FieldFrame. Vector fields hold one array per spatial
/// component; a 1D frame only fills component 0.
struct DensityGrid {
    int dim = 3;
    Axis t;
    std::array<Axis, 3> x;
    std::vector<double> rho, energy, lagrangian;
    std::array<std::vector<double>, 3> current, momentum, force;

    std::size_t size() const { return rho.size(); }
    std::size_t index(std::size_t it, std::size_t i, std::size_t j, std::size_t k) const
    {
        return ((it * x[0].n + i) * x[1].n + j) * x[2].n + k;
    }
};

namespace detail {

/// Flat-index stride of axis 0 (time) or 1..3 (space).
inline std::size_t stride(const std::array<std::size_t, 4>& n, int ax)
{
    std::size_t s = 1;
    for (int b = 3; b > ax; --b) s *= n[std::size_t(b)];
    return s;
}

inline std::array<std::size_t, 4> dims_of(const Axis& t, const std::array<Axis, 3>& x)
{
    return {t.n, x[0].n, x[1].n, x[2].n};
}

inline std::array<std::size_t, 4> unflatten(std::size_t idx, const std::array<std::size_t, 4>& n)
{
    std::array<std::size_t, 4> c{};
    for (int b = 3; b >= 0; --b) {
        c[std::size_t(b)] = idx % n[std::size_t(b)];
        idx /= n[std::size_t(b)];
    }
    return c;
}

/// Second-order derivative along one axis, one-sided at the ends; zero on singleton axes.
template <class T>
T fd2(const std::vector<T>& f, std::size_t idx, std::size_t pos, std::size_t n, std::size_t st, double h)
{
    if (n == 1) return T(0);
    if (pos == 0) return (-3.0 * f[idx] + 4.0 * f[idx + st] - f[idx + 2 * st]) / (2.0 * h);
    if (pos == n - 1) return (3.0 * f[idx] - 4.0 * f[idx - st] + f[idx - 2 * st]) / (2.0 * h);
    return (f[idx + st] - f[idx - st]) / (2.0 * h);
}

/// Potential G and its derivative for the frame's geometry. 1D frames use the transversally
/// integrated logarithmic law, which exists only for the Gaussian family.
struct FrameNonlinearity {
    const Nonlinearity& nl;
    int dim;
    double a;

    FrameNonlinearity(const Nonlinearity& n, int d, double size) : nl(n), dim(d), a(size)
    {
        if (dim == 1 && nl.mode == Mode::nonlinear)
            require(nl.gs.kind == Family::gaussian, ErrorKind::parameter_domain,
                    "1D-reduced frames require the logarithmic nonlinearity");
    }
    double g(double s) const
    {
        if (nl.mode == Mode::linear) return 0.0;
        return dim == 1 ? log1d_g(s, a) : nl.eval(s, a).g;
    }
};

/// Covariant time derivative and spatial gradient of psi at every sample.
struct FieldDerivatives {
    std::vector<cplx> dt;
    std::array<std::vector<cplx>, 3> grad;
    std::array<std::vector<double>, 3> grad_phi;
};

inline FieldDerivatives field_derivatives(const FieldFrame& f)
{
    const auto n = dims_of(f.t, f.x);
    const double hs[4] = {f.t.h, f.x[0].h, f.x[1].h, f.x[2].h};
    const double qc = f.par.q / f.par.chi;
    FieldDerivatives d;
    d.dt.resize(f.size());
    for (int k = 0; k < 3; ++k) {
        d.grad[std::size_t(k)].assign(f.size(), cplx(0.0, 0.0));
        d.grad_phi[std::size_t(k)].assign(f.size(), 0.0);
    }
    parallel_for(f.size(), [&](std::size_t idx) {
        const auto c = unflatten(idx, n);
        d.dt[idx] = fd2(f.psi, idx, c[0], n[0], stride(n, 0), hs[0]) + cplx(0.0, qc * f.phi[idx]) * f.psi[idx];
        for (int k = 0; k < f.dim; ++k) {
            const int ax = k + 1;
            d.grad[std::size_t(k)][idx] = fd2(f.psi, idx, c[std::size_t(ax)], n[std::size_t(ax)], stride(n, ax), hs[ax]);
            d.grad_phi[std::size_t(k)][idx] =
                fd2(f.phi, idx, c[std::size_t(ax)], n[std::size_t(ax)], stride(n, ax), hs[ax]);
        }
    });
    return d;
}

inline void require_resolution(const FieldFrame& f, std::size_t min_t)
{
    require(f.t.n >= min_t, ErrorKind::resolution, "too few time samples");
    for (int k = 0; k < f.dim; ++k)
        require(f.x[std::size_t(k)].n >= 5, ErrorKind::resolution, "too few samples along a spatial axis");
}

}  // namespace detail

/// Charge, current, energy, momentum, force and Lagrangian densities. Time derivatives enter
/// through the gauge-covariant combination d_t psi + i (q/chi) phi psi.
inline DensityGrid densities(const FieldFrame& f, const Nonlinearity& nl)
{
    f.validate();
    detail::require_resolution(f, 3);
    const detail::FrameNonlinearity gnl(nl, f.dim, f.par.a);
    const auto d = detail::field_derivatives(f);
    const double m = f.par.m, c = f.par.c, q = f.par.q, chi = f.par.chi;
    const double k0sq = f.par.kappa0() * f.par.kappa0();
    const double pre = chi * chi / (2.0 * m);

    DensityGrid g;
    g.dim = f.dim;
    g.t = f.t;
    g.x = f.x;
    const std::size_t n = f.size();
    g.rho.resize(n);
    g.energy.resize(n);
    g.lagrangian.resize(n);
    for (int k = 0; k < 3; ++k) {
        g.current[std::size_t(k)].assign(n, 0.0);
        g.momentum[std::size_t(k)].assign(n, 0.0);
        g.force[std::size_t(k)].assign(n, 0.0);
    }
    parallel_for(n, [&](std::size_t i) {
        const cplx psi = f.psi[i];
        const cplx dt = d.dt[i];
        const double s = std::norm(psi);
        double grad2 = 0.0;
        for (int k = 0; k < f.dim; ++k) grad2 += std::norm(d.grad[std::size_t(k)][i]);
        const double gval = gnl.g(s);
        const double rho = -(chi * q / (m * c * c)) * std::imag(std::conj(psi) * dt);
        g.rho[i] = rho;
        g.energy[i] = pre * (std::norm(dt) / (c * c) + grad2 + gval + k0sq * s);
        g.lagrangian[i] = pre * (std::norm(dt) / (c * c) - grad2 - k0sq * s - gval);
        for (int k = 0; k < f.dim; ++k) {
            const cplx gk = d.grad[std::size_t(k)][i];
            g.current[std::size_t(k)][i] = (chi * q / m) * std::imag(std::conj(psi) * gk);
            g.momentum[std::size_t(k)][i] = -(chi * chi / (m * c * c)) * std::real(dt * std::conj(gk));
            g.force[std::size_t(k)][i] = -rho * d.grad_phi[std::size_t(k)][i];
        }
    });
    return g;
}

struct ConservationResiduals {
    double continuity = 0.0;
    double energy = 0.0;
    double momentum = 0.0;
};

/// Max-norm of the discrete continuity, energy and momentum balance laws over the interior
/// (two cells away from every edge of the block).
inline ConservationResiduals conservation_residuals(const FieldFrame& f, const Nonlinearity& nl)
{
    f.validate();
    detail::require_resolution(f, 5);
    const auto dg = densities(f, nl);
    const auto d = detail::field_derivatives(f);
    const auto n = detail::dims_of(f.t, f.x);
    const double hs[4] = {f.t.h, f.x[0].h, f.x[1].h, f.x[2].h};
    const double c2 = f.par.c * f.par.c;
    const double pre = f.par.chi * f.par.chi / (2.0 * f.par.m);
    const int dim = f.dim;

    // Stress part (chi^2/2m)(d_j psi d_k psi* + c.c.) of the momentum flux.
    std::array<std::array<std::vector<double>, 3>, 3> stress;
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
            auto& s = stress[std::size_t(j)][std::size_t(k)];
            s.resize(f.size());
            for (std::size_t i = 0; i < f.size(); ++i)
                s[i] = 2.0 * pre * std::real(d.grad[std::size_t(j)][i] * std::conj(d.grad[std::size_t(k)][i]));
        }

    auto deriv = [&](const std::vector<double>& v, std::size_t idx, const std::array<std::size_t, 4>& c, int ax) {
        return detail::fd2(v, idx, c[std::size_t(ax)], n[std::size_t(ax)], detail::stride(n, ax), hs[ax]);
    };
    auto interior = [&](const std::array<std::size_t, 4>& c) {
        if (c[0] < 2 || c[0] + 2 >= n[0]) return false;
        for (int k = 0; k < dim; ++k)
            if (c[std::size_t(k + 1)] < 2 || c[std::size_t(k + 1)] + 2 >= n[std::size_t(k + 1)]) return false;
        return true;
    };

    ConservationResiduals r;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const auto c = detail::unflatten(idx, n);
        if (!interior(c)) continue;
        double cont = deriv(dg.rho, idx, c, 0);
        double en = deriv(dg.energy, idx, c, 0);
        for (int k = 0; k < dim; ++k) {
            cont += deriv(dg.current[std::size_t(k)], idx, c, k + 1);
            en += c2 * deriv(dg.momentum[std::size_t(k)], idx, c, k + 1) +
                  d.grad_phi[std::size_t(k)][idx] * dg.current[std::size_t(k)][idx];
        }
        r.continuity = std::max(r.continuity, std::fabs(cont));
        r.energy = std::max(r.energy, std::fabs(en));
        for (int k = 0; k < dim; ++k) {
            double mom = deriv(dg.momentum[std::size_t(k)], idx, c, 0) - dg.force[std::size_t(k)][idx] +
                         deriv(dg.lagrangian, idx, c, k + 1);
            for (int j = 0; j < dim; ++j) mom += deriv(stress[std::size_t(j)][std::size_t(k)], idx, c, j + 1);
            r.momentum = std::max(r.momentum, std::fabs(mom));
        }
    }
    return r;
}

/// Integration region: the whole grid, or the ball |x - center| <= radius. On a 1D frame the
/// ball becomes the slab |x - center| <= radius, the transverse plane being integrated exactly.
struct Domain {
    bool all = true;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;

    static Domain whole() { return {}; }
    static Domain ball(const std::array<double, 3>& c, double r) { return Domain{false, c, r}; }
};

struct Totals {
    double charge = 0.0;
    double energy = 0.0;
    std::array<double, 3> momentum{0.0, 0.0, 0.0};
    std::array<double, 3> current{0.0, 0.0, 0.0};
};

/// Trapezoidal integrals over one time slice; the total energy is the plain integral of E.
inline Totals totals(const DensityGrid& g, std::size_t it, const Domain& dom = Domain::whole())
{
    require(it < g.t.n, ErrorKind::domain, "time slice outside the grid");
    std::array<std::vector<double>, 3> w;
    for (int k = 0; k < 3; ++k) {
        const Axis& ax = g.x[std::size_t(k)];
        if (k < g.dim) {
            if (!dom.all) {
                const double cc = dom.center[std::size_t(k)];
                require(cc - dom.radius >= ax.lo - 1e-12 * ax.h && cc + dom.radius <= ax.hi() + 1e-12 * ax.h,
                        ErrorKind::domain, "integration ball exceeds the grid");
            }
            w[std::size_t(k)] = numeric::trapezoid_weights(ax.n, ax.h);
        } else {
            w[std::size_t(k)].assign(ax.n, 1.0);
        }
    }
    Totals t;
    for (std::size_t i = 0; i < g.x[0].n; ++i)
        for (std::size_t j = 0; j < g.x[1].n; ++j)
            for (std::size_t k = 0; k < g.x[2].n; ++k) {
                if (!dom.all) {
                    const std::size_t ids[3] = {i, j, k};
                    double r2 = 0.0;
                    for (int b = 0; b < g.dim; ++b) {
                        const double dx = g.x[std::size_t(b)].at(ids[b]) - dom.center[std::size_t(b)];
                        r2 += dx * dx;
                    }
                    if (r2 > dom.radius * dom.radius) continue;
                }
                const double wt = w[0][i] * w[1][j] * w[2][k];
                const std::size_t idx = g.index(it, i, j, k);
                t.charge += wt * g.rho[idx];
                t.energy += wt * g.energy[idx];
                for (int b = 0; b < 3; ++b) {
                    t.momentum[std::size_t(b)] += wt * g.momentum[std::size_t(b)][idx];
                    t.current[std::size_t(b)] += wt * g.current[std::size_t(b)][idx];
                }
            }
    return t;
}

/// One CSV row per sample of time slice it: coordinates, rho, E, J, P, F.
inline void write_density_csv(std::ostream& os, const DensityGrid& g, std::size_t it)
{
    os << "t,x,y,z,rho,energy,jx,jy,jz,px,py,pz,fx,fy,fz\n";
    os.precision(17);
    for (std::size_t i = 0; i < g.x[0].n; ++i)
        for (std::size_t j = 0; j < g.x[1].n; ++j)
            for (std::size_t k = 0; k < g.x[2].n; ++k) {
                const std::size_t idx = g.index(it, i, j, k);
                os << g.t.at(it) << ',' << g.x[0].at(i) << ',' << (g.dim == 3 ? g.x[1].at(j) : 0.0) << ','
                   << (g.dim == 3 ? g.x[2].at(k) : 0.0) << ',' << g.rho[idx] << ',' << g.energy[idx];
                for (const auto* v : {&g.current, &g.momentum, &g.force})
                    for (int b = 0; b < 3; ++b) os << ',' << (*v)[std::size_t(b)][idx];
                os << '\n';
            }
}

}  // namespace kgconc
