#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "kgconc/error.hpp"
#include "kgconc/field.hpp"
#include "kgconc/numeric/parallel.hpp"
#include "kgconc/rest_states.hpp"

namespace kgconc {

/// A rest state set in uniform motion with velocity v.
struct BoostSpec {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    double omega = 1.0;             ///< rest-frame frequency
    const RestState* rest = nullptr;
    double a = 1.0;
    double charge_norm = 1.0;       ///< omega0 / omega, the squared amplitude factor

    double speed() const { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
};

struct Kinematics {
    double beta = 0.0;
    double gamma = 1.0;
    std::array<double, 3> k{0.0, 0.0, 0.0};  ///< wave vector gamma omega v / c^2
};

inline Kinematics kinematics(const BoostSpec& spec, double c)
{
    const double b = spec.speed() / c;
    require(b < 1.0, ErrorKind::parameter_domain, "boost speed must be below c");
    Kinematics kin;
    kin.beta = b;
    kin.gamma = 1.0 / std::sqrt(1.0 - b * b);
    for (int i = 0; i < 3; ++i) kin.k[std::size_t(i)] = kin.gamma * spec.omega * spec.v[std::size_t(i)] / (c * c);
    return kin;
}

/// BoostSpec for a rest state at its own frequency, taken from rest_observables.
inline BoostSpec make_boost(const RestState& rs, const std::array<double, 3>& v, const PhysParams& par)
{
    const auto o = rest_observables(rs, par.a, par.a_c(), par.chi, par.m, par.c);
    BoostSpec s;
    s.v = v;
    s.omega = o.omega;
    s.rest = &rs;
    s.a = par.a;
    s.charge_norm = o.charge_norm;
    return s;
}

namespace detail {

/// Cubic Hermite interpolation of the stored radial profile; zero beyond the grid.
inline double profile_at(const RestState& rs, double r)
{
    const double h = rs.r[1] - rs.r[0];
    const double u = r / h;
    const std::size_t i = std::size_t(u);
    if (i + 1 >= rs.r.size()) return 0.0;
    const double t = u - double(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * rs.profile[i] + (t3 - 2 * t2 + t) * h * rs.dprofile[i] +
           (-2 * t3 + 3 * t2) * rs.profile[i + 1] + (t3 - t2) * h * rs.dprofile[i + 1];
}

}  // namespace detail

/// Samples psi = exp(-i(gamma omega t - k.x)) psi_a(x') with x' the rest-frame coordinate of the
/// moving state and phi = 0. A 3D frame uses the tabulated radial profile. A 1D frame requires
/// motion along the sampled axis and the gausson, whose transverse factor separates exactly.
inline FieldFrame boosted_field(const BoostSpec& spec, int dim, const Axis& t, const std::array<Axis, 3>& x,
                                const PhysParams& par)
{
    require(spec.rest != nullptr, ErrorKind::parameter_domain, "boost needs a rest state");
    const auto kin = kinematics(spec, par.c);
    FieldFrame f = make_frame(dim, t, x, par);
    f.note = "boost";
    const double a = spec.a, g = kin.gamma, amp = std::sqrt(spec.charge_norm);
    const double sp = spec.speed();
    std::array<double, 3> dir{0.0, 0.0, 0.0};
    if (sp > 0)
        for (int i = 0; i < 3; ++i) dir[std::size_t(i)] = spec.v[std::size_t(i)] / sp;
    if (dim == 1) {
        require(spec.v[1] == 0.0 && spec.v[2] == 0.0, ErrorKind::parameter_domain,
                "1D frames support motion along the sampled axis only");
        require(spec.rest->node_count == 0 && std::fabs(spec.rest->xi) < 1e-6, ErrorKind::parameter_domain,
                "1D frames support the gausson only");
    }
    const double pre1d = amp / std::sqrt(a) * std::pow(std::numbers::pi, -0.25);
    const double pre3d = amp * std::pow(a, -1.5);
    parallel_for(t.n, [&](std::size_t it) {
        const double tt = t.at(it);
        for (std::size_t i = 0; i < x[0].n; ++i)
            for (std::size_t j = 0; j < x[1].n; ++j)
                for (std::size_t k = 0; k < x[2].n; ++k) {
                    const std::array<double, 3> p{x[0].at(i), dim == 3 ? x[1].at(j) : 0.0,
                                                  dim == 3 ? x[2].at(k) : 0.0};
                    double kx = 0.0, par_comp = 0.0;
                    for (int b = 0; b < 3; ++b) {
                        kx += kin.k[std::size_t(b)] * p[std::size_t(b)];
                        par_comp += dir[std::size_t(b)] * p[std::size_t(b)];
                    }
                    // x' = x + (gamma - 1)(x.n)n - gamma v t
                    double r2 = 0.0;
                    for (int b = 0; b < 3; ++b) {
                        const double xp = p[std::size_t(b)] + (g - 1.0) * par_comp * dir[std::size_t(b)] -
                                          g * spec.v[std::size_t(b)] * tt;
                        r2 += xp * xp;
                    }
                    const double mag = dim == 1 ? pre1d * std::exp(-0.5 * r2 / (a * a))
                                                : pre3d * detail::profile_at(*spec.rest, std::sqrt(r2) / a);
                    f.psi[f.index(it, i, j, k)] = std::polar(mag, kx - g * spec.omega * tt);
                }
    });
    return f;
}

struct FreeObservables {
    double energy = 0.0;
    std::array<double, 3> momentum{0.0, 0.0, 0.0};
    double mass = 0.0;
    double rest_mass = 0.0;
};

/// Closed-form energy, momentum and masses of the moving state with Theta = theta. The energy is
/// defined as M c^2 so the Einstein relation holds identically.
inline FreeObservables free_observables(const BoostSpec& spec, double theta, double m, double c)
{
    const auto kin = kinematics(spec, c);
    FreeObservables o;
    o.rest_mass = m * (1.0 + theta);
    o.mass = kin.gamma * o.rest_mass;
    o.energy = o.mass * c * c;
    for (int i = 0; i < 3; ++i) o.momentum[std::size_t(i)] = o.mass * spec.v[std::size_t(i)];
    return o;
}

/// Half-width covering 8 standard deviations of |psi_a|^2 for the gausson (sd = a / sqrt 2).
inline double boost_half_width(double a) { return 8.0 * a / std::numbers::sqrt2; }

}  // namespace kgconc
