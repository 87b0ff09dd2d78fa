#pragma once

#include <boost/math/special_functions/fpclassify.hpp>  // must precede pchip (unqualified isnan)
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "kgconc/error.hpp"
#include "kgconc/numeric/quadrature.hpp"

namespace kgconc {

enum class Family { power_law, exponential, gaussian };
enum class Mode { nonlinear, linear };

inline std::string to_string(Family f)
{
    switch (f) {
    case Family::power_law: return "power_law";
    case Family::exponential: return "exponential";
    case Family::gaussian: return "gaussian";
    }
    return "?";
}

inline std::string to_string(Mode m) { return m == Mode::linear ? "linear" : "nonlinear"; }

/// Normalization constant of the Gaussian form factor, pi^{-3/4}.
inline const double gauss_norm = std::pow(std::numbers::pi, -0.75);

/// Radial form factor of a resting charge at unit size, L2-normalized in R^3.
class GroundState {
public:
    Family kind = Family::gaussian;
    double p = 0.0;      ///< family exponent (unused for the Gaussian)
    double norm = 0.0;   ///< c_pw, c_e or C_g
    double nu = 1.0;     ///< L2 norm of the form factor

    double psi(double r) const
    {
        switch (kind) {
        case Family::gaussian: return norm * std::exp(-0.5 * r * r);
        case Family::power_law: return norm * std::pow(1.0 + r * r, -p);
        case Family::exponential: return norm * std::exp(-std::pow(r * r + 1.0, p));
        }
        return 0.0;
    }

    /// ln psi(r), finite where psi itself underflows.
    double log_psi(double r) const
    {
        switch (kind) {
        case Family::gaussian: return std::log(norm) - 0.5 * r * r;
        case Family::power_law: return std::log(norm) - p * std::log1p(r * r);
        case Family::exponential: return std::log(norm) - std::pow(r * r + 1.0, p);
        }
        return 0.0;
    }

    /// (ln psi)'(r).
    double dlog_psi(double r) const
    {
        switch (kind) {
        case Family::gaussian: return -r;
        case Family::power_law: return -2.0 * p * r / (1.0 + r * r);
        case Family::exponential: return -2.0 * p * r * std::pow(r * r + 1.0, p - 1.0);
        }
        return 0.0;
    }

    double dpsi(double r) const
    {
        switch (kind) {
        case Family::gaussian: return -r * psi(r);
        case Family::power_law: return -2.0 * p * r * norm * std::pow(1.0 + r * r, -p - 1.0);
        case Family::exponential: return -2.0 * p * r * std::pow(r * r + 1.0, p - 1.0) * psi(r);
        }
        return 0.0;
    }

    double d2psi(double r) const
    {
        const double u = 1.0 + r * r;
        switch (kind) {
        case Family::gaussian: return (r * r - 1.0) * psi(r);
        case Family::power_law:
            return norm * (-2.0 * p * std::pow(u, -p - 1.0) + 4.0 * p * (p + 1.0) * r * r * std::pow(u, -p - 2.0));
        case Family::exponential: {
            const double l1 = -2.0 * p * r * std::pow(u, p - 1.0);  // (ln psi)'
            const double l2 = -2.0 * p * std::pow(u, p - 1.0) - 4.0 * p * (p - 1.0) * r * r * std::pow(u, p - 2.0);
            return (l1 * l1 + l2) * psi(r);
        }
        }
        return 0.0;
    }

    /// (psi'' + 2 psi'/r) / psi, in closed form per family.
    double laplacian_ratio(double r) const
    {
        const double r2 = r * r, u = 1.0 + r2;
        switch (kind) {
        case Family::gaussian: return r2 - 3.0;
        case Family::power_law: return (-6.0 * p + (4.0 * p * p - 2.0 * p) * r2) / (u * u);
        case Family::exponential:
            return 4.0 * p * p * r2 * std::pow(u, 2.0 * p - 2.0) - 6.0 * p * std::pow(u, p - 1.0) -
                   4.0 * p * (p - 1.0) * r2 * std::pow(u, p - 2.0);
        }
        return 0.0;
    }
};

/// Builds the normalized form factor of a family.
inline GroundState make_ground_state(Family kind, double p = 0.0)
{
    GroundState gs;
    gs.kind = kind;
    gs.p = p;
    switch (kind) {
    case Family::gaussian:
        gs.p = 0.0;
        gs.norm = gauss_norm;
        break;
    case Family::power_law: {
        require(p > 0.75, ErrorKind::parameter_domain, "power-law form factor requires p > 3/4");
        // 4 pi int r^2 (1+r^2)^{-2p} dr = pi^{3/2} Gamma(2p-3/2) / Gamma(2p)
        const double i = std::pow(std::numbers::pi, 1.5) * std::tgamma(2.0 * p - 1.5) / std::tgamma(2.0 * p);
        gs.norm = 1.0 / std::sqrt(i);
        break;
    }
    case Family::exponential: {
        require(p > 0.0, ErrorKind::parameter_domain, "exponential form factor requires p > 0");
        // The integrand is below 1e-320 once (1+r^2)^p > 370.
        const double rcut = std::sqrt(std::pow(370.0, 1.0 / p) - 1.0);
        const double i = numeric::integrate(
            [p](double r) { return 4.0 * std::numbers::pi * r * r * std::exp(-2.0 * std::pow(r * r + 1.0, p)); },
            0.0, rcut, {1e-14, 20});
        gs.norm = 1.0 / std::sqrt(i);
        break;
    }
    }
    return gs;
}

/// Value and antiderivative of the scaled nonlinearity.
struct GValue {
    double gprime = 0.0;
    double g = 0.0;
};

/// Nonlinearity G_1 generated by a ground state, with the size scaling
/// G'_a(s) = a^-2 G'_1(a^3 s), G_a(s) = a^-5 G_1(a^3 s).
class Nonlinearity {
public:
    Mode mode = Mode::nonlinear;
    double holder_alpha = 0.9;
    GroundState gs;
    /// Interval [s0, s1] where a smooth bridge replaces the inverted formula (empty when closed form).
    std::pair<double, double> extension_breakpoints{0.0, 0.0};

    /// G'_1(s). The logarithmic member returns 0 at s = 0, where only G'(s) psi = 0 is meaningful.
    double g1prime(double s) const
    {
        if (mode == Mode::linear) return 0.0;
        require(s >= 0.0, ErrorKind::domain, "nonlinearity argument must be non-negative");
        switch (gs.kind) {
        case Family::gaussian:
            if (s == 0.0) return 0.0;
            return -std::log(s / (gs.norm * gs.norm)) - 3.0;
        case Family::power_law: {
            if (s == 0.0) return 0.0;
            const double u = std::pow(s / (gs.norm * gs.norm), -1.0 / (2.0 * gs.p));
            return (-6.0 * gs.p + (4.0 * gs.p * gs.p - 2.0 * gs.p) * (u - 1.0)) / (u * u);
        }
        case Family::exponential: break;
        }
        // Exponential family.
        const double s0 = extension_breakpoints.first, s1 = extension_breakpoints.second;
        if (s >= s1) return g_at_s0_;
        if (s > s0) {
            // Cubic Hermite bridge: (s0, G'(s0), slope0) -> (s1, G'(s0), 0).
            const double h = s1 - s0, x = (s - s0) / h;
            const double h10 = x * (1.0 - x) * (1.0 - x);
            return g_at_s0_ + slope_at_s0_ * h * h10;
        }
        if (s == 0.0) return inverted_ratio_at_zero();
        if (closed_exp_half_) {
            const double L = std::log(gs.norm * gs.norm / s);
            return 1.0 - 4.0 / L - 4.0 / (L * L) - 8.0 / (L * L * L);
        }
        return gs.laplacian_ratio(invert(s));
    }

    /// G_1(s) with G_1(0) = 0.
    double g1(double s) const
    {
        if (mode == Mode::linear || s == 0.0) return 0.0;
        if (gs.kind == Family::gaussian)
            return -s * (std::log(s) + 1.5 * std::log(std::numbers::pi) + 2.0);
        if (gs.kind == Family::power_law) {
            // Substituting s = c^2 u^{-2p} turns the antiderivative into two powers of u.
            const double p = gs.p, c2 = gs.norm * gs.norm;
            const double u = std::pow(s / c2, -1.0 / (2.0 * p));
            return 2.0 * p * c2 *
                   (-2.0 * p * std::pow(u, -2.0 * p - 2.0) + (4.0 * p * p - 2.0 * p) / (2.0 * p + 1.0) * std::pow(u, -2.0 * p - 1.0));
        }
        const double s0 = extension_breakpoints.first, s1 = extension_breakpoints.second;
        if (s > s0) {
            const double h = s1 - s0, x = std::min(s, s1) - s0;
            const double t = x / h;
            double v = g1_at_s0_ + g_at_s0_ * x + slope_at_s0_ * h * h * (t * t / 2 - 2 * t * t * t / 3 + t * t * t * t / 4);
            if (s > s1) v += g_at_s0_ * (s - s1);
            return v;
        }
        // Cumulative table plus a short panel from the nearest node below s.
        if (s < 1e-280) return s * g1prime(s);
        const auto it = std::upper_bound(g1_s_.begin(), g1_s_.end(), s);
        if (it == g1_s_.begin()) return log_panel(0.0, s);
        const std::size_t k = std::size_t(it - g1_s_.begin()) - 1;
        return g1_val_[k] + log_panel(g1_s_[k], s);
    }

    /// Integral of G'_1 over [lo, hi] in the variable ln s, where the integrand is smooth.
    /// lo = 0 is replaced by hi e^{-60}; the omitted piece is below 1e-26 hi sup|G'|.
    double log_panel(double lo, double hi) const
    {
        const double l0 = lo > 0.0 ? std::log(lo) : std::log(hi) - 60.0;
        if (std::log(hi) - l0 < 0.05)  // narrow panel: a fixed rule is exact to rounding
            return numeric::GaussPanel<10>::integrate([this](double x) { return g1prime(x); }, lo, hi);
        return numeric::integrate([this](double l) { const double x = std::exp(l); return g1prime(x) * x; }, l0,
                                  std::log(hi), {1e-13, 15});
    }

    GValue eval(double s, double a) const
    {
        if (mode == Mode::linear) return {};
        const double as = a * a * a * s;
        return {g1prime(as) / (a * a), g1(as) / (a * a * a * a * a)};
    }

    /// Radius r with psi^2(r) = s on the decreasing branch (s in (0, psi(0)^2]).
    double invert(double s) const
    {
        require(s > 0.0, ErrorKind::domain, "inversion needs s > 0");
        const double ls = std::log(s);
        double r;
        if (ls >= table_ls_.back()) return 0.0;
        if (ls <= table_ls_.front())
            r = table_r_.front();
        else if (ls >= spline_hi_)
            r = table_r_.back();
        else
            r = (*spline_)(ls);
        for (int it = 0; it < 60; ++it) {
            const double f = 2.0 * gs.log_psi(r) - ls;
            const double df = 2.0 * gs.dlog_psi(r);
            if (df == 0.0) break;
            double rn = r - f / df;
            if (rn < 0.0) rn = 0.5 * r;
            const bool done = std::fabs(rn - r) <= 4e-16 * (1.0 + r);
            r = rn;
            if (done) break;
        }
        return r;
    }

private:
    friend Nonlinearity nonlinearity_from_ground_state(const GroundState&, Mode, double);

    double inverted_ratio_at_zero() const { return gs.laplacian_ratio(table_r_.front()); }

    std::vector<double> table_ls_, table_r_;
    std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> spline_;
    double spline_hi_ = 0.0;
    std::vector<double> g1_s_, g1_val_;  // cumulative antiderivative on table nodes below s0
    double g1_at_s0_ = 0.0;
    bool closed_exp_half_ = false;
    double g_at_s0_ = 0.0, slope_at_s0_ = 0.0;
};

/// Derives G_1 from a ground state by inverting r -> psi^2(r) and taking the Laplacian ratio.
inline Nonlinearity nonlinearity_from_ground_state(const GroundState& gs, Mode mode = Mode::nonlinear,
                                                   double holder_alpha = 0.9)
{
    require(holder_alpha > 0.0 && holder_alpha < 1.0, ErrorKind::parameter_domain, "Hoelder exponent must lie in (0,1)");
    Nonlinearity nl;
    nl.mode = mode;
    nl.holder_alpha = holder_alpha;
    nl.gs = gs;
    if (gs.kind != Family::exponential) return nl;

    // Log-spaced radius table, r from far tail inward so that ln psi^2 ascends.
    double rmax = 8.0;
    while (2.0 * gs.log_psi(rmax) > -1400.0 && rmax < 1e6) rmax *= 1.25;
    const int n = 2048;
    std::vector<double> ls(n), rs(n);
    const double l0 = std::log(1e-6), l1 = std::log(rmax);
    for (int k = 0; k < n; ++k) {
        const double r = std::exp(l1 - (l1 - l0) * k / (n - 1));
        rs[k] = r;
        ls[k] = 2.0 * gs.log_psi(r);
        if (k > 0 && !(ls[k] > ls[k - 1]))
            fail(ErrorKind::consistency, "form factor is not strictly decreasing; inversion impossible");
    }
    nl.table_ls_ = ls;
    nl.table_r_ = rs;
    nl.spline_hi_ = ls.back();
    nl.spline_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(ls), std::move(rs));
    nl.table_ls_.push_back(2.0 * gs.log_psi(0.0));
    nl.closed_exp_half_ = std::fabs(gs.p - 0.5) < 1e-15;

    const double s0 = gs.psi(0.0) * gs.psi(0.0);
    nl.extension_breakpoints = {s0, 2.0 * s0};
    nl.g_at_s0_ = gs.laplacian_ratio(0.0);
    if (nl.closed_exp_half_) {
        const double L = 2.0;
        nl.slope_at_s0_ = -(4.0 / (L * L) + 8.0 / (L * L * L) + 24.0 / (L * L * L * L)) / s0;
    } else {
        // d G'/ds at r -> 0 equals LR''(0) / (2 psi(0) psi''(0)); evaluate by a small-r quotient.
        const double re = 1e-4;
        const double se = gs.psi(re) * gs.psi(re);
        nl.slope_at_s0_ = (gs.laplacian_ratio(re) - nl.g_at_s0_) / (se - s0);
    }

    // Antiderivative nodes: a thinned subset of the table abscissae, then s0.
    double acc = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < nl.table_ls_.size(); ++k) {
        const double sk = std::exp(nl.table_ls_[k]);
        // Below 1e-280 the antiderivative is negligible (and subnormals are slow); nodes closer than
        // 0.05 in ln s would leave panels too narrow for the quadrature's relative tolerance.
        if (sk < 1e-280 || sk >= s0 || (prev > 0.0 && std::log(sk / prev) < 0.05)) continue;
        acc += nl.log_panel(prev, sk);
        nl.g1_s_.push_back(sk);
        nl.g1_val_.push_back(acc);
        prev = sk;
    }
    nl.g1_at_s0_ = acc + nl.log_panel(prev, s0);
    return nl;
}

/// G'_1 of the 1D reduction of the logarithmic family at size a.
inline double log1d_gprime(double s, double a)
{
    if (s == 0.0) return 0.0;
    return -(std::log(a * std::sqrt(std::numbers::pi) * s) + 1.0) / (a * a);
}

/// Antiderivative of log1d_gprime with value 0 at s = 0.
inline double log1d_g(double s, double a)
{
    if (s == 0.0) return 0.0;
    return -s * std::log(a * std::sqrt(std::numbers::pi) * s) / (a * a);
}

/// Max over a radial grid of |lap psi - G'_1(psi^2) psi| using analytic derivatives.
inline double equilibrium_residual(const GroundState& gs, const Nonlinearity& nl, const std::vector<double>& r_grid)
{
    double worst = 0.0;
    for (double r : r_grid) {
        require(r > 0.0, ErrorKind::domain, "radial grid must be positive");
        const double psi = gs.psi(r);
        const double lap = gs.d2psi(r) + 2.0 * gs.dpsi(r) / r;
        worst = std::max(worst, std::fabs(lap - nl.g1prime(psi * psi) * psi));
    }
    return worst;
}

/// Sampled sup of |G_1(psi^2)| / psi^{1+alpha} over psi in (0, 1].
inline double holder_sup(const Nonlinearity& nl, int samples = 400)
{
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double psi = std::pow(10.0, -12.0 * k / (samples - 1.0));
        worst = std::max(worst, std::fabs(nl.g1(psi * psi)) / std::pow(psi, 1.0 + nl.holder_alpha));
    }
    return worst;
}

}  // namespace kgconc
