#pragma once

#include <cmath>
#include <vector>

#include "kgconc/error.hpp"
#include "kgconc/field.hpp"
#include "kgconc/nonlinearity.hpp"

namespace kgconc {

/// One point of the concentrating sequence, parameterized by the small ratio zeta = a_C / a.
struct ScaleParams {
    double zeta = 1e-2;
    double a = 1.0;
    double a_c = 1e-2;
    double chi = 1e-2;
    double theta_bar = 1.0;  ///< half-width of the strip in units of a
    double R = 1.0;          ///< theta_bar a
    double delta = 0.003;
    double one_plus = 1.1;
    double two_plus = 2.1;
    double m = 1.0;
    double c = 1.0;
    Mode mode = Mode::nonlinear;

    PhysParams phys(double q = 1.0) const
    {
        PhysParams p;
        p.m = m;
        p.c = c;
        p.q = q;
        p.chi = chi;
        p.a = a;
        return p;
    }
};

/// Checks 1 < 2+/2 < 1+ < 2 and 0 < delta < (2+ - 2)/32.
inline void validate_exponents(double one_plus, double two_plus, double delta)
{
    require(1.0 < two_plus / 2.0 && two_plus / 2.0 < one_plus && one_plus < 2.0, ErrorKind::config,
            "exponents must satisfy 1 < 2+/2 < 1+ < 2");
    require(delta > 0.0 && delta < (two_plus - 2.0) / 32.0, ErrorKind::config, "delta must lie in (0, (2+ - 2)/32)");
}

/// a = exp(-(ln 1/zeta)^{1/1+}), theta_bar = (ln 1/zeta)^{1/2+}, chi = m c zeta a, R = theta_bar a.
inline ScaleParams scale_point(double zeta, double one_plus = 1.1, double two_plus = 2.1, double delta = 0.003,
                               double m = 1.0, double c = 1.0, Mode mode = Mode::nonlinear)
{
    validate_exponents(one_plus, two_plus, delta);
    require(zeta > 0.0 && zeta < 1.0, ErrorKind::config, "zeta must lie in (0, 1)");
    require(m > 0 && c > 0, ErrorKind::config, "m and c must be positive");
    const double L = std::log(1.0 / zeta);
    ScaleParams sp;
    sp.zeta = zeta;
    sp.a = std::exp(-std::pow(L, 1.0 / one_plus));
    sp.a_c = zeta * sp.a;
    sp.chi = m * c * zeta * sp.a;
    sp.theta_bar = std::pow(L, 1.0 / two_plus);
    sp.R = sp.theta_bar * sp.a;
    sp.delta = delta;
    sp.one_plus = one_plus;
    sp.two_plus = two_plus;
    sp.m = m;
    sp.c = c;
    sp.mode = mode;
    return sp;
}

/// Scale points for a strictly decreasing zeta list; R and a_C / a^2 are checked along the list.
inline std::vector<ScaleParams> scale_sequence(const std::vector<double>& zetas, double one_plus = 1.1,
                                               double two_plus = 2.1, double delta = 0.003, double m = 1.0,
                                               double c = 1.0, Mode mode = Mode::nonlinear)
{
    require(!zetas.empty(), ErrorKind::config, "empty zeta list");
    std::vector<ScaleParams> out;
    for (std::size_t i = 0; i < zetas.size(); ++i) {
        if (i > 0) require(zetas[i] < zetas[i - 1], ErrorKind::config, "zeta list must be strictly decreasing");
        out.push_back(scale_point(zetas[i], one_plus, two_plus, delta, m, c, mode));
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        require(out[i].R < out[i - 1].R, ErrorKind::config, "strip radius R must shrink along the sequence");
        require(out[i].a_c / (out[i].a * out[i].a) <= out[0].a_c / (out[0].a * out[0].a) * 1.0000001,
                ErrorKind::config, "a_C / a^2 must stay bounded along the sequence");
    }
    return out;
}

}  // namespace kgconc
