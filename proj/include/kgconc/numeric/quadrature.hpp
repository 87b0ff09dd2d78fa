#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "kgconc/error.hpp"

namespace kgconc::numeric {

struct QuadOptions {
    double rel_tol = 1e-12;
    unsigned max_depth = 20;
};

/// Adaptive 15-point Gauss-Kronrod on [lo, hi].
template <class F>
double integrate(F&& f, double lo, double hi, const QuadOptions& opt = {})
{
    if (lo == hi) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, lo, hi, opt.max_depth, opt.rel_tol, &err);
}

/// Fixed N-point Gauss-Legendre rule mapped to [lo, hi].
template <unsigned N>
struct GaussPanel {
    using rule = boost::math::quadrature::gauss<double, N>;

    /// Nodes and weights on [lo, hi], ascending.
    static void nodes(double lo, double hi, std::vector<double>& x, std::vector<double>& w)
    {
        const auto& ab = rule::abscissa();
        const auto& wt = rule::weights();
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        x.clear();
        w.clear();
        // Boost stores the non-negative half of a symmetric rule.
        for (std::size_t i = ab.size(); i-- > 0;) {
            if (ab[i] == 0.0) continue;
            x.push_back(mid - half * ab[i]);
            w.push_back(half * wt[i]);
        }
        for (std::size_t i = 0; i < ab.size(); ++i) {
            if (ab[i] == 0.0 && !(N % 2)) continue;
            x.push_back(mid + half * ab[i]);
            w.push_back(half * wt[i]);
        }
    }

    template <class F>
    static double integrate(F&& f, double lo, double hi)
    {
        return rule::integrate(f, lo, hi);
    }
};

/// Composite Simpson weights for n uniformly spaced samples (n odd gives pure Simpson;
/// n even closes the last interval with the 3/8 rule).
inline std::vector<double> simpson_weights(std::size_t n, double h)
{
    require(n >= 4, ErrorKind::resolution, "Simpson rule needs at least 4 samples");
    std::vector<double> w(n, 0.0);
    std::size_t m = (n % 2 == 1) ? n : n - 3;  // samples covered by the 1/3 rule
    for (std::size_t i = 0; i + 2 < m; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (m != n) {
        const double c = 3.0 * h / 8.0;
        w[n - 4] += c;
        w[n - 3] += 3.0 * c;
        w[n - 2] += 3.0 * c;
        w[n - 1] += c;
    }
    return w;
}

/// Trapezoidal weights for n uniformly spaced samples.
inline std::vector<double> trapezoid_weights(std::size_t n, double h)
{
    require(n >= 2, ErrorKind::resolution, "trapezoid rule needs at least 2 samples");
    std::vector<double> w(n, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

}  // namespace kgconc::numeric
