#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kgconc/error.hpp"

namespace kgconc::numeric {

// Central stencils on offsets -2..2.
inline constexpr std::array<double, 5> d1_c4{1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
inline constexpr std::array<double, 5> d2_c4{-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};

/// 4th-order central first derivative from samples f[i-2..i+2].
template <class V>
double d1_central4(const V& f, double h)
{
    return (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
}

/// 4th-order central second derivative from samples f[i-2..i+2].
template <class V>
double d2_central4(const V& f, double h)
{
    return (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
}

/// 2nd-order derivative of a uniformly sampled line at index i: central in the interior,
/// one-sided second-order at the two ends. `at(k)` returns sample k; n >= 3.
template <class T, class At>
T d1_order2(At&& at, std::size_t i, std::size_t n, double h)
{
    if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (i == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
    return (at(i + 1) - at(i - 1)) / (2.0 * h);
}

/// 4th-order first derivative of a uniform series at every index; one-sided 4th-order
/// stencils near the ends. Requires n >= 5.
inline std::vector<double> d1_series4(const std::vector<double>& f, double h)
{
    const std::size_t n = f.size();
    require(n >= 5, ErrorKind::resolution, "series differentiation needs at least 5 samples");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
        } else if (i < 2) {
            // Forward 5-point stencils (offsets relative to the left end).
            if (i == 0)
                d[i] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
            else
                d[i] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
        } else {
            const std::size_t m = n - 1;
            if (i == m)
                d[i] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * h);
            else
                d[i] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * h);
        }
    }
    return d;
}

}  // namespace kgconc::numeric
