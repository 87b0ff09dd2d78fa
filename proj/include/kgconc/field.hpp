#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "kgconc/error.hpp"

namespace kgconc {

using cplx = std::complex<double>;

/// Physical constants of a run. chi has units of action, c of velocity.
struct PhysParams {
    double m = 1.0;
    double c = 1.0;
    double q = 1.0;
    double chi = 1.0;
    double a = 1.0;  ///< size parameter

    double a_c() const { return chi / (m * c); }
    double kappa0() const { return m * c / chi; }
    double omega0() const { return m * c * c / chi; }
};

/// Uniform sample axis lo + i h, i < n.
struct Axis {
    double lo = 0.0;
    double h = 1.0;
    std::size_t n = 1;

    double at(std::size_t i) const { return lo + h * double(i); }
    double hi() const { return at(n - 1); }
};

enum class FrameKind { lab, moving };

/// Sampled wave function and electric potential on a uniform space-time block. A 1D-reduced
/// frame (dim = 1) stores the longitudinal factor of psi = pi^{-1/2} a^{-1} e^{-(x1^2+x2^2)/2a^2} psi_1D;
/// its densities are per unit transverse area integrated over the transverse plane.
struct FieldFrame {
    int dim = 3;
    Axis t;
    std::array<Axis, 3> x;  ///< unused axes have n = 1
    std::vector<cplx> psi;
    std::vector<double> phi;
    PhysParams par;
    FrameKind frame = FrameKind::lab;
    std::string note;  ///< e.g. the trajectory a moving frame follows

    std::size_t spatial_size() const { return x[0].n * x[1].n * x[2].n; }
    std::size_t size() const { return t.n * spatial_size(); }
    std::size_t index(std::size_t it, std::size_t i, std::size_t j, std::size_t k) const
    {
        return ((it * x[0].n + i) * x[1].n + j) * x[2].n + k;
    }

    void allocate()
    {
        psi.assign(size(), cplx(0.0, 0.0));
        phi.assign(size(), 0.0);
    }

    void validate() const
    {
        require(dim == 1 || dim == 3, ErrorKind::shape, "frame dimension must be 1 or 3");
        require(t.h > 0 && x[0].h > 0 && x[1].h > 0 && x[2].h > 0, ErrorKind::shape, "grid spacings must be positive");
        if (dim == 1) require(x[1].n == 1 && x[2].n == 1, ErrorKind::shape, "1D frame must have singleton transverse axes");
        require(psi.size() == size() && phi.size() == size(), ErrorKind::shape, "sample arrays do not match the grid");
        require(par.m > 0 && par.c > 0 && par.chi > 0 && par.a > 0, ErrorKind::parameter_domain,
                "m, c, chi and a must be positive");
        for (std::size_t i = 0; i < psi.size(); ++i)
            if (!std::isfinite(psi[i].real()) || !std::isfinite(psi[i].imag()) || !std::isfinite(phi[i]))
                fail(ErrorKind::invalid_field, "non-finite sample in field frame");
    }
};

/// Builds a frame with the given axes; ny = nz = 1 for a 1D frame.
inline FieldFrame make_frame(int dim, const Axis& t, const std::array<Axis, 3>& x, const PhysParams& par)
{
    FieldFrame f;
    f.dim = dim;
    f.t = t;
    f.x = x;
    f.par = par;
    f.allocate();
    return f;
}

/// Symmetric axis of n points on [-half, half].
inline Axis centered_axis(double half, std::size_t n)
{
    require(n >= 2, ErrorKind::resolution, "axis needs at least two points");
    return Axis{-half, 2.0 * half / double(n - 1), n};
}

}  // namespace kgconc
