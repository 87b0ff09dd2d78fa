#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kgconc/error.hpp"
#include "kgconc/numeric/quadrature.hpp"

namespace kgconc {

/// Rectilinear trajectory given by its normalized velocity beta(t) = v(t)/c.
/// Built-in laws: constant, beta0 + beta1 tanh(k t), and a polynomial in t.
class Trajectory {
public:
    enum class Kind { constant, tanh, polynomial };

    static Trajectory constant(double beta, double c = 1.0, double r0 = 0.0)
    {
        return Trajectory(Kind::constant, {beta}, c, r0);
    }
    static Trajectory tanh_profile(double beta0, double beta1, double k, double c = 1.0, double r0 = 0.0)
    {
        return Trajectory(Kind::tanh, {beta0, beta1, k}, c, r0);
    }
    /// beta(t) = sum_i coeffs[i] t^i.
    static Trajectory polynomial(std::vector<double> coeffs, double c = 1.0, double r0 = 0.0)
    {
        require(!coeffs.empty(), ErrorKind::parameter_domain, "polynomial velocity needs coefficients");
        return Trajectory(Kind::polynomial, std::move(coeffs), c, r0);
    }

    Kind kind() const { return kind_; }
    const std::vector<double>& params() const { return p_; }
    double c() const { return c_; }

    double beta(double t) const
    {
        switch (kind_) {
        case Kind::constant: return p_[0];
        case Kind::tanh: return p_[0] + p_[1] * std::tanh(p_[2] * t);
        case Kind::polynomial: return poly(t, 0);
        }
        return 0.0;
    }
    double dbeta(double t) const
    {
        switch (kind_) {
        case Kind::constant: return 0.0;
        case Kind::tanh: {
            const double ch = std::cosh(p_[2] * t);
            return p_[1] * p_[2] / (ch * ch);
        }
        case Kind::polynomial: return poly(t, 1);
        }
        return 0.0;
    }
    double d2beta(double t) const
    {
        switch (kind_) {
        case Kind::constant: return 0.0;
        case Kind::tanh: {
            const double x = p_[2] * t, ch = std::cosh(x);
            return -2.0 * p_[1] * p_[2] * p_[2] * std::tanh(x) / (ch * ch);
        }
        case Kind::polynomial: return poly(t, 2);
        }
        return 0.0;
    }
    double d3beta(double t) const
    {
        switch (kind_) {
        case Kind::constant: return 0.0;
        case Kind::tanh: {
            const double x = p_[2] * t, ch = std::cosh(x), th = std::tanh(x);
            return -2.0 * p_[1] * std::pow(p_[2], 3) * (1.0 - 3.0 * th * th) / (ch * ch);
        }
        case Kind::polynomial: return poly(t, 3);
        }
        return 0.0;
    }

    double r(double t) const
    {
        switch (kind_) {
        case Kind::constant: return r0_ + c_ * p_[0] * t;
        case Kind::tanh: {
            // log cosh without overflow.
            const double x = std::fabs(p_[2] * t);
            const double lc = x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
            return r0_ + c_ * (p_[0] * t + (p_[2] != 0.0 ? p_[1] / p_[2] * lc : 0.0));
        }
        case Kind::polynomial: {
            double s = 0.0, tp = t;
            for (std::size_t i = 0; i < p_.size(); ++i, tp *= t) s += p_[i] * tp / double(i + 1);
            return r0_ + c_ * s;
        }
        }
        return r0_;
    }
    double v(double t) const { return c_ * beta(t); }
    double dv(double t) const { return c_ * dbeta(t); }
    double d2v(double t) const { return c_ * d2beta(t); }
    double gamma(double t) const
    {
        const double b = beta(t);
        return 1.0 / std::sqrt(1.0 - b * b);
    }
    /// d/dt (gamma v) = gamma^3 dv/dt.
    double d_gamma_v(double t) const
    {
        const double g = gamma(t);
        return g * g * g * dv(t);
    }

    std::string describe() const
    {
        switch (kind_) {
        case Kind::constant: return "constant";
        case Kind::tanh: return "tanh";
        case Kind::polynomial: return "polynomial";
        }
        return "";
    }

private:
    Trajectory(Kind k, std::vector<double> p, double c, double r0) : kind_(k), p_(std::move(p)), c_(c), r0_(r0)
    {
        require(c > 0, ErrorKind::parameter_domain, "speed of light must be positive");
        if (k == Kind::tanh) require(p_[2] != 0.0, ErrorKind::parameter_domain, "tanh rate must be nonzero");
    }

    double poly(double t, int der) const
    {
        double s = 0.0;
        for (std::size_t i = std::size_t(der); i < p_.size(); ++i) {
            double f = 1.0;
            for (int j = 0; j < der; ++j) f *= double(i - std::size_t(j));
            s += f * p_[i] * std::pow(t, double(i - std::size_t(der)));
        }
        return s;
    }

    Kind kind_;
    std::vector<double> p_;
    double c_;
    double r0_;
};

/// Bounds of a trajectory on a time window, from dense sampling.
struct Admissibility {
    double eps1 = 0.0;        ///< max |beta|, must be < 1
    double beta_check = 0.0;  ///< min |beta|, must be > 0
    double deriv_bound = 0.0; ///< max |v| + |dv/dt| + |d2v/dt2|
    bool one_sign = true;     ///< beta keeps its sign
    bool ok() const { return eps1 < 1.0 && beta_check > 0.0 && one_sign; }
    double b_min() const { return 1.0 / eps1 - eps1; }             ///< lower bound of |1/beta - beta|
    double b_max() const { return 1.0 / beta_check - beta_check; } ///< upper bound
};

inline Admissibility admissibility(const Trajectory& tr, double t_lo, double t_hi, std::size_t samples = 4001)
{
    require(t_hi > t_lo && samples >= 2, ErrorKind::parameter_domain, "empty trajectory window");
    Admissibility a;
    a.beta_check = INFINITY;
    const double s0 = tr.beta(t_lo) >= 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = t_lo + (t_hi - t_lo) * double(i) / double(samples - 1);
        const double b = tr.beta(t);
        a.eps1 = std::max(a.eps1, std::fabs(b));
        a.beta_check = std::min(a.beta_check, std::fabs(b));
        a.deriv_bound = std::max(a.deriv_bound, std::fabs(tr.v(t)) + std::fabs(tr.dv(t)) + std::fabs(tr.d2v(t)));
        if (b * s0 <= 0.0) a.one_sign = false;
    }
    return a;
}

inline void require_admissible(const Trajectory& tr, double t_lo, double t_hi)
{
    const auto a = admissibility(tr, t_lo, t_hi);
    require(a.eps1 < 1.0, ErrorKind::parameter_domain, "trajectory reaches the speed of light");
    require(a.beta_check > 0.0 && a.one_sign, ErrorKind::parameter_domain,
            "trajectory velocity must stay away from zero");
}

/// Trajectory seen in the rescaled time tau = c t / a.
struct TauView {
    const Trajectory* tr;
    double a;

    double t_of(double tau) const { return a * tau / tr->c(); }
    double beta(double tau) const { return tr->beta(t_of(tau)); }
    double beta_tau(double tau) const { return a / tr->c() * tr->dbeta(t_of(tau)); }
    double beta_tautau(double tau) const
    {
        const double f = a / tr->c();
        return f * f * tr->d2beta(t_of(tau));
    }
    /// b = 1/beta - beta
    double b(double tau) const
    {
        const double bt = beta(tau);
        return 1.0 / bt - bt;
    }
    /// B(tau0, s) = int_0^s b(tau0 + s') ds'
    double B(double tau0, double s) const
    {
        return numeric::integrate([&](double u) { return b(tau0 + u); }, 0.0, s);
    }
};

}  // namespace kgconc
