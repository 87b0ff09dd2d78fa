#include <limits>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kgconc/densities.hpp"
#include "kgconc/lorentz_boost.hpp"

using namespace kgconc;

namespace {

const Nonlinearity& log_nl()
{
    static const Nonlinearity nl = nonlinearity_from_ground_state(make_ground_state(Family::gaussian));
    return nl;
}

const Nonlinearity& lin_nl()
{
    static const Nonlinearity nl = nonlinearity_from_ground_state(make_ground_state(Family::gaussian), Mode::linear);
    return nl;
}

const RestState& gausson()
{
    static const RestState rs = solve_rest_state(log_nl(), 0);
    return rs;
}

// a = 1, a_C = 0.5: chi = 0.5, omega0 = 2, Theta = 0.125.
PhysParams half_compton()
{
    PhysParams p;
    p.chi = 0.5;
    return p;
}

std::array<Axis, 3> line(double half, std::size_t n) { return {centered_axis(half, n), Axis{}, Axis{}}; }

FieldFrame boosted_line(double beta, double h, double ht, std::size_t nt, double t0 = 0.0)
{
    const auto par = half_compton();
    const auto spec = make_boost(gausson(), {beta * par.c, 0, 0}, par);
    const double half = 6.0 * par.a;
    const auto n = std::size_t(std::lround(2 * half / h)) + 1;
    return boosted_field(spec, 1, Axis{t0, ht, nt}, line(half, n), par);
}

}  // namespace

TEST(Densities, RestStateHasNoCurrentAndChargeFollowsModulus)
{
    const auto par = half_compton();
    const auto spec = make_boost(gausson(), {0, 0, 0}, par);
    const double ht = 1e-4;
    for (int dim : {1, 3}) {
        std::array<Axis, 3> ax = dim == 1 ? line(5.0, 81) : std::array<Axis, 3>{centered_axis(4, 25), centered_axis(4, 25),
                                                                                centered_axis(4, 25)};
        const auto f = boosted_field(spec, dim, Axis{0.0, ht, 3}, ax, par);
        const auto dg = densities(f, log_nl());
        double jmax = 0, rho_err = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            for (int k = 0; k < 3; ++k) jmax = std::max(jmax, std::fabs(dg.current[std::size_t(k)][i]));
            rho_err = std::max(rho_err, std::fabs(dg.rho[i] - par.q * std::norm(f.psi[i])));
        }
        EXPECT_LT(jmax, 1e-13) << dim;
        // Central difference of exp(-i omega0 t) is exact up to (omega0 ht)^2 / 6.
        EXPECT_LT(rho_err, 1e-8) << dim;
    }
}

TEST(Densities, ZeroFieldGivesZeroDensities)
{
    for (const Nonlinearity* nl : {&log_nl(), &lin_nl()}) {
        auto f = make_frame(3, Axis{0, 0.1, 5}, {centered_axis(1, 5), centered_axis(1, 6), centered_axis(1, 7)}, PhysParams{});
        const auto dg = densities(f, *nl);
        for (std::size_t i = 0; i < f.size(); ++i) {
            EXPECT_EQ(dg.rho[i], 0.0);
            EXPECT_EQ(dg.energy[i], 0.0);
            EXPECT_EQ(dg.lagrangian[i], 0.0);
            for (int k = 0; k < 3; ++k) {
                EXPECT_EQ(dg.current[std::size_t(k)][i], 0.0);
                EXPECT_EQ(dg.momentum[std::size_t(k)][i], 0.0);
                EXPECT_EQ(dg.force[std::size_t(k)][i], 0.0);
            }
        }
        const auto t = totals(dg, 2);
        EXPECT_EQ(t.charge, 0.0);
        EXPECT_EQ(t.energy, 0.0);
        const auto r = conservation_residuals(f, *nl);
        EXPECT_EQ(r.continuity + r.energy + r.momentum, 0.0);
    }
}

TEST(Densities, PlaneWaveResidualsVanish)
{
    PhysParams par;
    par.chi = 0.7;
    const double k0 = par.kappa0();
    for (int dim : {1, 3}) {
        const std::array<double, 3> kv{0.8, dim == 3 ? -0.3 : 0.0, dim == 3 ? 0.5 : 0.0};
        const double k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        const double Om = par.c * std::sqrt(k2 + k0 * k0);
        std::array<Axis, 3> ax = dim == 1 ? line(3, 31) : std::array<Axis, 3>{centered_axis(2, 9), centered_axis(2, 9),
                                                                              centered_axis(2, 9)};
        auto f = make_frame(dim, Axis{0, 0.05, 7}, ax, par);
        for (std::size_t it = 0; it < f.t.n; ++it)
            for (std::size_t i = 0; i < ax[0].n; ++i)
                for (std::size_t j = 0; j < ax[1].n; ++j)
                    for (std::size_t k = 0; k < ax[2].n; ++k) {
                        const double ph = kv[0] * ax[0].at(i) + (dim == 3 ? kv[1] * ax[1].at(j) + kv[2] * ax[2].at(k) : 0.0) -
                                          Om * f.t.at(it);
                        f.psi[f.index(it, i, j, k)] = std::polar(1.0, ph);
                    }
        const auto r = conservation_residuals(f, lin_nl());
        EXPECT_LT(r.continuity, 1e-8 * k0 * k0) << dim;
        EXPECT_LT(r.energy, 1e-8 * k0 * k0) << dim;
        EXPECT_LT(r.momentum, 1e-8 * k0 * k0) << dim;
    }
}

TEST(Densities, GaugeShiftAndForceIdentity)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    PhysParams par;
    par.q = 1.7;
    par.m = 0.8;
    par.chi = 0.9;
    auto f = make_frame(3, Axis{0, 0.1, 5}, {centered_axis(1, 6), centered_axis(1, 5), centered_axis(1, 7)}, par);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.psi[i] = cplx(nd(rng), nd(rng));
        f.phi[i] = nd(rng);
    }
    const auto base = densities(f, log_nl());
    const double shift = 0.37;
    auto g = f;
    for (auto& p : g.phi) p += shift;
    const auto shifted = densities(g, log_nl());
    const double coef = par.q * par.q / (par.m * par.c * par.c);
    const auto n = detail::dims_of(f.t, f.x);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(shifted.rho[i] - base.rho[i], -coef * shift * std::norm(f.psi[i]), 1e-12 * (1 + std::fabs(base.rho[i])));
        const auto c = detail::unflatten(i, n);
        for (int k = 0; k < 3; ++k) {
            const double dphi = detail::fd2(f.phi, i, c[std::size_t(k + 1)], n[std::size_t(k + 1)], detail::stride(n, k + 1),
                                            f.x[std::size_t(k)].h);
            EXPECT_DOUBLE_EQ(base.force[std::size_t(k)][i] + base.rho[i] * dphi, 0.0);
        }
    }
}

TEST(Densities, NoiseFieldResidualsAreLarge)
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    auto f = make_frame(1, Axis{0, 0.01, 7}, line(1, 21), PhysParams{});
    for (auto& p : f.psi) p = cplx(nd(rng), nd(rng));
    const auto r = conservation_residuals(f, log_nl());
    // A non-solution control: residuals scale like 1/h^2 and are far above any solution's.
    EXPECT_GT(r.continuity, 1.0);
    EXPECT_GT(r.energy, 1.0);
    EXPECT_GT(r.momentum, 1.0);
}

TEST(Densities, RejectsBadInput)
{
    auto f = make_frame(1, Axis{0, 0.1, 5}, line(1, 9), PhysParams{});
    f.psi[3] = cplx(std::nan(""), 0);
    try {
        densities(f, log_nl());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_field);
    }
    auto g = make_frame(1, Axis{0, 0.1, 5}, line(1, 9), PhysParams{});
    g.phi.pop_back();
    try {
        conservation_residuals(g, log_nl());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::shape);
    }
    auto h = make_frame(1, Axis{0, 0.1, 5}, line(1, 9), PhysParams{});
    const auto dg = densities(h, log_nl());
    EXPECT_THROW(totals(dg, 0, Domain::ball({0.5, 0, 0}, 0.6)), Error);
    EXPECT_NO_THROW(totals(dg, 0, Domain::ball({0.5, 0, 0}, 0.5)));
}

TEST(Boost, ZeroVelocityIsTheRestState)
{
    const auto par = half_compton();
    const auto spec = make_boost(gausson(), {0, 0, 0}, par);
    const auto f = boosted_field(spec, 1, Axis{0.0, 0.3, 3}, line(4, 41), par);
    const double w0 = par.omega0();
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t it = 0; it < 3; ++it)
        for (std::size_t i = 0; i < 41; ++i) {
            const double y = f.x[0].at(i), t = f.t.at(it);
            const cplx want = std::polar(std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y), -w0 * t);
            EXPECT_LT(std::abs(f.psi[f.index(it, i, 0, 0)] - want), 32 * eps);  // ulp floor of O(1) values
        }
}

TEST(Boost, ProfileContractsAlongVelocity)
{
    PhysParams par;
    par.chi = 0.1;
    const auto spec = make_boost(gausson(), {0.6, 0, 0}, par);
    const std::array<Axis, 3> ax{centered_axis(2, 5), centered_axis(2, 5), centered_axis(2, 5)};
    const auto f = boosted_field(spec, 3, Axis{0, 1, 1}, ax, par);
    // |psi| at (x, 0, 0) equals |psi| at rest at (gamma x, 0, 0).
    const double cg = std::pow(std::numbers::pi, -0.75);
    for (std::size_t i = 0; i < 5; ++i) {
        const double x = ax[0].at(i);
        EXPECT_NEAR(std::abs(f.psi[f.index(0, i, 2, 2)]), cg * std::exp(-0.5 * 1.5625 * x * x), 1e-9);
        EXPECT_NEAR(std::abs(f.psi[f.index(0, 2, i, 2)]), cg * std::exp(-0.5 * x * x), 1e-9);
    }
    EXPECT_THROW(kinematics(BoostSpec{{1.0, 0, 0}}, 1.0), Error);
}

TEST(Boost, FreeObservablesClosedForm)
{
    BoostSpec s;
    s.v = {0.6, 0, 0};
    const auto o = free_observables(s, 0.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(o.energy, 1.25);
    EXPECT_DOUBLE_EQ(o.momentum[0], 0.75);
    EXPECT_DOUBLE_EQ(o.mass, 1.25);
    EXPECT_DOUBLE_EQ(o.rest_mass, 1.0);
    s.v = {0, 0, 0};
    EXPECT_DOUBLE_EQ(free_observables(s, 0.005, 1.0, 1.0).energy, 1.005);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 50; ++i) {
        s.v = {u(rng), u(rng), u(rng)};
        const double c = 1.0 + u(rng) + 0.5, th = 0.5 + u(rng);
        const auto p = free_observables(s, th, 2.0, c);
        EXPECT_EQ(p.energy - p.mass * c * c, 0.0);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(p.momentum[std::size_t(k)], p.mass * s.v[std::size_t(k)], 1e-15);
    }
}

TEST(Boost, LineTotalsMatchClosedForm)
{
    const double beta = 0.6, h = 1.0 / 16;
    const auto f = boosted_line(beta, h, h / 4, 3);
    const auto dg = densities(f, log_nl());
    const auto t = totals(dg, 1);
    BoostSpec s;
    s.v = {beta, 0, 0};
    const auto o = free_observables(s, 0.125, 1.0, 1.0);
    EXPECT_NEAR(t.energy / o.energy, 1.0, 0.01);
    EXPECT_NEAR(t.momentum[0] / o.momentum[0], 1.0, 0.01);
    EXPECT_NEAR(t.current[0] / beta, 1.0, 0.01);
    EXPECT_NEAR(t.charge, 1.0, 0.01);
}

TEST(Boost, ChargeAndCurrentAreExact)
{
    const double beta = 0.6, h = 1.0 / 32;
    const auto f = boosted_line(beta, h, 1e-4, 3);
    const auto t = totals(densities(f, log_nl()), 1);
    EXPECT_NEAR(t.charge, 1.0, 1e-6);
    EXPECT_NEAR(t.current[0], beta, 1e-3);
}

TEST(Boost, VolumeTotalsMatchClosedForm)
{
    const auto par = half_compton();
    const auto spec = make_boost(gausson(), {0.6, 0, 0}, par);
    const double h = 1.0 / 8;
    const std::array<Axis, 3> ax{centered_axis(4, 65), centered_axis(4.5, 73), centered_axis(4.5, 73)};
    const auto f = boosted_field(spec, 3, Axis{0, h / 4, 3}, ax, par);
    const auto t = totals(densities(f, log_nl()), 1);
    const auto o = free_observables(spec, 0.125, 1.0, 1.0);
    EXPECT_NEAR(t.charge, 1.0, 0.01);
    EXPECT_NEAR(t.energy / o.energy, 1.0, 0.02);
    EXPECT_NEAR(t.momentum[0] / o.momentum[0], 1.0, 0.02);
    EXPECT_NEAR(t.current[0] / 0.6, 1.0, 0.02);
    EXPECT_NEAR(t.momentum[1], 0.0, 1e-10);
}

TEST(Boost, ConservationResidualsConvergeAtSecondOrder)
{
    const double h = 1.0 / 16;
    const auto coarse = conservation_residuals(boosted_line(0.6, h, h / 2, 9), log_nl());
    const auto fine = conservation_residuals(boosted_line(0.6, h / 2, h / 4, 17), log_nl());
    EXPECT_GE(coarse.continuity / fine.continuity, 3.5);
    EXPECT_LE(coarse.continuity / fine.continuity, 4.5);
    EXPECT_GE(coarse.energy / fine.energy, 3.5);
    EXPECT_LE(coarse.energy / fine.energy, 4.5);
    EXPECT_GE(coarse.momentum / fine.momentum, 3.5);
    EXPECT_LE(coarse.momentum / fine.momentum, 4.5);
}

TEST(Boost, TotalsDriftBoundedByResidual)
{
    const double h = 1.0 / 32;
    const auto f = boosted_line(0.6, h, h / 2, 9);
    const auto dg = densities(f, log_nl());
    const auto r = conservation_residuals(f, log_nl());
    const auto first = totals(dg, 2), last = totals(dg, 6);
    const double span = 4 * f.t.h, width = f.x[0].hi() - f.x[0].lo;
    EXPECT_LE(std::fabs(last.energy - first.energy), r.energy * span * width);
    EXPECT_LE(std::fabs(last.momentum[0] - first.momentum[0]), r.momentum * span * width);
}
