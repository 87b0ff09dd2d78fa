#include <gtest/gtest.h>

#include <cmath>

#include "kgconc/diagnostics.hpp"
#include "kgconc/lorentz_boost.hpp"
#include "kgconc/rest_states.hpp"

using namespace kgconc;

namespace {

const Nonlinearity& log_nl()
{
    static const Nonlinearity nl = nonlinearity_from_ground_state(make_ground_state(Family::gaussian));
    return nl;
}

const RestState& gausson()
{
    static const RestState rs = solve_rest_state(log_nl(), 0);
    return rs;
}

// a = 1, a_C = 0.5, so Theta = a_C^2 / (2 a^2) = 0.125.
PhysParams half_compton()
{
    PhysParams p;
    p.chi = 0.5;
    return p;
}

FieldFrame boosted_line(double beta, double ht, std::size_t nt)
{
    const auto par = half_compton();
    const auto spec = make_boost(gausson(), {beta * par.c, 0, 0}, par);
    return boosted_field(spec, 1, Axis{0.0, ht, nt}, {centered_axis(8.0, 513), Axis{}, Axis{}}, par);
}

std::vector<ConcentrationRow> family_rows(const GroundState& gs, double a_power)
{
    return synthetic_rows(synthetic_family(gs, 8.0, 0.9, {4, 8, 16, 32}, a_power), log_nl(), 0.5);
}

}  // namespace

TEST(Restricted, UniformMotionOnALine)
{
    const double beta = 0.6, g = 1.25;
    // The phase oscillates at gamma omega0, so time differences need ht << 1 for the charge.
    const auto f = boosted_line(beta, 1e-3, 9);
    const auto obs = restricted_quantities(f, log_nl(), Trajectory::constant(beta), 4.0);
    ASSERT_EQ(obs.t.size(), 9u);
    for (std::size_t k = 0; k < obs.t.size(); ++k) {
        EXPECT_NEAR(obs.r_hat[k], beta * obs.t[k], 1e-15);
        EXPECT_NEAR(obs.ergocenter[k], obs.r_hat[k], 1e-8);
        EXPECT_NEAR(obs.energy[k] / (g * 1.125), 1.0, 0.01);
        EXPECT_NEAR(obs.charge[k], 1.0, 1e-5);
        EXPECT_NEAR(obs.ergo_identity[k], 0.0, 1e-12);
        EXPECT_TRUE(std::isnan(obs.boundary_flux[k]));
    }
}

TEST(Restricted, RegionMustStayOnTheGrid)
{
    const auto f = boosted_line(0.6, 0.1, 5);
    EXPECT_THROW(restricted_quantities(f, log_nl(), Trajectory::constant(0.6), 7.9), Error);
    EXPECT_THROW(restricted_quantities(f, log_nl(), Trajectory::constant(0.6), 0.0), Error);
}

TEST(NewtonEinstein, UniformMotionHasNoForce)
{
    const double beta = 0.6;
    const auto tr = Trajectory::constant(beta);
    // Residuals scale with ht through the one-sided stencils at the ends of the window.
    const auto obs = restricted_quantities(boosted_line(beta, 1e-3, 17), log_nl(), tr, 4.0);
    const auto r = newton_einstein_row(obs, tr, 1.0, 1.0);
    EXPECT_LT(r.newton, 1e-4);
    EXPECT_LT(r.m0_flatness, 1e-5);
    EXPECT_NEAR(r.m0_mean / 1.125, 1.0, 0.01);
    EXPECT_LT(r.charge_drift, 1e-5);
    EXPECT_LT(r.energy_defect, 1e-4);
    EXPECT_TRUE(std::isnan(r.flux_bound));
    EXPECT_TRUE(std::isnan(r.rho_crosscheck));  // no force anywhere
}

TEST(NewtonEinstein, ReportNeedsThreeRows)
{
    const auto tr = Trajectory::constant(0.6);
    const auto obs = restricted_quantities(boosted_line(0.6, 1e-3, 5), log_nl(), tr, 4.0);
    const auto sps = scale_sequence({1e-2, 3e-3, 1e-3});
    EXPECT_THROW(newton_einstein_report({obs, obs}, tr, {sps[0], sps[1]}), Error);
    EXPECT_THROW(newton_einstein_report({obs, obs, obs}, tr, {sps[0], sps[1]}), Error);
    const auto rep = newton_einstein_report({obs, obs, obs}, tr, sps);
    EXPECT_EQ(rep.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rep.energy_inf_t0, obs.energy[2]);
    EXPECT_NEAR(rep.rho_inf, 1.0, 1e-5);
}

TEST(NewtonEinstein, CumulativeIntegralIsExactForCubics)
{
    const double h = 0.1;
    std::vector<double> f;
    for (int i = 0; i <= 10; ++i) {
        const double t = i * h;
        f.push_back(t * t * t - 2.0 * t + 1.0);
    }
    const auto F = detail::cumulative_integral(f, h, 5);
    auto prim = [](double t) { return 0.25 * t * t * t * t - t * t + t; };
    for (int i = 0; i <= 10; ++i) EXPECT_NEAR(F[std::size_t(i)], prim(i * h) - prim(0.5), 1e-14);
}

TEST(Concentration, TransverseClosedForm)
{
    for (double c : {-2.0, -0.3, 0.0, 0.7}) {
        numeric::QuadOptions qo;
        qo.rel_tol = 1e-12;
        const double num = numeric::integrate([&](double u) { return std::exp(-u) * std::fabs(u + c); }, 0.0, 60.0, qo);
        EXPECT_NEAR(detail::transverse_abs(c), num, 1e-10);
    }
}

TEST(Concentration, SyntheticFamiliesThatSatisfyTheHypothesisPass)
{
    for (const auto& gs : {make_ground_state(Family::gaussian), make_ground_state(Family::power_law, 4.0)}) {
        EXPECT_TRUE(anthen_holds(synthetic_family(gs, 8.0, 0.9, {4, 8, 16, 32}, 4.0)));
        const auto rep = concentration_checks(family_rows(gs, 4.0));
        EXPECT_TRUE(rep.all());
    }
}

TEST(Concentration, ControlFamilyViolatesBoundaryDecay)
{
    // a = theta^-20 shrinks faster than the power-law tail decays.
    const auto gs = make_ground_state(Family::power_law, 4.0);
    const auto fam = synthetic_family(gs, 8.0, 0.9, {4, 8, 16, 32}, 20.0);
    EXPECT_FALSE(anthen_holds(fam));
    const auto rep = concentration_checks(synthetic_rows(fam, log_nl(), 0.5));
    EXPECT_FALSE(rep.boundary_decay);
    EXPECT_FALSE(rep.all());
}

TEST(Concentration, SyntheticFamilyValidation)
{
    const auto gs = make_ground_state(Family::gaussian);
    EXPECT_THROW(synthetic_family(gs, 8.0, 1.0, {4, 8}, 4.0), Error);
    EXPECT_THROW(synthetic_family(gs, 1.0, 0.5, {4, 8}, 4.0), Error);
    EXPECT_THROW(synthetic_family(gs, 8.0, 0.5, {8, 4}, 4.0), Error);
    EXPECT_THROW(concentration_checks({ConcentrationRow{}}), Error);
}

TEST(Sweep, AssembledSequenceSatisfiesConcentrationAndRecordsFailures)
{
    // beta = 0.5 + 0.1 t; zeta = 0.1 is far outside the perturbative regime and must be recorded, not fatal.
    const auto tr = Trajectory::polynomial({0.5, 0.1});
    SweepConfig cfg;
    cfg.grid.time_samples = 21;
    cfg.ablation = false;
    const auto rep = convergence_sweep(tr, {0.1, 1e-2, 3e-3, 1e-3}, cfg, log_nl());
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_FALSE(rep.rows[0].ok());
    for (std::size_t n = 1; n < 4; ++n) {
        ASSERT_TRUE(rep.rows[n].ok()) << rep.rows[n].error;
        EXPECT_LT(rep.rows[n].shape, 1e-12);
        for (double v : rep.rows[n].obs.ergo_identity) EXPECT_LT(std::fabs(v), 1e-12);
    }
    EXPECT_TRUE(std::isfinite(rep.slopes.energy_vs_zeta));
    EXPECT_NEAR(rep.rho_inf, 1.0, 1e-3);
    ASSERT_TRUE(rep.concentration.has_value());
    EXPECT_EQ(rep.concentration->rows.size(), 3u);
    EXPECT_TRUE(rep.concentration->all());
}

TEST(Sweep, NeedsThreeScalePoints)
{
    EXPECT_THROW(convergence_sweep(Trajectory::constant(0.4), {1e-2, 1e-3}, SweepConfig{}, log_nl()), Error);
}
