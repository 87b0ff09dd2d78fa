#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "kgconc/rest_states.hpp"

using namespace kgconc;

namespace {
const Nonlinearity& log_nl()
{
    static const Nonlinearity nl = nonlinearity_from_ground_state(make_ground_state(Family::gaussian));
    return nl;
}

const RestState& state(int n)
{
    static const RestState s[3] = {solve_rest_state(log_nl(), 0), solve_rest_state(log_nl(), 1),
                                   solve_rest_state(log_nl(), 2)};
    return s[n];
}
}  // namespace

TEST(RestState, GroundStateIsTheGausson)
{
    const auto& rs = state(0);
    EXPECT_NEAR(rs.xi, 0.0, 1e-6);
    EXPECT_EQ(rs.node_count, 0);
    const double cg = std::pow(std::numbers::pi, -0.75);
    for (std::size_t i = 0; i < rs.r.size(); i += 97) {
        if (rs.r[i] < rs.r_trunc) {
            EXPECT_NEAR(rs.profile[i], cg * std::exp(-0.5 * rs.r[i] * rs.r[i]), 1e-8);
        }
    }
}

TEST(RestState, ExcitedEigenvalues)
{
    // Reference: independent scipy shooting (tolerance 1e-12) gives 2.17111 and 3.40595.
    EXPECT_NEAR(state(1).xi, 2.17111, 2e-4);
    EXPECT_NEAR(state(2).xi, 3.40595, 2e-4);
    EXPECT_NEAR(state(1).xi, 2.17, 0.05);
    EXPECT_NEAR(state(2).xi, 3.41, 0.05);
}

TEST(RestState, NodesNormAndDecay)
{
    for (int n = 0; n < 3; ++n) {
        const auto& rs = state(n);
        int changes = 0;
        for (std::size_t i = 1; i < rs.profile.size(); ++i)
            if (rs.profile[i] != 0.0 && rs.profile[i - 1] != 0.0 && (rs.profile[i] > 0) != (rs.profile[i - 1] > 0))
                ++changes;
        EXPECT_EQ(changes, n);
        // Independent quadrature of the stored samples.
        const double h = rs.r[1] - rs.r[0];
        const auto w = numeric::simpson_weights(rs.r.size(), h);
        double norm = 0;
        for (std::size_t i = 0; i < rs.r.size(); ++i)
            norm += w[i] * 4.0 * std::numbers::pi * rs.r[i] * rs.r[i] * rs.profile[i] * rs.profile[i];
        EXPECT_NEAR(norm, 1.0, 1e-6) << n;
        const std::size_t cut = std::size_t(rs.r_trunc / h + 0.5);
        EXPECT_LT(std::fabs(rs.profile[cut]), 1e-8) << n;
    }
}

TEST(RestState, ShapeCoefficientIsOneHalf)
{
    EXPECT_NEAR(state(0).theta0, 0.5, 1e-6);
    EXPECT_NEAR(shape_coefficient(make_ground_state(Family::gaussian)), 0.5, 1e-12);
    // For the logarithmic family a Pohozaev identity gives the same value for every radial state.
    EXPECT_NEAR(state(1).theta0, 0.5, 1e-5);
    EXPECT_NEAR(state(2).theta0, 0.5, 1e-5);
}

TEST(RestState, EquilibriumResidual)
{
    for (int n = 0; n < 3; ++n) EXPECT_LT(rest_residual(state(n), log_nl()), 1e-6) << n;
}

TEST(RestState, Runtime)
{
    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 0; n < 3; ++n) solve_rest_state(log_nl(), n);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(dt, 10.0);
}

TEST(RestState, RejectsLinearModeAndBadNodes)
{
    EXPECT_THROW(solve_rest_state(nonlinearity_from_ground_state(make_ground_state(Family::gaussian), Mode::linear), 0),
                 Error);
    EXPECT_THROW(solve_rest_state(log_nl(), 3), Error);
}

TEST(RestObservables, GroundStateAtRestFrequency)
{
    const double m = 1, c = 1, a = 1.0, ac = 0.1, chi = m * c * ac;
    const auto o = rest_observables(state(0), a, ac, chi, m, c);
    EXPECT_NEAR(o.omega, o.omega0, 1e-9 * o.omega0);
    EXPECT_NEAR(o.charge_norm, 1.0, 1e-9);
    // chi omega0 = m c^2 = 1, Theta = 0.5 * 0.01.
    EXPECT_NEAR(o.energy, 1.005, 1e-8);
    EXPECT_NEAR(o.xi_check, state(0).xi, 1e-9);
}

TEST(RestObservables, ExcitedFrequencyInvertsRelation)
{
    const double m = 2, c = 3, a = 0.5, ac = 0.05, chi = m * c * ac;
    for (int n = 1; n < 3; ++n) {
        const auto o = rest_observables(state(n), a, ac, chi, m, c);
        EXPECT_GT(o.omega, o.omega0);
        EXPECT_NEAR(o.xi_check, state(n).xi, 1e-9);
        EXPECT_NEAR(o.charge_norm, o.omega0 / o.omega, 1e-15);
    }
    EXPECT_THROW(rest_observables(state(1), a, 0.07, chi, m, c), Error);
}

TEST(RestObservables, EnergyOrdering)
{
    const double m = 1, c = 1, a = 1.0, ac = 0.1, chi = m * c * ac;
    const double e0 = rest_observables(state(0), a, ac, chi, m, c).energy;
    const double e1 = rest_observables(state(1), a, ac, chi, m, c).energy;
    const double e2 = rest_observables(state(2), a, ac, chi, m, c).energy;
    EXPECT_LT(e0, e1);
    EXPECT_LT(e1, e2);
}

TEST(RestObservables, StandingWaveQuadratureAgreesWithClosedForm)
{
    const double m = 1, c = 1;
    for (double ac : {0.1, 0.5}) {
        const double a = 1.0, chi = m * c * ac;
        const auto o = rest_observables(state(0), a, ac, chi, m, c);
        const double eq = standing_wave_energy(state(0), log_nl(), o, a, chi, m, c);
        EXPECT_NEAR(eq / o.energy, 1.0, 5e-3);
        EXPECT_NEAR(eq / o.energy, 1.0, 1e-7) << "tighter than the 0.5% contract";
    }
}
