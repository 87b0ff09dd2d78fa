#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kgconc/assembly.hpp"
#include "kgconc/diagnostics.hpp"

using namespace kgconc;

namespace {

const Nonlinearity& log_nl(Mode mode = Mode::nonlinear)
{
    static const Nonlinearity nl = nonlinearity_from_ground_state(make_ground_state(Family::gaussian));
    static const Nonlinearity lin = nonlinearity_from_ground_state(make_ground_state(Family::gaussian), Mode::linear);
    return mode == Mode::linear ? lin : nl;
}

AssemblyGrid coarse(std::size_t nt = 13)
{
    AssemblyGrid g;
    g.time_samples = nt;
    return g;
}

AssembledSolution build(const Trajectory& tr, double zeta, Mode mode = Mode::nonlinear, double gamma0 = 0.0,
                        std::size_t nt = 13)
{
    const auto sp = scale_point(zeta, 1.1, 2.1, 0.003, 1.0, 1.0, mode);
    return assemble_field(make_context(tr, sp, -3.0, 3.0, gamma0), coarse(nt));
}

}  // namespace

TEST(Assembly, ShapeIsPreservedExactly)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    EXPECT_LT(shape_deviation(build(tr, 1e-2)), 1e-14);
    EXPECT_LT(shape_deviation(build(tr, 1e-2, Mode::nonlinear, 1.2)), 1e-14);
}

TEST(Assembly, AmplitudeTracksLorentzFactor)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto sol = build(tr, 1e-2);
    const std::size_t mid = sol.z.size() / 2;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const auto p = assembled_point(sol, k, mid);
        const double amp = std::abs(p.psi) * std::sqrt(sol.ctx.sp.a) * std::pow(std::numbers::pi, 0.25);
        EXPECT_NEAR(amp, 1.0 / std::sqrt(tr.gamma(sol.times[k])), 1e-13);
    }
}

TEST(Assembly, ConstantVelocityAmplitudeIsStationary)
{
    const auto sol = build(Trajectory::constant(0.5), 1e-2);
    for (std::size_t i = 0; i < sol.z.size(); i += 17)
        for (std::size_t k = 1; k < sol.times.size(); ++k)
            EXPECT_DOUBLE_EQ(std::abs(assembled_point(sol, k, i).psi), std::abs(assembled_point(sol, 0, i).psi));
}

TEST(Assembly, PhaseOnTheTrajectoryIsMinusS)
{
    const auto sol = build(Trajectory::tanh_profile(0.4, 0.1, 1.0), 1e-2);
    const std::size_t mid = sol.z.size() / 2;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const auto p = assembled_point(sol, k, mid);
        EXPECT_EQ(p.S, 0.0);
        const cplx u = p.psi / std::abs(p.psi) * std::polar(1.0, sol.s_phase[k]);
        EXPECT_NEAR(u.real(), 1.0, 1e-9);
    }
}

TEST(Assembly, ResidualIsToleranceLimited)
{
    const auto sol = build(Trajectory::constant(0.4), 1e-3);
    const auto r = kg_residual(sol, log_nl());
    EXPECT_LE(r.linf, 1e-6);
    EXPECT_LE(r.l2, r.linf);
}

TEST(Assembly, AblationOfBalancingPotentialIsVisible)
{
    const auto sol = build(Trajectory::tanh_profile(0.4, 0.1, 1.0), 1e-2);
    const auto full = kg_residual(sol, log_nl()), cut = kg_residual(sol, log_nl(), false);
    EXPECT_LT(full.linf, 1e-8);
    EXPECT_GT(cut.linf, 10.0 * full.linf);
    // The dropped potential is of order zeta^2 relative to the Gaussian.
    EXPECT_GT(cut.linf, 1e-7);
}

TEST(Assembly, LinearModeResidualIsToleranceLimited)
{
    const auto sol = build(Trajectory::tanh_profile(0.4, 0.1, 1.0), 3e-3, Mode::linear);
    EXPECT_LT(kg_residual(sol, log_nl(Mode::linear)).linf, 1e-8);
    // The nonlinear operator does not annihilate the linear construction.
    EXPECT_GT(kg_residual(sol, log_nl()).linf, 1e-7);
}

TEST(Assembly, FixedContractionAtMatchingSpeedIsTheFreeSolution)
{
    // gamma0 = gamma(beta0) with constant beta0: Q vanishes identically, so Phi = Theta = 0.
    const double beta = 0.4, g = 1.0 / std::sqrt(1.0 - beta * beta);
    const auto sol = build(Trajectory::constant(beta), 1e-2, Mode::nonlinear, g);
    double worst = 0.0;
    for (const auto& p : sol.patches)
        for (const auto& col : p.phi)
            for (double v : col) worst = std::max(worst, std::fabs(v));
    EXPECT_LT(worst, 1e-12 * 1e-4);  // rounding relative to zeta^2
    EXPECT_LT(kg_residual(sol, log_nl()).linf, 1e-12);
    // Charge over the strip is q erf(gamma theta_bar) in closed form.
    const auto obs = restricted_quantities(sol);
    for (double Q : obs.charge) EXPECT_NEAR(Q, std::erf(g * sol.ctx.sp.theta_bar), 1e-9);  // Simpson, h = 1/64
}

TEST(Assembly, LineDensitiesReduceToFreeValues)
{
    // With Phi = Theta = 0 the line energy and momentum integrate to gamma m c^2 and gamma m v up to
    // zeta^2 and strip truncation.
    const auto tr = Trajectory::constant(0.6);
    const auto sol = build(tr, 1e-3);
    const auto d = assembled_densities(sol, 3);
    const auto w = numeric::simpson_weights(sol.z.size(), sol.ctx.sp.a * sol.hz());
    double E = 0, P = 0, Q = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        E += w[i] * d.energy[i];
        P += w[i] * d.momentum[i];
        Q += w[i] * d.rho[i];
    }
    const double trunc = std::erf(sol.ctx.sp.theta_bar);
    EXPECT_NEAR(Q / trunc, 1.0, 1e-4);
    EXPECT_NEAR(E / (1.25 * trunc), 1.0, 1e-4);
    EXPECT_NEAR(P / (1.25 * 0.6 * trunc), 1.0, 1e-4);
}

TEST(Assembly, CsvAndFrameExport)
{
    const auto sol = build(Trajectory::tanh_profile(0.4, 0.1, 1.0), 1e-2, Mode::nonlinear, 0.0, 5);
    std::ostringstream os;
    write_assembled_csv(os, sol);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "t,tau,z,re_psi,im_psi,phi,Phi,Z,S");
    EXPECT_EQ(std::size_t(std::count(s.begin(), s.end(), '\n')), 1 + sol.times.size() * sol.z.size());
    const auto f = assembled_frame(sol);
    EXPECT_EQ(f.frame, FrameKind::moving);
    EXPECT_EQ(f.t.n, sol.times.size());
    EXPECT_NEAR(f.x[0].hi(), sol.ctx.sp.R, 1e-12 * sol.ctx.sp.R);
}

TEST(Assembly, RejectsCoarseGrids)
{
    const auto tr = Trajectory::constant(0.4);
    const auto ctx = make_context(tr, scale_point(1e-2), -1, 1);
    AssemblyGrid g;
    g.z_per_unit = 32;
    EXPECT_THROW(assemble_field(ctx, g), Error);
    g = AssemblyGrid{};
    g.time_samples = 3;
    EXPECT_THROW(assemble_field(ctx, g), Error);
}
