#include <gtest/gtest.h>

#include <cmath>

#include "kgconc/characteristics.hpp"
#include "kgconc/scale.hpp"
#include "kgconc/trajectory.hpp"

using namespace kgconc;

namespace {

CharContext context(const Trajectory& tr, double zeta, Mode mode = Mode::nonlinear)
{
    return make_context(tr, scale_point(zeta, 1.1, 2.1, 0.003, 1.0, 1.0, mode), -3.0, 3.0);
}

}  // namespace

TEST(Trajectory, TanhDerivativesMatchFiniteDifferences)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.3);
    const double h = 1e-4;
    for (double t : {-1.7, 0.0, 0.4, 2.2}) {
        EXPECT_NEAR(tr.dbeta(t), (tr.beta(t + h) - tr.beta(t - h)) / (2 * h), 1e-8);
        EXPECT_NEAR(tr.d2beta(t), (tr.dbeta(t + h) - tr.dbeta(t - h)) / (2 * h), 1e-8);
        EXPECT_NEAR(tr.d3beta(t), (tr.d2beta(t + h) - tr.d2beta(t - h)) / (2 * h), 1e-7);
        EXPECT_NEAR(tr.v(t), (tr.r(t + h) - tr.r(t - h)) / (2 * h), 1e-8);
    }
}

TEST(Trajectory, PolynomialPositionIntegratesVelocity)
{
    const auto tr = Trajectory::polynomial({0.3, 0.05, -0.01}, 2.0, 1.5);
    EXPECT_DOUBLE_EQ(tr.r(0.0), 1.5);
    EXPECT_NEAR(tr.r(2.0), 1.5 + 2.0 * (0.6 + 0.05 * 2.0 - 0.01 * 8.0 / 3.0), 1e-14);
    EXPECT_NEAR(tr.dbeta(1.0), 0.05 - 0.02, 1e-15);
}

TEST(Trajectory, LogCoshPositionStaysFiniteForLargeTimes)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    EXPECT_TRUE(std::isfinite(tr.r(1e4)));
    EXPECT_NEAR(tr.r(1e4) - tr.r(1e4 - 1.0), 0.5, 1e-12);
}

TEST(Trajectory, GammaVelocityDerivativeMatchesHighPrecisionOracle)
{
    // -(d/dt)(gamma beta) at t = 0 and 0.7, evaluated at 40 digits.
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    EXPECT_NEAR(-tr.d_gamma_v(0.0), -0.12989160133094786, 1e-15);
    EXPECT_NEAR(-tr.d_gamma_v(0.7), -0.09074191407511054, 1e-15);
}

TEST(Trajectory, AdmissibilityBoundsAndCone)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto adm = admissibility(tr, -3, 3);
    EXPECT_TRUE(adm.ok());
    EXPECT_NEAR(adm.eps1, 0.4 + 0.1 * std::tanh(3.0), 1e-12);
    EXPECT_NEAR(adm.beta_check, 0.4 - 0.1 * std::tanh(3.0), 1e-12);
    const TauView view{&tr, 0.02};
    for (double tau0 : {-40.0, 0.0, 25.0})
        for (double s : {-3.0, -0.5, 0.7, 2.5}) {
            const double B = std::fabs(view.B(tau0, s));
            EXPECT_GE(B, adm.b_min() * std::fabs(s) * (1 - 1e-12));
            EXPECT_LE(B, adm.b_max() * std::fabs(s) * (1 + 1e-12));
        }
}

TEST(Trajectory, RejectsSuperluminalAndSignChange)
{
    EXPECT_THROW(require_admissible(Trajectory::constant(1.0), -1, 1), Error);
    EXPECT_THROW(require_admissible(Trajectory::tanh_profile(0.0, 0.3, 1.0), -1, 1), Error);
    EXPECT_THROW(Trajectory::tanh_profile(0.4, 0.1, 0.0), Error);
}

TEST(Scale, ClosedFormsAtMilli)
{
    const auto sp = scale_point(1e-3);
    EXPECT_NEAR(sp.a, 3.0435366554060366e-3, 1e-15);
    EXPECT_NEAR(sp.theta_bar, 2.5100609008859216, 1e-13);
    EXPECT_NEAR(sp.R, 7.639462359147801e-3, 1e-15);
    EXPECT_NEAR(sp.a_c, 1e-3 * sp.a, 1e-18);
    EXPECT_NEAR(sp.chi, sp.a_c, 1e-18);
}

TEST(Scale, SequenceIsMonotoneAndGated)
{
    const auto seq = scale_sequence({1e-2, 3e-3, 1e-3, 1e-4});
    for (std::size_t i = 1; i < seq.size(); ++i) {
        EXPECT_LT(seq[i].a, seq[i - 1].a);
        EXPECT_GT(seq[i].theta_bar, seq[i - 1].theta_bar);
        EXPECT_LT(seq[i].R, seq[i - 1].R);
    }
    EXPECT_THROW(scale_point(1e-3, 1.1, 2.0), Error);
    EXPECT_THROW(scale_point(1e-3, 1.1, 2.1, 0.01), Error);
    EXPECT_THROW(scale_sequence({1e-3, 1e-2}), Error);
}

TEST(Characteristics, QTermValues)
{
    const auto tr = Trajectory::constant(0.6);
    // zeta^2 (beta^2 + 2 sigma) at z = 0; linear mode keeps only -zeta^2 / gamma^2.
    EXPECT_NEAR(q_term(0.0, 0.0, context(tr, 0.01)), 1.3685644868579023e-05, 1e-18);
    EXPECT_NEAR(q_term(0.0, 0.0, context(tr, 0.01, Mode::linear)), -6.4e-05, 1e-18);
    EXPECT_NEAR(q_term(3.0, 1.0, context(tr, 0.01)), 1e-4 * 2.0 * -0.5 * std::log(1.25), 1e-18);
}

TEST(Characteristics, ThetaBranch)
{
    QValue q{-2.2314e-5, 0.0};
    EXPECT_NEAR(theta_from(0.0, 0.6, 1.25, q).theta, -1.4876147533176953e-05, 1e-19);
    EXPECT_DOUBLE_EQ(theta_from(0.0, 0.6, 1.25, QValue{}).theta, 0.0);
    EXPECT_THROW(theta_from(0.0, 0.6, 1.25, QValue{-0.6, 0.0}), Error);
    // Negative velocity selects the other branch.
    EXPECT_NEAR(theta_from(0.0, -0.6, 1.25, q).theta, 1.4876147533176953e-05, 1e-19);
}

TEST(Characteristics, ImaginaryPartVanishes)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    for (double t : {-2.5, -0.3, 0.0, 1.1, 2.9}) EXPECT_LT(std::fabs(imag_q(t / ctx.sp.a, ctx)), 1e-12);
}

TEST(Characteristics, QuadraticConstraintHolds)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    for (double tau : {-30.0, 5.0, 60.0})
        for (double z : {-1.9, -0.4, 0.8, 2.0}) {
            const double phi = phi_at(tau, z, ctx);
            const auto f = frame_coeffs(ctx, tau);
            const double Q = q_term(tau, z, ctx), Z = theta_of_phi(phi, tau, z, ctx).theta;
            EXPECT_NEAR(Q - 2 * f.gamma * phi + phi * phi - 2 * f.beta * f.gamma * Z - Z * Z, 0.0, 1e-12);
        }
}

TEST(Characteristics, ConstantVelocityFollowsFreeLine)
{
    const auto tr = Trajectory::constant(0.5);
    const auto ctx = context(tr, 1e-3);
    const auto path = integrate_characteristic(0.0, ctx);
    for (std::size_t i = 0; i < path.s.size(); ++i)
        EXPECT_LE(std::fabs(path.z[i] - 1.5 * path.s[i]), 1e-3 * std::fabs(path.s[i]) + 1e-14);
}

TEST(Characteristics, MaximumMatchesIndependentIntegrator)
{
    // Reference maxima of |Phi| from an independent Runge-Kutta run (rtol 1e-11).
    const auto tr = Trajectory::constant(0.4);
    const auto p2 = integrate_characteristic(0.0, context(tr, 1e-2));
    EXPECT_NEAR(p2.max_abs_phi / 3.212576919967519e-4, 1.0, 1e-6);
    const auto p3 = integrate_characteristic(0.0, context(tr, 1e-3));
    EXPECT_NEAR(p3.max_abs_phi / 2.2155290023050406e-05, 1.0, 1e-6);
    EXPECT_TRUE(p3.cone_ok);
    EXPECT_TRUE(p3.discriminant_ok);
}

TEST(Characteristics, PathsEndOnTheStripEdge)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 3e-3);
    for (double tau0 : {-200.0, 0.0, 150.0}) {
        const auto p = integrate_characteristic(tau0, ctx);
        EXPECT_NEAR(std::fabs(p.z.front()), ctx.sp.theta_bar, 1e-12);
        EXPECT_NEAR(std::fabs(p.z.back()), ctx.sp.theta_bar, 1e-12);
        EXPECT_LT(p.s_minus, 0.0);
        EXPECT_GT(p.s_plus, 0.0);
        EXPECT_TRUE(p.cone_ok);
    }
}

TEST(Characteristics, PointEvaluationIsDeterministic)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    const double a = phi_at(12.5, 1.3, ctx), b = phi_at(12.5, 1.3, ctx);
    EXPECT_EQ(a, b);
    EXPECT_EQ(phi_at(12.5, 0.0, ctx), 0.0);
    EXPECT_EQ(phase_S(12.5, 0.0, ctx), 0.0);
    EXPECT_EQ(balancing_potential(12.5, 0.0, ctx), 0.0);
}

TEST(Characteristics, FanIsInjective)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    // At a fixed tau the height z of the characteristic strictly decreases with its start tau0.
    const double tau = 20.0, smax = detail::s_bound(ctx, ctx.sp.theta_bar);
    double prev = INFINITY;
    for (int k = 0; k < 64; ++k) {
        const double s = smax * (1.0 - 2.0 * k / 63.0);
        const double z = detail::char_state(ctx, tau - s, s)[0];
        EXPECT_LT(z, prev);
        prev = z;
    }
}

TEST(Characteristics, FastPatchMatchesPointInversion)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    std::vector<double> taus, zs;
    for (int j = -4; j <= 4; ++j) taus.push_back(16.5 + j * ctx.h_tau());
    for (int i = -10; i <= 10; ++i) zs.push_back(ctx.sp.theta_bar * i / 10.0);
    const auto P = phi_patch(taus, zs, ctx);
    double scale = 0.0;
    for (double v : P[4]) scale = std::max(scale, std::fabs(v));
    for (std::size_t j : {0u, 4u, 8u})
        for (std::size_t i = 0; i < zs.size(); i += 2) EXPECT_NEAR(P[j][i], phi_at(taus[j], zs[i], ctx), 1e-8 * scale);
}

TEST(Characteristics, FieldSolvesTheTransportEquationAtSecondOrder)
{
    // Phi_tau + (-Theta_Phi - beta) Phi_z = -2 Phi (sigma' + beta z) - 2 z Theta + Theta_z, checked with
    // central differences at two steps.
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    const double tau = 16.0, z = 1.1;
    auto residual = [&](double h) {
        const double phi = phi_at(tau, z, ctx);
        const double pt = (phi_at(tau + h, z, ctx) - phi_at(tau - h, z, ctx)) / (2 * h);
        const double pz = (phi_at(tau, z + h, ctx) - phi_at(tau, z - h, ctx)) / (2 * h);
        const auto f = frame_coeffs(ctx, tau);
        const auto th = theta_of_phi(phi, tau, z, ctx);
        return pt + (-th.theta_dphi - f.beta) * pz -
               (-2 * phi * (f.sigma_t + f.beta * z) - 2 * z * th.theta + th.theta_dz);
    };
    const double r1 = residual(0.1), r2 = residual(0.05);
    EXPECT_GT(std::fabs(r1 / r2), 3.5);
    EXPECT_LT(std::fabs(r1 / r2), 4.5);
}

TEST(Characteristics, PhaseAndBalancingPotentialAtReferencePoint)
{
    const auto tr = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    const auto ctx = context(tr, 1e-2);
    const double tau = 0.3 / ctx.sp.a;
    // S from adaptive quadrature versus a composite Gauss rule on the fast patch.
    std::vector<double> x, w;
    numeric::GaussPanel<8>::nodes(0.0, 1.0, x, w);
    const auto P = phi_patch({tau}, x, ctx);
    double I = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) I += w[i] * theta_of_phi(P[0][i], tau, x[i], ctx).theta;
    EXPECT_NEAR(phase_S(tau, 1.0, ctx), -I / ctx.sp.zeta, 1e-9 * std::fabs(I / ctx.sp.zeta));
    EXPECT_LT(std::fabs(balancing_potential(tau, 1.0, ctx)), 1e-4);
}

TEST(Characteristics, AcceleratingPotential)
{
    const auto uni = Trajectory::constant(0.6);
    const double chi = 0.01, w0 = 1.0 / chi;
    auto p = accelerating_potential(2.0, 0.3, uni, {}, 1.0, 1.0, chi);
    EXPECT_EQ(p.phi_ac_slope, 0.0);
    EXPECT_NEAR(p.s_phase, w0 * 2.0 / 1.25, 1e-9);
    const auto acc = Trajectory::tanh_profile(0.4, 0.1, 1.0);
    p = accelerating_potential(0.0, 0.5, acc, [](double t) { return 0.1 * t; }, 1.0, 1.0, chi);
    EXPECT_NEAR(p.phi_ac_slope, -0.12989160133094786, 1e-14);
    EXPECT_NEAR(p.phi_ac, 0.5 * p.phi_ac_slope, 1e-15);
}
