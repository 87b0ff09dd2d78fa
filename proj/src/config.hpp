#pragma once

#include <limits>
#include <string>
#include <vector>

#include "kgconc/kgconc.hpp"

namespace kgconc::app {

/// Trajectory spec as written in the config; built into a Trajectory on demand.
struct TrajectorySpec {
    std::string kind = "tanh";  ///< constant | tanh | polynomial
    double beta0 = 0.4, beta1 = 0.1, k = 1.0;
    std::vector<double> coeffs{0.5};
    double r0 = 0.0;

    Trajectory build(double c) const;
};

struct RestSection {
    int states = 3;                 ///< node counts 0 .. states-1
    RestSolverOptions solver;
    std::vector<double> expect_xi;  ///< optional targets for --assert
    double xi_tol = 0.05;
    double residual_max = 1e-6;
};

struct BoostSection {
    double beta = 0.6;
    int dim = 1;
    double h = 1.0 / 16;        ///< spacing in units of a
    double ht_ratio = 0.25;     ///< time step over spatial step
    std::size_t time_samples = 3;
    double half_width = 6.0;    ///< in units of a
    double tolerance = 0.01;    ///< relative error of totals against closed forms
    double order_lo = 3.5, order_hi = 4.5;
};

struct FamilySection {
    Family profile = Family::gaussian;
    double p = 0.0;
    double N = 8.0;
    double alpha = 0.9;
    std::vector<double> thetas{4, 8, 16, 32};
    double a_power = 4.0;
    double zeta_over_a = 1.0;
    double beta_max = 0.5;
    bool expect_pass = true;
};

struct VerifySection {
    std::string input;  ///< field CSV (t,x,y,z,re_psi,im_psi,phi)
    int dim = 1;
    double residual_max = 1e-2;
};

struct RunConfig {
    PhysParams phys;
    Family family = Family::gaussian;
    double family_p = 0.0;
    Mode mode = Mode::nonlinear;
    double holder_alpha = 0.9;

    RestSection rest;
    BoostSection boost;
    TrajectorySpec trajectory;

    std::vector<double> zetas{1e-2, 3e-3, 1e-3};
    double one_plus = 1.1, two_plus = 2.1, delta = 0.003, gamma0 = 0.0;
    AssemblyGrid grid;
    CharOptions numerics;
    std::vector<double> phi0{0.0};  ///< polynomial coefficients of phi0(t)
    bool ablation = true;
    double kg_residual_max = 1e-8;  ///< 100x the default ODE and quadrature tolerance
    double shape_max = 1e-12;

    FamilySection family_check;
    VerifySection verify;

    std::string source;  ///< path the config was read from

    GroundState ground_state() const { return make_ground_state(family, family_p); }
    Nonlinearity nonlinearity() const { return nonlinearity_from_ground_state(ground_state(), mode, holder_alpha); }
    SweepConfig sweep_config() const;
};

/// Reads an INI file. Unknown sections or keys and malformed values raise ErrorKind::config.
RunConfig load_config(const std::string& path);

/// Every gate that can be checked without running a construction. Throws ErrorKind::config.
void validate(const RunConfig& cfg);

}  // namespace kgconc::app
