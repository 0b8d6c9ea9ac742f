#pragma once

#include "thickspray/grid.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace thickspray {

/// Barotropic pressure p(rho) with its derivative.
struct PressureLaw {
    std::string name;
    std::function<double(double)> p;
    std::function<double(double)> dp;

    static PressureLaw power(double gamma);
    static PressureLaw custom(std::string name, std::function<double(double)> p,
                              std::function<double(double)> dp);
};

struct AdmissibilityVerdict {
    bool ok = true;
    std::string reason;
    double witness_rho = 0.0;  // first sampled density that violates an assumption
};

/// Checks p(0) = 0, p' > 0 and rho*p' nondecreasing on a log grid of
/// `samples` points in [rho_lo, rho_hi].
AdmissibilityVerdict check_pressure_admissible(const PressureLaw& law, int samples = 512,
                                               double rho_lo = 1e-6, double rho_hi = 1e3);

/// Fluid unknowns. m = (1 - rho_f) rho is the conserved mass variable.
struct FluidState {
    ScalarField rho;
    ScalarField m;
    VectorField u;

    /// Builds the state from rho and u, computing m with the given rho_f.
    static FluidState from_rho(const ScalarField& rho, const VectorField& u, const ScalarField& rho_f);
};

/// rho = m / (1 - rho_f). Raises a bound error where 1 - rho_f < (1 - Theta)/2.
ScalarField rho_from_mass(const ScalarField& m, const ScalarField& rho_f, double Theta);

/// E = u - p'(rho) grad(J_eps rho). Raises a vacuum error if rho <= 0.
VectorField compute_force(const FluidState& state, const PressureLaw& law, double eps);

/// j_f - rho_f u.
VectorField brinkman_source(const Distribution& f, const VectorField& u);

/// Constants of the pointwise condition on the densities.
struct BoundWitness {
    double Theta = 0.5;
    double mu = 0.5;
    double theta_lower = 0.25;
    double theta_upper = 4.0;
};

struct BoundVerdict {
    bool ok = true;
    std::string failed;      // name of the first failing inequality
    std::size_t where = 0;   // flat spatial index of the failure
    double value = 0.0;      // offending value
    double max_rho_f = 0.0;
    double min_rho = 0.0;
    double min_mass = 0.0;
    double max_mass = 0.0;
};

/// rho_f <= (Theta+1)/2, rho >= mu/2, theta_lower/2 <= (1-rho_f) rho <= 2 theta_upper.
BoundVerdict check_bounds(const FluidState& state, const Distribution& f, const BoundWitness& w);

/// Strict hypotheses on initial data: rho_f < Theta < 1, mu <= rho,
/// theta_lower <= (1-rho_f) rho <= theta_upper.
BoundVerdict check_initial_hypotheses(const FluidState& state, const Distribution& f, const BoundWitness& w);

/// Velocity bump amplitude * exp(-|v - center|^2 / width^2).
struct Bump {
    double amplitude = 1.0;
    double width = 1.0;
    std::array<double, 2> center{0.0, 0.0};
};

/// f(x, v) = (1 + mod_amp cos(mod_mode x_0)) * sum of bumps.
struct KineticInit {
    std::vector<Bump> bumps;
    int mod_mode = 1;
    double mod_amp = 0.0;
};

/// rho = rho0 (1 + rho_amp cos(rho_mode x_0)), u = u0.
struct FluidInit {
    double rho0 = 1.0;
    int rho_mode = 1;
    double rho_amp = 0.0;
    std::array<double, 2> u0{0.0, 0.0};
};

Distribution make_distribution(const PhaseGrid& grid, const KineticInit& init);
FluidState make_fluid(const PhaseGrid& grid, const FluidInit& init, const Distribution& f);

}  // namespace thickspray
