#pragma once

#include "thickspray/characteristics.hpp"
#include "thickspray/error.hpp"
#include "thickspray/grid.hpp"
#include "thickspray/model.hpp"
#include "thickspray/penrose.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace thickspray {

enum class Splitting { Lie, Strang };
enum class MomentumMode { Explicit, SemiImplicit };

const char* to_string(Splitting s);
const char* to_string(MomentumMode m);

/// Switches for the individual fluid terms. `pressure` also removes the
/// pressure gradient from the kinetic force.
struct FluidTerms {
    bool convection = true;
    bool pressure = true;
    bool viscosity = true;
    bool drag = true;
};

struct SolverConfig {
    double eps = 0.1;
    double dt = 1e-3;
    double T_end = 0.5;
    Splitting splitting = Splitting::Strang;
    MomentumMode momentum = MomentumMode::Explicit;
    double safety = 0.2;
    bool enforce_cfl = true;

    bool evolve_kinetic = true;
    bool evolve_fluid = true;
    FluidTerms terms;
    BoundWitness bounds;
    double tail_tol = 1e-10;
    double blowup = 1e6;

    bool penrose_monitor = true;
    int penrose_cadence = 20;
    PenroseSampling monitor_sampling{16, 12, 8, 4};
    PenroseSampling full_sampling{};
    PenroseVariant variant = PenroseVariant::Standard;
    double c_required = 0.1;

    bool track_norms = true;
    int norm_m = 4;
    double norm_r = 3.0;

    bool keep_force_history = false;

    /// Throws a config error on invalid values.
    void validate() const;
};

struct SimState {
    double t = 0.0;
    std::size_t steps = 0;
    Distribution f;
    FluidState fluid;
    ScalarField rho_f;
    VectorField j_f;
    double clipped_mass = 0.0;  // cumulative
    double min_f = 0.0;         // before flooring, last kinetic update
    /// Piecewise-constant kinetic force actually used, when requested.
    std::shared_ptr<GriddedForceHistory> history;

    /// Fills moments and the fluid mass variable from f, rho and u.
    static SimState initial(const Distribution& f, const ScalarField& rho, const VectorField& u);
};

struct VlasovResult {
    Distribution f;
    double clipped_mass = 0.0;
    double min_before = 0.0;
};

/// f(x, v) <- e^{d dt} f(X, V) along backward characteristics with E frozen.
VlasovResult vlasov_step(const Distribution& f, const VectorField& E, double dt, double tail_tol = 1e-10);

/// SSP-RK3 for m_t = -div(m u) with u frozen.
ScalarField mass_step(const ScalarField& m, const VectorField& u, double dt);

/// Advances u with m and f frozen.
VectorField momentum_step(const FluidState& state, const Distribution& f, const PressureLaw& law, double dt,
                          MomentumMode mode, const FluidTerms& terms = {});

/// Joint update of (m, u) with f frozen; rho is rebuilt from m.
FluidState fluid_step(const FluidState& state, const ScalarField& rho_f, const VectorField& j_f,
                      const PressureLaw& law, double dt, const SolverConfig& cfg);

/// Kinetic force for the given fluid state.
VectorField kinetic_force(const FluidState& state, const PressureLaw& law, const SolverConfig& cfg);

/// Largest dt allowed by the transport and (explicit mode) diffusive limits.
double cfl_limit(const PhaseGrid& grid, const ScalarField& m, MomentumMode mode, double safety);

struct DiagnosticRow {
    double t = 0.0;
    double fluid_mass = 0.0;
    double particle_mass = 0.0;
    double clipped_mass = 0.0;
    double min_f = 0.0;
    double min_rho = 0.0;
    double max_rhof = 0.0;
    double penrose_margin = std::numeric_limits<double>::quiet_NaN();
    double N_mr = std::numeric_limits<double>::quiet_NaN();
    double div_defect = std::numeric_limits<double>::quiet_NaN();
};

/// One split step. Throws on any sub-step or bound failure.
void step(SimState& state, const PressureLaw& law, const SolverConfig& cfg);

/// Running sup / time integrals entering N_{m,r}.
class NormTracker {
public:
    NormTracker(int m, double r) : m_(m), r_(r) {}
    /// Adds the state at time t; returns the current value, NaN if unresolved.
    double add(const SimState& s);

private:
    int m_;
    double r_;
    bool first_ = true;
    double last_t_ = 0.0, f_sup_ = 0.0, u_sup_ = 0.0, rho_int_ = 0.0, u_int_ = 0.0;
    double last_rho2_ = 0.0, last_u2_ = 0.0;
};

struct RunResult {
    SimState final_state;
    std::vector<DiagnosticRow> rows;
    bool ok = true;
    std::optional<ErrorKind> error;
    std::string message;
    double initial_margin = std::numeric_limits<double>::quiet_NaN();
    double final_margin = std::numeric_limits<double>::quiet_NaN();
    double min_margin = std::numeric_limits<double>::quiet_NaN();
    double max_fluid_mass_defect = 0.0;     // per step
    double max_particle_mass_defect = 0.0;  // per step, clipping added back
    double max_div_defect = 0.0;
    double max_clipped_mass = 0.0;
};

/// Per-step observer; called after each accepted step.
using StepObserver = std::function<void(const SimState&, const DiagnosticRow&)>;

/// Advances to T_end or the first error, which is recorded instead of thrown.
RunResult run(SimState state, const PressureLaw& law, const SolverConfig& cfg, const StepObserver& observer = {});

struct MomentDefects {
    double rho_f = 0.0;  // L2 distance between grid and pushforward densities
    double j_f = 0.0;
    double conservation = 0.0;  // |d_t rho_f + div j_f| on the pushforward
};

/// Compares the moments of the evolved f with those of the Lagrangian
/// pushforward of f_in along the stored force history.
MomentDefects moment_consistency_check(const SimState& state, const Distribution& f_in,
                                       const GriddedForceHistory* history, double dt_sub = 1e-3);

}  // namespace thickspray
