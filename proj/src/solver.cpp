#include "thickspray/solver.hpp"

#include "thickspray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thickspray {

const char* to_string(Splitting s) { return s == Splitting::Lie ? "lie" : "strang"; }
const char* to_string(MomentumMode m) { return m == MomentumMode::Explicit ? "explicit" : "semi-implicit"; }

void SolverConfig::validate() const {
    std::ostringstream bad;
    if (!(eps >= 0.0)) bad << "eps must be >= 0; ";
    if (!(dt > 0.0)) bad << "dt must be > 0; ";
    if (!(T_end >= 0.0)) bad << "T_end must be >= 0; ";
    if (!(safety > 0.0 && safety <= 1.0)) bad << "safety must lie in (0, 1]; ";
    if (penrose_cadence < 1) bad << "penrose cadence must be >= 1; ";
    if (!(tail_tol >= 0.0)) bad << "tail tolerance must be >= 0; ";
    if (norm_m < 1) bad << "norm order m must be >= 1; ";
    if (!bad.str().empty()) throw Error(ErrorKind::Config, "solver config: " + bad.str());
}

namespace {

ScalarField scaled_sum(const ScalarField& a, double ca, const ScalarField& b, double cb) {
    ScalarField out(a.d, a.n);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = ca * a[i] + cb * b[i];
    return out;
}

VectorField scaled_sum(const VectorField& a, double ca, const VectorField& b, double cb) {
    VectorField out(a.d, a.n);
    for (int c = 0; c < a.d; ++c) out.comp[c] = scaled_sum(a.comp[c], ca, b.comp[c], cb);
    return out;
}

void require_positive_mass(const ScalarField& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!(m[i] > 0.0)) {
            std::ostringstream msg;
            msg << "fluid mass " << m[i] << " not positive at node " << i;
            throw Error(ErrorKind::Vacuum, msg.str());
        }
}

void require_bounded(const VectorField& u, double limit) {
    double top = 0.0;
    for (const auto& c : u.comp)
        for (double x : c.values) {
            if (!std::isfinite(x)) throw Error(ErrorKind::Divergence, "non-finite fluid velocity");
            top = std::max(top, std::abs(x));
        }
    if (top > limit) {
        std::ostringstream msg;
        msg << "fluid velocity blew up: |u|_inf = " << top;
        throw Error(ErrorKind::Divergence, msg.str());
    }
}

ScalarField mass_rhs(const ScalarField& m, const VectorField& u) {
    VectorField flux(u.d, u.n);
    for (int a = 0; a < u.d; ++a)
        for (std::size_t i = 0; i < m.size(); ++i) flux.comp[a][i] = m[i] * u.comp[a][i];
    auto div = divergence(flux);
    for (auto& x : div.values) x = -x;
    return div;
}

/// Right side of the velocity equation. With m_bar > 0 the constant
/// coefficient part (1/m_bar) Lame u is left out for an implicit solve.
VectorField velocity_rhs(const ScalarField& m, const ScalarField& rho, const VectorField& u,
                         const ScalarField& rho_f, const VectorField& j_f, const PressureLaw& law,
                         const FluidTerms& terms, double m_bar) {
    int d = u.d;
    VectorField out(d, u.n);
    if (terms.convection) {
        std::vector<VectorField> grads;
        for (int b = 0; b < d; ++b) grads.push_back(gradient(u.comp[b]));
        for (int b = 0; b < d; ++b) {
            ScalarField adv(d, u.n);
            for (int a = 0; a < d; ++a)
                for (std::size_t i = 0; i < m.size(); ++i) adv[i] += u.comp[a][i] * grads[b].comp[a][i];
            adv = dealias(adv);
            for (std::size_t i = 0; i < m.size(); ++i) out.comp[b][i] -= adv[i];
        }
    }
    if (terms.pressure) {
        ScalarField p(rho.d, rho.n);
        for (std::size_t i = 0; i < rho.size(); ++i) p[i] = law.p(rho[i]);
        auto gp = gradient(p);
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < m.size(); ++i) out.comp[a][i] -= gp.comp[a][i] / rho[i];
    }
    if (terms.viscosity) {
        auto L = apply_lame(u);
        double inv_bar = m_bar > 0.0 ? 1.0 / m_bar : 0.0;
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < m.size(); ++i) out.comp[a][i] += (1.0 / m[i] - inv_bar) * L.comp[a][i];
    }
    if (terms.drag) {
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < m.size(); ++i)
                out.comp[a][i] += (j_f.comp[a][i] - rho_f[i] * u.comp[a][i]) / m[i];
    }
    return out;
}

double harmonic_mean(const ScalarField& m) {
    double s = 0.0;
    for (double x : m.values) s += 1.0 / x;
    return static_cast<double>(m.size()) / s;
}

}  // namespace

SimState SimState::initial(const Distribution& f, const ScalarField& rho, const VectorField& u) {
    SimState s;
    s.f = f;
    s.rho_f = density_moment(f);
    s.j_f = current_moment(f);
    s.fluid = FluidState::from_rho(rho, u, s.rho_f);
    s.min_f = f.min();
    return s;
}

VlasovResult vlasov_step(const Distribution& f, const VectorField& E, double dt, double tail_tol) {
    VlasovResult r;
    if (dt == 0.0) {
        r.f = f;
        r.min_before = f.min();
        return r;
    }
    GriddedForceHistory hist(E.d, E.n);
    hist.push(0.0, dt, E);
    r.f = pushforward_representation(f, hist, dt, dt, tail_tol);
    const auto& g = f.grid;
    std::size_t nv = g.nv_total();
    double w = g.v_weight() / static_cast<double>(g.nx_total());
    double lo = 0.0, clipped = 0.0;
    for (std::size_t i = 0; i < g.nx_total(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            double& x = r.f.values[i * nv + j];
            lo = std::min(lo, x);
            if (x < 0.0) {
                row -= x;
                x = 0.0;
            }
        }
        clipped += row * w;
    }
    r.min_before = lo;
    r.clipped_mass = clipped;
    return r;
}

ScalarField mass_step(const ScalarField& m, const VectorField& u, double dt) {
    require_finite(m.values, "fluid mass");
    auto m1 = scaled_sum(m, 1.0, mass_rhs(m, u), dt);
    auto m2 = scaled_sum(m, 0.75, scaled_sum(m1, 1.0, mass_rhs(m1, u), dt), 0.25);
    auto m3 = scaled_sum(m, 1.0 / 3.0, scaled_sum(m2, 1.0, mass_rhs(m2, u), dt), 2.0 / 3.0);
    require_positive_mass(m3);
    return m3;
}

VectorField momentum_step(const FluidState& state, const Distribution& f, const PressureLaw& law, double dt,
                          MomentumMode mode, const FluidTerms& terms) {
    const auto& m = state.m;
    require_positive_mass(m);
    for (std::size_t i = 0; i < state.rho.size(); ++i)
        if (!(state.rho[i] > 0.0)) throw Error(ErrorKind::Vacuum, "density not positive");
    auto rho_f = density_moment(f);
    auto j_f = current_moment(f);
    bool implicit = mode == MomentumMode::SemiImplicit && terms.viscosity;
    double m_bar = implicit ? harmonic_mean(m) : 0.0;
    auto L = [&](const VectorField& u) { return velocity_rhs(m, state.rho, u, rho_f, j_f, law, terms, m_bar); };
    const auto& u = state.u;
    auto u1 = scaled_sum(u, 1.0, L(u), dt);
    auto u2 = scaled_sum(u, 0.75, scaled_sum(u1, 1.0, L(u1), dt), 0.25);
    auto u3 = scaled_sum(u, 1.0 / 3.0, scaled_sum(u2, 1.0, L(u2), dt), 2.0 / 3.0);
    if (implicit) u3 = solve_lame_implicit(u3, dt / m_bar);
    return u3;
}

FluidState fluid_step(const FluidState& state, const ScalarField& rho_f, const VectorField& j_f,
                      const PressureLaw& law, double dt, const SolverConfig& cfg) {
    bool implicit = cfg.momentum == MomentumMode::SemiImplicit && cfg.terms.viscosity;
    double m_bar = implicit ? harmonic_mean(state.m) : 0.0;
    double Theta = cfg.bounds.Theta;
    struct Stage {
        ScalarField m;
        VectorField u;
    };
    auto rhs = [&](const Stage& s) {
        require_positive_mass(s.m);
        auto rho = rho_from_mass(s.m, rho_f, Theta);
        return Stage{mass_rhs(s.m, s.u), velocity_rhs(s.m, rho, s.u, rho_f, j_f, law, cfg.terms, m_bar)};
    };
    auto combine = [](const Stage& a, double ca, const Stage& b, double cb) {
        return Stage{scaled_sum(a.m, ca, b.m, cb), scaled_sum(a.u, ca, b.u, cb)};
    };
    Stage y{state.m, state.u};
    auto y1 = combine(y, 1.0, rhs(y), dt);
    auto y2 = combine(y, 0.75, combine(y1, 1.0, rhs(y1), dt), 0.25);
    auto y3 = combine(y, 1.0 / 3.0, combine(y2, 1.0, rhs(y2), dt), 2.0 / 3.0);
    require_positive_mass(y3.m);
    if (implicit) y3.u = solve_lame_implicit(y3.u, dt / m_bar);
    require_bounded(y3.u, cfg.blowup);
    FluidState out;
    out.m = y3.m;
    out.u = y3.u;
    out.rho = rho_from_mass(out.m, rho_f, Theta);
    return out;
}

VectorField kinetic_force(const FluidState& state, const PressureLaw& law, const SolverConfig& cfg) {
    if (cfg.terms.pressure) return compute_force(state, law, cfg.eps);
    return state.u;
}

double cfl_limit(const PhaseGrid& grid, const ScalarField& m, MomentumMode mode, double safety) {
    double dx = grid.dx();
    double limit = safety * dx / grid.Vmax;
    if (mode == MomentumMode::Explicit) limit = std::min(limit, safety * dx * dx * m.min() / (2.0 * grid.d));
    return limit;
}

namespace {

struct Moments {
    ScalarField rho_f;
    VectorField j_f;
};

/// Force for a kinetic substep of length h, using rho at the substep
/// midpoint predicted from the continuity equation of the particles.
VectorField midpoint_force(const SimState& s, const PressureLaw& law, const SolverConfig& cfg, double h) {
    if (!cfg.terms.pressure) return s.fluid.u;
    auto div_j = divergence(s.j_f);
    ScalarField rho_f_mid(s.rho_f.d, s.rho_f.n);
    for (std::size_t i = 0; i < rho_f_mid.size(); ++i) rho_f_mid[i] = s.rho_f[i] - 0.5 * h * div_j[i];
    FluidState mid = s.fluid;
    mid.rho = rho_from_mass(s.fluid.m, rho_f_mid, cfg.bounds.Theta);
    return compute_force(mid, law, cfg.eps);
}

void kinetic_substep(SimState& s, const VectorField& E, double t0, double h, const SolverConfig& cfg,
                     double& min_f) {
    auto r = vlasov_step(s.f, E, h, cfg.tail_tol);
    s.f = std::move(r.f);
    s.clipped_mass += r.clipped_mass;
    min_f = std::min(min_f, r.min_before);
    s.rho_f = density_moment(s.f);
    s.j_f = current_moment(s.f);
    if (s.history) s.history->push(t0, t0 + h, E);
}

void step_with(SimState& s, const PressureLaw& law, const SolverConfig& cfg, double dt) {
    double t0 = s.t;
    double min_f = 0.0;
    bool kin = cfg.evolve_kinetic, flu = cfg.evolve_fluid;
    if (cfg.splitting == Splitting::Strang) {
        double h = 0.5 * dt;
        if (kin) kinetic_substep(s, midpoint_force(s, law, cfg, h), t0, h, cfg, min_f);
        if (flu) s.fluid = fluid_step(s.fluid, s.rho_f, s.j_f, law, dt, cfg);
        if (kin) kinetic_substep(s, midpoint_force(s, law, cfg, h), t0 + h, h, cfg, min_f);
    } else {
        if (kin) kinetic_substep(s, kinetic_force(s.fluid, law, cfg), t0, dt, cfg, min_f);
        if (flu) s.fluid = fluid_step(s.fluid, s.rho_f, s.j_f, law, dt, cfg);
    }
    if (kin) s.min_f = min_f;
    s.fluid.rho = rho_from_mass(s.fluid.m, s.rho_f, cfg.bounds.Theta);
    s.t = t0 + dt;
    ++s.steps;
    auto verdict = check_bounds(s.fluid, s.f, cfg.bounds);
    if (!verdict.ok) {
        std::ostringstream msg;
        msg << "pointwise bounds failed: " << verdict.failed << " at node " << verdict.where << " (value "
            << verdict.value << ", t = " << s.t << ")";
        throw Error(ErrorKind::Bound, msg.str());
    }
}

}  // namespace

void step(SimState& state, const PressureLaw& law, const SolverConfig& cfg) { step_with(state, law, cfg, cfg.dt); }

double NormTracker::add(const SimState& s) {
    double f_norm, rho2, u_m, u2;
    try {
        f_norm = weighted_phase_norm(s.f, m_ - 1, r_);
        rho2 = std::pow(sobolev_norm(s.fluid.rho, m_), 2);
        u_m = sobolev_norm(s.fluid.u, m_);
        u2 = std::pow(sobolev_norm(s.fluid.u, m_ + 1), 2);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Resolution) return std::numeric_limits<double>::quiet_NaN();
        throw;
    }
    if (first_) {
        first_ = false;
    } else {
        double h = s.t - last_t_;
        rho_int_ += 0.5 * h * (rho2 + last_rho2_);
        u_int_ += 0.5 * h * (u2 + last_u2_);
    }
    last_t_ = s.t;
    last_rho2_ = rho2;
    last_u2_ = u2;
    f_sup_ = std::max(f_sup_, f_norm);
    u_sup_ = std::max(u_sup_, u_m);
    return f_sup_ + std::sqrt(rho_int_) + u_sup_ + std::sqrt(u_int_);
}

namespace {

DiagnosticRow make_row(const SimState& s) {
    DiagnosticRow r;
    r.t = s.t;
    r.fluid_mass = s.fluid.m.mean();
    r.particle_mass = s.rho_f.mean();
    r.clipped_mass = s.clipped_mass;
    r.min_f = s.min_f;
    r.min_rho = s.fluid.rho.min();
    r.max_rhof = s.rho_f.max();
    return r;
}

double div_defect(const SimState& prev, const SimState& now, double dt) {
    VectorField jm = scaled_sum(prev.j_f, 0.5, now.j_f, 0.5);
    auto div = divergence(jm);
    ScalarField res(div.d, div.n);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = (now.rho_f[i] - prev.rho_f[i]) / dt + div[i];
    return res.l2();
}

}  // namespace

RunResult run(SimState state, const PressureLaw& law, const SolverConfig& cfg, const StepObserver& observer) {
    RunResult res;
    NormTracker tracker(cfg.norm_m, cfg.norm_r);
    auto penrose = [&](const SimState& s, const PenroseSampling& sampling) {
        double m = check_condition(s.f, s.fluid, law, sampling, cfg.variant, cfg.c_required).margin;
        res.min_margin = std::isnan(res.min_margin) ? m : std::min(res.min_margin, m);
        return m;
    };
    try {
        cfg.validate();
        if (cfg.keep_force_history && !state.history)
            state.history = std::make_shared<GriddedForceHistory>(state.f.grid.d, state.f.grid.Nx);
        auto verdict = check_bounds(state.fluid, state.f, cfg.bounds);
        if (!verdict.ok) throw Error(ErrorKind::Bound, "initial data violate the pointwise bounds: " + verdict.failed);
        double tail = tail_fraction(state.f);
        if (tail > cfg.tail_tol) {
            std::ostringstream msg;
            msg << "initial tail fraction " << tail << " exceeds " << cfg.tail_tol;
            throw Error(ErrorKind::Tail, msg.str());
        }
        if (cfg.enforce_cfl && cfg.evolve_fluid) {
            double lim = cfl_limit(state.f.grid, state.fluid.m, cfg.momentum, cfg.safety);
            if (cfg.dt > lim) {
                std::ostringstream msg;
                msg << "dt = " << cfg.dt << " exceeds the CFL limit " << lim;
                throw Error(ErrorKind::Config, msg.str());
            }
        }
        auto row = make_row(state);
        if (cfg.penrose_monitor) row.penrose_margin = res.initial_margin = penrose(state, cfg.full_sampling);
        if (cfg.track_norms) row.N_mr = tracker.add(state);
        res.rows.push_back(row);
        if (observer) observer(state, row);

        auto n_steps = static_cast<std::size_t>(std::ceil(cfg.T_end / cfg.dt - 1e-9));
        for (std::size_t k = 1; k <= n_steps; ++k) {
            SimState prev = state;
            double t_next = k == n_steps ? cfg.T_end : static_cast<double>(k) * cfg.dt;
            double h = t_next - state.t;
            step_with(state, law, cfg, h);
            state.t = t_next;
            row = make_row(state);
            row.div_defect = div_defect(prev, state, h);
            bool last = k == n_steps;
            if (cfg.penrose_monitor && (last || k % static_cast<std::size_t>(cfg.penrose_cadence) == 0))
                row.penrose_margin = penrose(state, last ? cfg.full_sampling : cfg.monitor_sampling);
            if (last && cfg.penrose_monitor) res.final_margin = row.penrose_margin;
            if (cfg.track_norms) row.N_mr = tracker.add(state);
            double clipped_step = state.clipped_mass - prev.clipped_mass;
            res.max_fluid_mass_defect =
                std::max(res.max_fluid_mass_defect, std::abs(row.fluid_mass - res.rows.back().fluid_mass));
            res.max_particle_mass_defect =
                std::max(res.max_particle_mass_defect,
                         std::abs(row.particle_mass - clipped_step - res.rows.back().particle_mass));
            res.max_div_defect = std::max(res.max_div_defect, row.div_defect);
            res.max_clipped_mass = std::max(res.max_clipped_mass, state.clipped_mass);
            res.rows.push_back(row);
            if (observer) observer(state, row);
        }
    } catch (const Error& e) {
        res.ok = false;
        res.error = e.kind();
        res.message = e.what();
    }
    res.final_state = std::move(state);
    return res;
}

MomentDefects moment_consistency_check(const SimState& state, const Distribution& f_in,
                                       const GriddedForceHistory* history, double dt_sub) {
    MomentDefects out;
    if (state.t == 0.0) return out;
    if (!history || history->empty()) throw Error(ErrorKind::Config, "moment check needs a stored force history");
    if (std::abs(history->t_min()) > 1e-12 || history->t_max() < state.t - 1e-12)
        throw Error(ErrorKind::Config, "force history does not cover [0, t]");
    auto ft = pushforward_representation(f_in, *history, state.t, dt_sub);
    auto rho = density_moment(ft);
    auto j = current_moment(ft);
    out.rho_f = scaled_sum(rho, 1.0, state.rho_f, -1.0).l2();
    out.j_f = scaled_sum(j, 1.0, state.j_f, -1.0).l2();

    double delta = std::min(0.5 * state.t, 1e-2);
    auto fp = pushforward_representation(f_in, *history, state.t - delta, dt_sub);
    SimState a, b;
    a.rho_f = density_moment(fp);
    a.j_f = current_moment(fp);
    b.rho_f = rho;
    b.j_f = j;
    out.conservation = div_defect(a, b, delta);
    return out;
}

}  // namespace thickspray
