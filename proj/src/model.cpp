#include "thickspray/model.hpp"

#include "thickspray/error.hpp"

#include <cmath>
#include <sstream>

namespace thickspray {

PressureLaw PressureLaw::power(double gamma) {
    if (!(gamma > 1.0)) throw Error(ErrorKind::Config, "pressure exponent must exceed 1");
    std::ostringstream name;
    name << "rho^" << gamma;
    return {name.str(), [gamma](double r) { return std::pow(r, gamma); },
            [gamma](double r) { return gamma * std::pow(r, gamma - 1.0); }};
}

PressureLaw PressureLaw::custom(std::string name, std::function<double(double)> p,
                                std::function<double(double)> dp) {
    return {std::move(name), std::move(p), std::move(dp)};
}

AdmissibilityVerdict check_pressure_admissible(const PressureLaw& law, int samples, double rho_lo,
                                               double rho_hi) {
    if (samples < 2 || !(rho_lo > 0.0) || !(rho_hi > rho_lo))
        throw Error(ErrorKind::Config, "invalid admissibility sampling");
    AdmissibilityVerdict v;
    double p0 = law.p(0.0);
    if (!std::isfinite(p0)) throw Error(ErrorKind::NumericInput, "p(0) is not finite");
    if (std::abs(p0) > 1e-14) {
        v.ok = false;
        v.reason = "p(0) != 0";
        return v;
    }
    double ratio = std::log(rho_hi / rho_lo) / (samples - 1);
    double prev = -INFINITY;
    for (int i = 0; i < samples; ++i) {
        double r = rho_lo * std::exp(ratio * i);
        double dp = law.dp(r);
        if (!std::isfinite(dp)) throw Error(ErrorKind::NumericInput, "p'(rho) is not finite");
        if (!(dp > 0.0)) {
            v.ok = false;
            v.reason = "p' not positive";
            v.witness_rho = r;
            return v;
        }
        double g = r * dp;
        if (g < prev - 1e-12 * std::abs(prev)) {
            v.ok = false;
            v.reason = "rho p' decreasing";
            v.witness_rho = r;
            return v;
        }
        prev = g;
    }
    return v;
}

FluidState FluidState::from_rho(const ScalarField& rho, const VectorField& u, const ScalarField& rho_f) {
    FluidState s{rho, rho, u};
    for (std::size_t i = 0; i < rho.size(); ++i) s.m[i] = (1.0 - rho_f[i]) * rho[i];
    return s;
}

ScalarField rho_from_mass(const ScalarField& m, const ScalarField& rho_f, double Theta) {
    double floor = 0.5 * (1.0 - Theta);
    ScalarField rho(m.d, m.n);
    for (std::size_t i = 0; i < m.size(); ++i) {
        double alpha = 1.0 - rho_f[i];
        if (!(alpha >= floor)) {
            std::ostringstream msg;
            msg << "1 - rho_f = " << alpha << " below floor " << floor << " at node " << i;
            throw Error(ErrorKind::Bound, msg.str());
        }
        rho[i] = m[i] / alpha;
    }
    return rho;
}

VectorField compute_force(const FluidState& state, const PressureLaw& law, double eps) {
    const auto& rho = state.rho;
    require_finite(rho.values, "density");
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (!(rho[i] > 0.0)) throw Error(ErrorKind::Vacuum, "density not positive at node " + std::to_string(i));
    auto grad = gradient(apply_j_epsilon(rho, eps));
    VectorField E = state.u;
    for (int a = 0; a < rho.d; ++a)
        for (std::size_t i = 0; i < rho.size(); ++i) E.comp[a][i] -= law.dp(rho[i]) * grad.comp[a][i];
    return E;
}

VectorField brinkman_source(const Distribution& f, const VectorField& u) {
    auto rho_f = density_moment(f);
    auto j = current_moment(f);
    for (int a = 0; a < f.grid.d; ++a)
        for (std::size_t i = 0; i < rho_f.size(); ++i) j.comp[a][i] -= rho_f[i] * u.comp[a][i];
    return j;
}

namespace {

BoundVerdict evaluate_bounds(const FluidState& state, const Distribution& f, double rhof_max, bool rhof_strict,
                             double rho_min, double m_min, double m_max) {
    auto rho_f = density_moment(f);
    BoundVerdict v;
    v.max_rho_f = rho_f.max();
    v.min_rho = INFINITY;
    v.min_mass = INFINITY;
    v.max_mass = -INFINITY;
    auto fail = [&](const char* what, std::size_t i, double value) {
        if (v.ok) {
            v.ok = false;
            v.failed = what;
            v.where = i;
            v.value = value;
        }
    };
    for (std::size_t i = 0; i < rho_f.size(); ++i) {
        double rf = rho_f[i], r = state.rho[i], m = (1.0 - rf) * r;
        v.min_rho = std::min(v.min_rho, r);
        v.min_mass = std::min(v.min_mass, m);
        v.max_mass = std::max(v.max_mass, m);
        if (rhof_strict ? !(rf < rhof_max) : !(rf <= rhof_max)) fail("rho_f upper bound", i, rf);
        if (!(r >= rho_min)) fail("rho lower bound", i, r);
        if (!(m >= m_min)) fail("fluid mass lower bound", i, m);
        if (!(m <= m_max)) fail("fluid mass upper bound", i, m);
    }
    return v;
}

}  // namespace

BoundVerdict check_bounds(const FluidState& state, const Distribution& f, const BoundWitness& w) {
    return evaluate_bounds(state, f, 0.5 * (w.Theta + 1.0), false, 0.5 * w.mu, 0.5 * w.theta_lower,
                           2.0 * w.theta_upper);
}

BoundVerdict check_initial_hypotheses(const FluidState& state, const Distribution& f, const BoundWitness& w) {
    if (!(w.Theta < 1.0) || !(w.mu > 0.0) || !(w.theta_lower > 0.0) || !(w.theta_upper >= w.theta_lower))
        throw Error(ErrorKind::Config, "invalid bound constants");
    return evaluate_bounds(state, f, w.Theta, true, w.mu, w.theta_lower, w.theta_upper);
}

Distribution make_distribution(const PhaseGrid& grid, const KineticInit& init) {
    grid.validate();
    if (init.bumps.size() > 4) throw Error(ErrorKind::Config, "at most 4 velocity bumps are supported");
    Distribution f(grid);
    std::size_t nv = grid.nv_total();
    std::vector<double> profile(nv, 0.0);
    double vc[2];
    for (std::size_t j = 0; j < nv; ++j) {
        grid.v_coords(j, vc);
        for (const auto& b : init.bumps) {
            if (!(b.width > 0.0)) throw Error(ErrorKind::Config, "bump width must be positive");
            double r2 = 0.0;
            for (int a = 0; a < grid.d; ++a) r2 += (vc[a] - b.center[a]) * (vc[a] - b.center[a]);
            profile[j] += b.amplitude * std::exp(-r2 / (b.width * b.width));
        }
    }
    double xc[2];
    for (std::size_t i = 0; i < grid.nx_total(); ++i) {
        grid.x_coords(i, xc);
        double mod = 1.0 + init.mod_amp * std::cos(init.mod_mode * xc[0]);
        for (std::size_t j = 0; j < nv; ++j) f.at(i, j) = mod * profile[j];
    }
    return f;
}

FluidState make_fluid(const PhaseGrid& grid, const FluidInit& init, const Distribution& f) {
    ScalarField rho = ScalarField::like(grid);
    double xc[2];
    for (std::size_t i = 0; i < grid.nx_total(); ++i) {
        grid.x_coords(i, xc);
        rho[i] = init.rho0 * (1.0 + init.rho_amp * std::cos(init.rho_mode * xc[0]));
    }
    VectorField u = VectorField::like(grid);
    for (int a = 0; a < grid.d; ++a)
        for (auto& x : u.comp[a].values) x = init.u0[a];
    return FluidState::from_rho(rho, u, density_moment(f));
}

}  // namespace thickspray
