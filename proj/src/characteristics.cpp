#include "thickspray/characteristics.hpp"

#include "thickspray/error.hpp"
#include "thickspray/fft.hpp"
#include "thickspray/parallel.hpp"
#include "thickspray/spline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace thickspray {

AnalyticForce::AnalyticForce(int d, Fn fn, double t_min, double t_max)
    : d_(d), fn_(std::move(fn)), t0_(t_min), t1_(t_max) {}

AnalyticForce AnalyticForce::zero(int d) {
    return AnalyticForce(d, [d](double, const double*, double* out) {
        for (int a = 0; a < d; ++a) out[a] = 0.0;
    });
}

AnalyticForce AnalyticForce::constant(int d, std::vector<double> value) {
    return AnalyticForce(d, [d, value](double, const double*, double* out) {
        for (int a = 0; a < d; ++a) out[a] = value.at(a);
    });
}

void AnalyticForce::evaluate(double tau, const double* x, double* out) const { fn_(tau, x, out); }

void GriddedForceHistory::push(double t_begin, double t_end, const VectorField& field) {
    if (field.d != d_ || field.n != n_) throw Error(ErrorKind::Config, "force field shape mismatch");
    if (!(t_end > t_begin)) throw Error(ErrorKind::Config, "force segment must have positive length");
    if (!segs_.empty() && std::abs(segs_.back().t1 - t_begin) > 1e-12 * std::max(1.0, std::abs(t_begin)))
        throw Error(ErrorKind::Config, "force segments must be contiguous");
    Segment seg{t_begin, t_end, {}};
    for (int a = 0; a < d_; ++a) seg.coeffs.push_back(fft::forward(field.comp[a].values, d_, n_));
    segs_.push_back(std::move(seg));
}

double GriddedForceHistory::t_min() const { return segs_.empty() ? 0.0 : segs_.front().t0; }
double GriddedForceHistory::t_max() const { return segs_.empty() ? 0.0 : segs_.back().t1; }

void GriddedForceHistory::evaluate(double tau, const double* x, double* out) const {
    if (segs_.empty()) throw Error(ErrorKind::Domain, "empty force history");
    auto it = std::upper_bound(segs_.begin(), segs_.end(), tau,
                               [](double t, const Segment& s) { return t < s.t1; });
    if (it == segs_.end()) it = segs_.end() - 1;
    if (tau < it->t0 - 1e-12 || tau > it->t1 + 1e-12) {
        std::ostringstream msg;
        msg << "force queried at t=" << tau << " outside [" << t_min() << ", " << t_max() << "]";
        throw Error(ErrorKind::Domain, msg.str());
    }
    for (int a = 0; a < d_; ++a) out[a] = trig_eval(it->coeffs[a], d_, n_, x);
}

std::vector<double> GriddedForceHistory::breakpoints() const {
    std::vector<double> b;
    for (std::size_t i = 1; i < segs_.size(); ++i) b.push_back(segs_[i].t0);
    return b;
}

FlowResult flow(const ForceField& F, const double* x, const double* v, double t, double s, double dt_sub) {
    if (!(dt_sub > 0.0)) throw Error(ErrorKind::Config, "dt_sub must be positive");
    double lo = std::min(s, t), hi = std::max(s, t);
    double slack = 1e-12 * std::max(1.0, std::abs(hi));
    if (lo < F.t_min() - slack || hi > F.t_max() + slack) {
        std::ostringstream msg;
        msg << "force not defined on [" << lo << ", " << hi << "]";
        throw Error(ErrorKind::Domain, msg.str());
    }
    int d = F.dim();
    FlowResult r;
    for (int a = 0; a < d; ++a) {
        r.X[a] = x[a];
        r.V[a] = v[a];
    }
    r.jacobian_phase = std::exp(d * (s - t));
    if (s == t) return r;

    std::vector<double> nodes{t};
    for (double b : F.breakpoints())
        if (b > lo && b < hi) nodes.push_back(b);
    nodes.push_back(s);
    if (s > t)
        std::sort(nodes.begin() + 1, nodes.end() - 1);
    else
        std::sort(nodes.begin() + 1, nodes.end() - 1, std::greater<double>());

    double Fm[2], Xm[2];
    for (std::size_t seg = 0; seg + 1 < nodes.size(); ++seg) {
        double span = nodes[seg + 1] - nodes[seg];
        long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / dt_sub - 1e-9)));
        double h = span / static_cast<double>(n);
        double e1 = -std::expm1(-h), eh = -std::expm1(-0.5 * h), decay = std::exp(-h);
        for (long k = 0; k < n; ++k) {
            double tau_m = nodes[seg] + (static_cast<double>(k) + 0.5) * h;
            F.evaluate(tau_m, r.X, Fm);
            for (int a = 0; a < d; ++a) Xm[a] = r.X[a] + eh * r.V[a] + (0.5 * h - eh) * Fm[a];
            F.evaluate(tau_m, Xm, Fm);
            for (int a = 0; a < d; ++a) {
                r.X[a] += e1 * r.V[a] + (h - e1) * Fm[a];
                r.V[a] = decay * r.V[a] + e1 * Fm[a];
            }
            ++r.substeps;
        }
    }
    return r;
}

namespace {

/// Solves the straightening fixed point for one (x, v).
StraightenResult solve_psi(const ForceField& F, const double* x, const double* v, double s, double t,
                           const StraightenOptions& opt) {
    int d = F.dim();
    StraightenResult res;
    for (int a = 0; a < d; ++a) res.psi[a] = v[a];
    if (s == t) return res;
    double e = -std::expm1(t - s);
    double target[2];
    for (int a = 0; a < d; ++a) target[a] = x[a] + e * v[a];
    double prev_step = -1.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        auto fr = flow(F, x, res.psi, t, s, opt.dt_sub);
        double next[2], step = 0.0, resid = 0.0, scale = 1.0;
        for (int a = 0; a < d; ++a) {
            double R = fr.X[a] - x[a] - e * res.psi[a];
            next[a] = v[a] - R / e;
            resid = std::max(resid, std::abs(fr.X[a] - target[a]));
            step = std::max(step, std::abs(next[a] - res.psi[a]));
            scale = std::max(scale, std::abs(res.psi[a]));
        }
        res.residual = resid;
        res.iterations = it;
        if (resid < opt.tol) return res;
        if (prev_step > 1e3 * 2.2e-16 * scale) {
            double q = step / prev_step;
            res.contraction = std::max(res.contraction, q);
            if (q >= 1.0) {
                std::ostringstream msg;
                msg << "straightening fixed point not contracting (ratio " << q << ") for |s-t|=" << std::abs(s - t);
                throw Error(ErrorKind::Horizon, msg.str());
            }
        }
        prev_step = step;
        for (int a = 0; a < d; ++a) res.psi[a] = next[a];
    }
    throw Error(ErrorKind::Horizon, "straightening did not reach tolerance within the iteration limit");
}

}  // namespace

StraightenResult straighten(const ForceField& F, const double* x, const double* v, double s, double t,
                            const StraightenOptions& opt) {
    if (std::abs(s - t) > opt.horizon) {
        std::ostringstream msg;
        msg << "|s-t|=" << std::abs(s - t) << " exceeds straightening horizon " << opt.horizon;
        throw Error(ErrorKind::Horizon, msg.str());
    }
    int d = F.dim();
    auto res = solve_psi(F, x, v, s, t, opt);
    if (s == t) return res;
    double J[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    double h = opt.det_step;
    for (int b = 0; b < d; ++b) {
        double vp[2] = {v[0], d == 2 ? v[1] : 0.0}, vm[2] = {v[0], d == 2 ? v[1] : 0.0};
        vp[b] += h;
        vm[b] -= h;
        auto rp = solve_psi(F, x, vp, s, t, opt);
        auto rm = solve_psi(F, x, vm, s, t, opt);
        res.contraction = std::max({res.contraction, rp.contraction, rm.contraction});
        for (int a = 0; a < d; ++a) J[a][b] = (rp.psi[a] - rm.psi[a]) / (2.0 * h);
    }
    res.det = d == 1 ? J[0][0] : J[0][0] * J[1][1] - J[0][1] * J[1][0];
    return res;
}

StraighteningMap straighten_map(const ForceField& F, int d, const std::vector<double>& xs,
                                const std::vector<double>& vs, double s, double t, const StraightenOptions& opt) {
    StraighteningMap map;
    map.d = d;
    map.xs = xs;
    map.vs = vs;
    std::size_t nx = d == 1 ? xs.size() : xs.size() * xs.size();
    std::size_t nv = d == 1 ? vs.size() : vs.size() * vs.size();
    map.nodes.resize(nx * nv);
    parallel_for(nx * nv, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            std::size_t ix = i / nv, jv = i % nv;
            double x[2], v[2];
            if (d == 1) {
                x[0] = xs[ix];
                v[0] = vs[jv];
            } else {
                x[0] = xs[ix / xs.size()];
                x[1] = xs[ix % xs.size()];
                v[0] = vs[jv / vs.size()];
                v[1] = vs[jv % vs.size()];
            }
            map.nodes[i] = straighten(F, x, v, s, t, opt);
        }
    });
    map.det_min = INFINITY;
    map.det_max = -INFINITY;
    for (const auto& n : map.nodes) {
        map.det_min = std::min(map.det_min, n.det);
        map.det_max = std::max(map.det_max, n.det);
        map.residual_max = std::max(map.residual_max, n.residual);
    }
    return map;
}

Distribution pushforward_representation(const Distribution& f_in, const ForceField& F, double t, double dt_sub,
                                        double tail_tol) {
    const auto& g = f_in.grid;
    if (t == 0.0) return f_in;
    PhaseSpline spline(f_in);
    double tail = tail_fraction(f_in);
    double scale = std::exp(g.d * t);
    Distribution out(g);
    std::size_t nv = g.nv_total();
    std::atomic<bool> exited{false};
    parallel_for(g.nx_total(), [&](std::size_t b, std::size_t e) {
        double x[2], v[2];
        for (std::size_t i = b; i < e; ++i) {
            g.x_coords(i, x);
            for (std::size_t j = 0; j < nv; ++j) {
                g.v_coords(j, v);
                auto fr = flow(F, x, v, t, 0.0, dt_sub);
                for (int a = 0; a < g.d; ++a)
                    if (std::abs(fr.V[a]) > g.Vmax) exited = true;
                out.at(i, j) = scale * spline.eval(fr.X, fr.V);
            }
        }
    });
    if (exited && tail > tail_tol) {
        std::ostringstream msg;
        msg << "characteristic feet leave the velocity box while the tail fraction is " << tail;
        throw Error(ErrorKind::Tail, msg.str());
    }
    return out;
}

}  // namespace thickspray
