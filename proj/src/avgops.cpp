#include "thickspray/avgops.hpp"

#include "thickspray/error.hpp"
#include "thickspray/fft.hpp"
#include "thickspray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace thickspray {

namespace {

void wavenumbers(std::size_t mode, int d, int n, int* k) {
    if (d == 1) {
        k[0] = fft::wavenumber(static_cast<int>(mode), n);
    } else {
        k[0] = fft::wavenumber(static_cast<int>(mode / n), n);
        k[1] = fft::wavenumber(static_cast<int>(mode % n), n);
    }
}

bool has_nyquist(const int* k, int d, int n) {
    for (int a = 0; a < d; ++a)
        if (k[a] == -n / 2) return true;
    return false;
}

double trapezoid_weight(int j, int i, double dt) {
    if (i == 0) return 0.0;
    return (j == 0 || j == i) ? 0.5 * dt : dt;
}

double time_weight(int i, int nt, double dt) { return (i == 0 || i == nt - 1) ? 0.5 * dt : dt; }

double grade(std::size_t mode, int d, int n, bool graded) {
    if (!graded) return 1.0;
    int k[2];
    wavenumbers(mode, d, n, k);
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
    return 1.0 + k2;
}

}  // namespace

SpaceTimeField::SpaceTimeField(int d_, int n_, int nt_, double T_) : d(d_), n(n_), nt(nt_), T(T_) {
    if (nt_ < 2 || !(T_ > 0.0)) throw Error(ErrorKind::Config, "time grid needs nt >= 2 and T > 0");
    c.assign(static_cast<std::size_t>(nt_) * modes(), cplx(0.0));
}

std::size_t SpaceTimeField::modes() const { return d == 1 ? n : static_cast<std::size_t>(n) * n; }

void SpaceTimeField::set_slice(int i, const ScalarField& field) {
    auto coeffs = fft::forward(field.values, d, n);
    std::copy(coeffs.begin(), coeffs.end(), c.begin() + static_cast<std::ptrdiff_t>(i * modes()));
}

ScalarField SpaceTimeField::slice(int i) const {
    std::vector<cplx> coeffs(c.begin() + static_cast<std::ptrdiff_t>(i * modes()),
                             c.begin() + static_cast<std::ptrdiff_t>((i + 1) * modes()));
    ScalarField out(d, n);
    out.values = fft::inverse_real(coeffs, d, n);
    return out;
}

std::size_t SpaceTimeField::mode_index(const int* k) const {
    auto idx = [this](int kk) { return static_cast<std::size_t>(kk < 0 ? kk + n : kk); };
    return d == 1 ? idx(k[0]) : idx(k[0]) * n + idx(k[1]);
}

std::vector<std::array<int, 2>> AnalyticGaussianKernel::x_modes() const {
    std::vector<std::array<int, 2>> m{{0, 0}};
    if (p_.delta != 0.0) {
        m.push_back({p_.l0, 0});
        m.push_back({-p_.l0, 0});
    }
    return m;
}

void AnalyticGaussianKernel::symbol(double t, double s, const int* m, const double* xi, cplx* out) const {
    int d = p_.d;
    double coeff;
    if (m[0] == 0 && (d == 1 || m[1] == 0))
        coeff = 1.0;
    else if (std::abs(m[0]) == p_.l0 && (d == 1 || m[1] == 0) && p_.delta != 0.0)
        coeff = 0.5 * p_.delta;
    else
        coeff = 0.0;
    double w = p_.time_weight ? (t - s) : 1.0;
    double xi2 = 0.0, phase = 0.0;
    for (int a = 0; a < d; ++a) {
        xi2 += xi[a] * xi[a];
        phase += xi[a] * p_.v0[a];
    }
    double amp = std::pow(p_.sigma * std::sqrt(std::numbers::pi), d) * std::exp(-p_.sigma * p_.sigma * xi2 / 4.0);
    cplx base = w * coeff * amp * cplx(std::cos(phase), -std::sin(phase));
    for (int a = 0; a < d; ++a) out[a] = cplx(0.0, xi[a]) * base;
}

GriddedKernel::GriddedKernel(const PhaseGrid& grid, int nt, double T, const Fn& fn, bool diagonal_vanishing,
                             int coupling_band)
    : grid_(grid), nt_(nt), T_(T), diag_(diagonal_vanishing) {
    grid.validate();
    if (nt < 2 || !(T > 0.0)) throw Error(ErrorKind::Config, "kernel time grid needs nt >= 2 and T > 0");
    int d = grid.d, n = grid.Nx;
    int band = std::min(coupling_band, n / 2 - 1);
    for (int m0 = -band; m0 <= band; ++m0) {
        if (d == 1) {
            modes_.push_back({m0, 0});
        } else {
            for (int m1 = -band; m1 <= band; ++m1) modes_.push_back({m0, m1});
        }
    }
    std::size_t nx = grid.nx_total(), nv = grid.nv_total(), nm = modes_.size();
    std::size_t pairs = static_cast<std::size_t>(nt) * nt;
    coef_.assign(pairs * nm * nv * d, cplx(0.0));
    double dt = T / (nt - 1);
    double diag_max = 0.0;
    std::vector<double> vals(nx * nv * d);
    std::vector<double> col(nx);
    double x[2], v[2], g[2];
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j <= i; ++j) {
            double t = i * dt, s = j * dt;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                grid.x_coords(ix, x);
                for (std::size_t jv = 0; jv < nv; ++jv) {
                    grid.v_coords(jv, v);
                    fn(t, s, x, v, g);
                    for (int a = 0; a < d; ++a) {
                        if (!std::isfinite(g[a])) throw Error(ErrorKind::NumericInput, "non-finite kernel value");
                        vals[(ix * nv + jv) * d + a] = g[a];
                        if (i == j) diag_max = std::max(diag_max, std::abs(g[a]));
                    }
                }
            }
            std::size_t pair = static_cast<std::size_t>(i) * nt + j;
            for (std::size_t jv = 0; jv < nv; ++jv)
                for (int a = 0; a < d; ++a) {
                    for (std::size_t ix = 0; ix < nx; ++ix) col[ix] = vals[(ix * nv + jv) * d + a];
                    auto c = fft::forward(col, d, n);
                    for (std::size_t q = 0; q < nm; ++q) {
                        int k[2] = {modes_[q][0], modes_[q][1]};
                        auto idx = [n](int kk) { return static_cast<std::size_t>(kk < 0 ? kk + n : kk); };
                        std::size_t mi = d == 1 ? idx(k[0]) : idx(k[0]) * n + idx(k[1]);
                        coef_[((pair * nm + q) * nv + jv) * d + a] = c[mi];
                    }
                }
        }
    }
    if (diag_ && diag_max >= 1e-12)
        throw Error(ErrorKind::Config, "kernel flagged diagonal-vanishing but max |G(t,t)| = " + std::to_string(diag_max));
}

void GriddedKernel::check_time_grid(int nt, double T) const {
    if (nt != nt_ || std::abs(T - T_) > 1e-12 * T_) throw Error(ErrorKind::Config, "kernel and field time grids differ");
}

void GriddedKernel::symbol(double t, double s, const int* m, const double* xi, cplx* out) const {
    int d = grid_.d;
    double dt = T_ / (nt_ - 1);
    int i = static_cast<int>(std::lround(t / dt)), j = static_cast<int>(std::lround(s / dt));
    for (int a = 0; a < d; ++a) out[a] = 0.0;
    if (i < 0 || i >= nt_ || j < 0 || j > i) return;
    std::size_t q = 0;
    for (; q < modes_.size(); ++q)
        if (modes_[q][0] == m[0] && (d == 1 || modes_[q][1] == m[1])) break;
    if (q == modes_.size()) return;
    std::size_t nv = grid_.nv_total(), nm = modes_.size();
    std::size_t pair = static_cast<std::size_t>(i) * nt_ + j;
    double vc[2];
    for (std::size_t jv = 0; jv < nv; ++jv) {
        grid_.v_coords(jv, vc);
        double ph = 0.0;
        for (int a = 0; a < d; ++a) ph += xi[a] * vc[a];
        cplx e(std::cos(ph), -std::sin(ph));
        for (int a = 0; a < d; ++a) out[a] += coef_[((pair * nm + q) * nv + jv) * d + a] * e;
    }
    for (int a = 0; a < d; ++a) out[a] *= grid_.v_weight();
}

KernelOperator::KernelOperator(const Kernel& G, Characteristic ch, int d, int n, int nt, double T)
    : d_(d), n_(n), nt_(nt), T_(T) {
    if (G.dim() != d) throw Error(ErrorKind::Config, "kernel dimension does not match the field");
    G.check_time_grid(nt, T);
    auto offsets = G.x_modes();
    std::size_t modes = d == 1 ? n : static_cast<std::size_t>(n) * n;
    double dt = T / (nt - 1);
    struct Job {
        std::size_t in, out;
        int m[2];
    };
    std::vector<Job> jobs;
    int k[2], l[2];
    for (std::size_t in = 0; in < modes; ++in) {
        wavenumbers(in, d, n, k);
        if (has_nyquist(k, d, n)) continue;
        if (k[0] == 0 && (d == 1 || k[1] == 0)) continue;
        for (const auto& m : offsets) {
            bool inside = true;
            for (int a = 0; a < d; ++a) {
                l[a] = k[a] + m[a];
                inside = inside && l[a] >= -n / 2 && l[a] < n / 2;
            }
            if (!inside) continue;
            auto idx = [n](int kk) { return static_cast<std::size_t>(kk < 0 ? kk + n : kk); };
            std::size_t out = d == 1 ? idx(l[0]) : idx(l[0]) * n + idx(l[1]);
            jobs.push_back({in, out, {m[0], m[1]}});
        }
    }
    entries_.resize(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t b, std::size_t e) {
        int kk[2];
        double xi[2];
        cplx sym[2];
        for (std::size_t q = b; q < e; ++q) {
            const auto& job = jobs[q];
            wavenumbers(job.in, d, n, kk);
            Entry ent{static_cast<std::uint32_t>(job.out), static_cast<std::uint32_t>(job.in),
                      std::vector<cplx>(static_cast<std::size_t>(nt) * nt, cplx(0.0))};
            for (int i = 1; i < nt; ++i)
                for (int j = 0; j <= i; ++j) {
                    double t = i * dt, s = j * dt;
                    double lag = ch == Characteristic::Free ? t - s : std::expm1(t - s);
                    for (int a = 0; a < d; ++a) xi[a] = kk[a] * lag;
                    G.symbol(t, s, job.m, xi, sym);
                    cplx acc = 0.0;
                    for (int a = 0; a < d; ++a) acc += cplx(0.0, kk[a]) * sym[a];
                    ent.w[static_cast<std::size_t>(i) * nt + j] = trapezoid_weight(j, i, dt) * acc;
                }
            entries_[q] = std::move(ent);
        }
    });
}

KernelOperator KernelOperator::difference(const Kernel& G, int d, int n, int nt, double T) {
    KernelOperator a(G, Characteristic::Free, d, n, nt, T);
    KernelOperator b(G, Characteristic::Fric, d, n, nt, T);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> where;
    for (std::size_t q = 0; q < a.entries_.size(); ++q) where[{a.entries_[q].out_mode, a.entries_[q].in_mode}] = q;
    for (auto& e : b.entries_) {
        auto it = where.find({e.out_mode, e.in_mode});
        if (it != where.end()) {
            auto& w = a.entries_[it->second].w;
            for (std::size_t p = 0; p < w.size(); ++p) w[p] -= e.w[p];
        } else {
            for (auto& x : e.w) x = -x;
            a.entries_.push_back(std::move(e));
        }
    }
    return a;
}

SpaceTimeField KernelOperator::apply(const SpaceTimeField& H) const {
    if (H.d != d_ || H.n != n_ || H.nt != nt_ || std::abs(H.T - T_) > 1e-12 * T_)
        throw Error(ErrorKind::Config, "field grid does not match the operator");
    SpaceTimeField out(d_, n_, nt_, T_);
    std::size_t modes = out.modes();
    for (const auto& e : entries_) {
        for (int i = 1; i < nt_; ++i) {
            const cplx* w = &e.w[static_cast<std::size_t>(i) * nt_];
            cplx s = 0.0;
            for (int j = 0; j <= i; ++j) s += w[j] * H.c[static_cast<std::size_t>(j) * modes + e.in_mode];
            out.c[static_cast<std::size_t>(i) * modes + e.out_mode] += s;
        }
    }
    return out;
}

SpaceTimeField KernelOperator::adjoint(const SpaceTimeField& Y, bool graded) const {
    SpaceTimeField out(d_, n_, nt_, T_);
    std::size_t modes = out.modes();
    double dt = T_ / (nt_ - 1);
    std::vector<double> tw(nt_);
    for (int i = 0; i < nt_; ++i) tw[i] = time_weight(i, nt_, dt);
    for (const auto& e : entries_) {
        double g = grade(e.out_mode, d_, n_, graded);
        for (int j = 0; j < nt_; ++j) {
            cplx s = 0.0;
            for (int i = std::max(j, 1); i < nt_; ++i)
                s += std::conj(e.w[static_cast<std::size_t>(i) * nt_ + j]) * tw[i] * g *
                     Y.c[static_cast<std::size_t>(i) * modes + e.out_mode];
            out.c[static_cast<std::size_t>(j) * modes + e.in_mode] += s / tw[j];
        }
    }
    return out;
}

LinearOperator KernelOperator::as_operator(bool graded) const {
    return {[this](const SpaceTimeField& H) { return apply(H); },
            [this, graded](const SpaceTimeField& Y) { return adjoint(Y, graded); }};
}

KernelOperator KernelOperator::restricted(std::size_t in_mode) const {
    KernelOperator out;
    out.d_ = d_;
    out.n_ = n_;
    out.nt_ = nt_;
    out.T_ = T_;
    for (const auto& e : entries_)
        if (e.in_mode == in_mode) out.entries_.push_back(e);
    return out;
}

SpaceTimeField k_free(const Kernel& G, const SpaceTimeField& H) {
    return KernelOperator(G, Characteristic::Free, H.d, H.n, H.nt, H.T).apply(H);
}

SpaceTimeField k_fric(const Kernel& G, const SpaceTimeField& H) {
    return KernelOperator(G, Characteristic::Fric, H.d, H.n, H.nt, H.T).apply(H);
}

double spacetime_norm(const SpaceTimeField& H, bool graded) {
    double dt = H.dt(), s = 0.0;
    std::size_t modes = H.modes();
    for (int i = 0; i < H.nt; ++i) {
        double w = time_weight(i, H.nt, dt);
        for (std::size_t m = 0; m < modes; ++m)
            s += w * grade(m, H.d, H.n, graded) * std::norm(H.c[static_cast<std::size_t>(i) * modes + m]);
    }
    return std::sqrt(s);
}

NormEstimate operator_norm_estimate(const LinearOperator& op, const SpaceTimeField& shape, const NormOptions& opt) {
    if (opt.probes < 8) throw Error(ErrorKind::Config, "operator_norm_estimate needs at least 8 probes");
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t modes = shape.modes();
    auto restrict_modes = [&](SpaceTimeField& f) {
        if (opt.only_mode < 0) return;
        for (int i = 0; i < f.nt; ++i)
            for (std::size_t m = 0; m < modes; ++m)
                if (static_cast<int>(m) != opt.only_mode) f.c[static_cast<std::size_t>(i) * modes + m] = 0.0;
    };
    NormEstimate best;
    best.converged = true;
    for (int p = 0; p < opt.probes; ++p) {
        SpaceTimeField x(shape.d, shape.n, shape.nt, shape.T);
        for (auto& c : x.c) c = cplx(normal(rng), normal(rng));
        restrict_modes(x);
        double nx = spacetime_norm(x, false);
        for (auto& c : x.c) c /= nx;
        double est = 0.0, prev = -1.0;
        bool converged = false;
        int it = 0;
        for (; it < opt.max_iterations; ++it) {
            auto y = op.apply(x);
            est = spacetime_norm(y, opt.graded);
            if (est == 0.0) {
                converged = true;
                break;
            }
            auto z = op.adjoint(y);
            restrict_modes(z);
            double nz = spacetime_norm(z, false);
            if (nz == 0.0) {
                converged = true;
                break;
            }
            for (std::size_t q = 0; q < z.c.size(); ++q) x.c[q] = z.c[q] / nz;
            if (std::abs(est - prev) <= opt.tol * est) {
                converged = true;
                break;
            }
            prev = est;
        }
        if (est > best.value) best.value = est;
        best.iterations = std::max(best.iterations, it + 1);
        best.converged = best.converged && converged;
    }
    return best;
}

namespace {

double ratio(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : INFINITY;
}

/// max_k |k| * ||(K_free - K_fric) restricted to mode k|| for k = 1..kmax.
std::vector<double> difference_profile(const AnalyticGaussianKernel& G, int d, int n, double T, int kmax,
                                       const NormOptions& base) {
    auto diff = KernelOperator::difference(G, d, n, n, T);
    SpaceTimeField shape(d, n, n, T);
    std::vector<double> out;
    for (int k = 1; k <= kmax; ++k) {
        int kv[2] = {k, 0};
        NormOptions o = base;
        o.graded = false;
        o.only_mode = static_cast<int>(shape.mode_index(kv));
        auto sub = diff.restricted(static_cast<std::size_t>(o.only_mode));
        out.push_back(k * operator_norm_estimate(sub.as_operator(false), shape, o).value);
    }
    return out;
}

}  // namespace

SuiteReport smoothing_suite(const AnalyticGaussianKernel::Params& base, const SuiteOptions& opt) {
    if (base.time_weight) throw Error(ErrorKind::Config, "base kernel must not carry the (t-s) factor");
    if (opt.ladder.size() < 2) throw Error(ErrorKind::Config, "resolution ladder needs at least two grids");
    SuiteReport rep;
    AnalyticGaussianKernel G(base);
    auto diag_params = base;
    diag_params.time_weight = true;
    AnalyticGaussianKernel Gd(diag_params);
    if (!Gd.diagonal_vanishing()) throw Error(ErrorKind::Config, "graded test requires a diagonal-vanishing kernel");
    int d = base.d;

    std::vector<double> l2f, l2r, grf, grr, dmax;
    std::vector<std::vector<double>> dprof;
    for (int n : opt.ladder) {
        SpaceTimeField shape(d, n, n, opt.T);
        NormOptions o = opt.norm;
        o.graded = false;
        KernelOperator free_op(G, Characteristic::Free, d, n, n, opt.T);
        KernelOperator fric_op(G, Characteristic::Fric, d, n, n, opt.T);
        l2f.push_back(operator_norm_estimate(free_op.as_operator(false), shape, o).value);
        l2r.push_back(operator_norm_estimate(fric_op.as_operator(false), shape, o).value);
        o.graded = true;
        KernelOperator dfree(Gd, Characteristic::Free, d, n, n, opt.T);
        KernelOperator dfric(Gd, Characteristic::Fric, d, n, n, opt.T);
        grf.push_back(operator_norm_estimate(dfree.as_operator(true), shape, o).value);
        grr.push_back(operator_norm_estimate(dfric.as_operator(true), shape, o).value);
        int kmax = std::min(opt.diff_modes, n / 4);
        dprof.push_back(difference_profile(G, d, n, opt.T, kmax, opt.norm));
        dmax.push_back(*std::max_element(dprof.back().begin(), dprof.back().end()));
    }
    bool l2_ok = ratio(l2f) < opt.ratio_limit && ratio(l2r) < opt.ratio_limit;
    bool gr_ok = ratio(grf) < opt.ratio_limit && ratio(grr) < opt.ratio_limit;
    // Per-mode responses must not depend on the resolution, and on the finest
    // grid the sup over (K/2, K] may exceed the sup over (K/4, K/2] only by the
    // ratio limit; a response growing like |k|^a gives 2^a there.
    double per_mode = 1.0;
    for (std::size_t k = 0; k < dprof.back().size(); ++k) {
        std::vector<double> col;
        for (const auto& prof : dprof)
            if (k < prof.size()) col.push_back(prof[k]);
        if (col.size() > 1) per_mode = std::max(per_mode, ratio(col));
    }
    const auto& fine = dprof.back();
    std::size_t K = fine.size();
    double upper = 0.0, lower = 0.0;
    for (std::size_t k = K / 4; k < K / 2; ++k) lower = std::max(lower, fine[k]);
    for (std::size_t k = K / 2; k < K; ++k) upper = std::max(upper, fine[k]);
    double window = lower > 0.0 ? upper / lower : INFINITY;
    bool df_ok = K >= 4 && per_mode < opt.ratio_limit && window < opt.ratio_limit;
    auto verdict = [](bool ok) { return std::string(ok ? "pass" : "fail"); };
    for (std::size_t q = 0; q < opt.ladder.size(); ++q) {
        int n = opt.ladder[q];
        rep.rows.push_back({"l2_free", n, 0, l2f[q], verdict(ratio(l2f) < opt.ratio_limit)});
        rep.rows.push_back({"l2_fric", n, 0, l2r[q], verdict(ratio(l2r) < opt.ratio_limit)});
        rep.rows.push_back({"graded_free_diag", n, 0, grf[q], verdict(ratio(grf) < opt.ratio_limit)});
        rep.rows.push_back({"graded_fric_diag", n, 0, grr[q], verdict(ratio(grr) < opt.ratio_limit)});
        for (std::size_t k = 0; k < dprof[q].size(); ++k)
            rep.rows.push_back({"diff_mode", n, static_cast<int>(k + 1), dprof[q][k], verdict(df_ok)});
        rep.rows.push_back({"diff_mode_max", n, 0, dmax[q], "info"});
    }
    rep.rows.push_back({"diff_resolution_ratio", opt.ladder.back(), 0, per_mode, verdict(per_mode < opt.ratio_limit)});
    rep.rows.push_back({"diff_window_ratio", opt.ladder.back(), static_cast<int>(K), window,
                        verdict(window < opt.ratio_limit)});
    for (double T : opt.growth_T) {
        int n = opt.ladder.front();
        auto prof = difference_profile(G, d, n, T, std::min(opt.diff_modes, n / 4), opt.norm);
        rep.rows.push_back({"diff_growth_T" + std::to_string(T).substr(0, 4), n, 0,
                            *std::max_element(prof.begin(), prof.end()), "info"});
    }
    rep.l2_pass = l2_ok;
    rep.graded_pass = gr_ok;
    rep.diff_pass = df_ok;
    return rep;
}

}  // namespace thickspray
