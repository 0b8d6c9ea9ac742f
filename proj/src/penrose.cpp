#include "thickspray/penrose.hpp"

#include "thickspray/error.hpp"
#include "thickspray/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace thickspray {

namespace {

constexpr int kGaussPoints = 16;
constexpr int kMaxLevel = 14;
constexpr double kQuadTol = 1e-9;
constexpr double kEnvelopeCut = 1e-12;
constexpr double kSpectrumCut = 1e-10;
constexpr int kScanPoints = 4096;

struct GaussLegendre {
    std::array<double, kGaussPoints> x{}, w{};
    GaussLegendre() {
        const int n = kGaussPoints;
        for (int i = 0; i < n; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre& gauss() {
    static const GaussLegendre g;
    return g;
}

/// sum_j f_j e^{-i xi . v_j} dv^d for one velocity column.
cplx velocity_transform(const PhaseGrid& g, const double* col, const double* xi) {
    int nv = g.Nv;
    double v0 = g.v(0), dv = g.dv();
    if (g.d == 1) {
        cplx e(std::cos(xi[0] * v0), -std::sin(xi[0] * v0));
        cplx step(std::cos(xi[0] * dv), -std::sin(xi[0] * dv));
        cplx s = 0.0;
        for (int j = 0; j < nv; ++j) {
            s += col[j] * e;
            e *= step;
        }
        return s * dv;
    }
    std::vector<cplx> e1(nv);
    {
        cplx e(std::cos(xi[1] * v0), -std::sin(xi[1] * v0));
        cplx step(std::cos(xi[1] * dv), -std::sin(xi[1] * dv));
        for (int j = 0; j < nv; ++j) {
            e1[j] = e;
            e *= step;
        }
    }
    cplx e(std::cos(xi[0] * v0), -std::sin(xi[0] * v0));
    cplx step(std::cos(xi[0] * dv), -std::sin(xi[0] * dv));
    cplx s = 0.0;
    for (int j0 = 0; j0 < nv; ++j0) {
        cplx inner = 0.0;
        const double* row = col + static_cast<std::size_t>(j0) * nv;
        for (int j1 = 0; j1 < nv; ++j1) inner += row[j1] * e1[j1];
        s += inner * e;
        e *= step;
    }
    return s * dv * dv;
}

std::vector<double> unit(const std::vector<double>& k) {
    double n = 0.0;
    for (double c : k) n += c * c;
    n = std::sqrt(n);
    if (!(n > 0.0)) throw Error(ErrorKind::Config, "frequency k must be nonzero");
    std::vector<double> out(k);
    for (double& c : out) c /= n;
    return out;
}

double norm(const std::vector<double>& k) {
    double n = 0.0;
    for (double c : k) n += c * c;
    return std::sqrt(n);
}

/// Returns inf_lambda |1 - lambda z| and the minimizing lambda (0 for the open endpoint).
std::string fmt_sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

std::pair<double, double> lambda_min(cplx z) {
    double re = z.real(), n2 = std::norm(z);
    if (!(re > 0.0)) return {1.0, 0.0};
    double lam = std::min(re / n2, 1.0);
    return {std::abs(1.0 - lam * z), lam};
}

}  // namespace

const char* to_string(PenroseVariant v) { return v == PenroseVariant::Standard ? "standard" : "optimal"; }

PenroseVariant penrose_variant_from_string(const std::string& s) {
    if (s == "standard") return PenroseVariant::Standard;
    if (s == "optimal") return PenroseVariant::Optimal;
    throw Error(ErrorKind::Config, "unknown Penrose variant '" + s + "'");
}

cplx ray_transform(const Distribution& f, std::size_t ix, const std::vector<double>& khat, double s) {
    const auto& g = f.grid;
    double xi[2] = {0.0, 0.0};
    for (int a = 0; a < g.d; ++a) xi[a] = khat.at(a) * s;
    return -s * velocity_transform(g, &f.values[ix * g.nv_total()], xi);
}

RayIntegrator::RayIntegrator(const Distribution& f, std::size_t ix, const std::vector<double>& khat)
    : grid_(f.grid), khat_(unit(khat)) {
    std::size_t nv = grid_.nv_total();
    column_.assign(f.values.begin() + ix * nv, f.values.begin() + (ix + 1) * nv);
    double kmax = 0.0;
    for (int a = 0; a < grid_.d; ++a) kmax = std::max(kmax, std::abs(khat_[a]));
    double band = std::numbers::pi / (grid_.dv() * kmax);
    std::vector<double> spec(kScanPoints + 1), env(kScanPoints + 1);
    double peak_spec = 0.0, peak_env = 0.0;
    for (int i = 0; i <= kScanPoints; ++i) {
        double s = band * i / kScanPoints;
        double xi[2] = {khat_[0] * s, grid_.d == 2 ? khat_[1] * s : 0.0};
        spec[i] = std::abs(velocity_transform(grid_, column_.data(), xi));
        env[i] = s * spec[i];
        peak_spec = std::max(peak_spec, spec[i]);
        peak_env = std::max(peak_env, env[i]);
    }
    if (peak_env == 0.0) {
        zero_ = true;
        return;
    }
    double edge = 0.0;
    for (int i = static_cast<int>(0.9 * kScanPoints); i <= kScanPoints; ++i) edge = std::max(edge, spec[i]);
    if (edge > kSpectrumCut * peak_spec)
        throw Error(ErrorKind::Config,
                    "velocity spectrum not resolved: relative level " + fmt_sci(edge / peak_spec) +
                        " near the band edge");
    int last = 0;
    for (int i = 0; i <= kScanPoints; ++i)
        if (env[i] >= kEnvelopeCut * peak_env) last = i;
    sigma_max_ = band * std::min(last + 1, kScanPoints) / kScanPoints;
}

cplx RayIntegrator::ray(double sigma) const {
    double xi[2] = {khat_[0] * sigma, grid_.d == 2 ? khat_[1] * sigma : 0.0};
    return -sigma * velocity_transform(grid_, column_.data(), xi);
}

const std::vector<cplx>& RayIntegrator::level_values(int n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    const auto& gl = gauss();
    std::size_t panels = std::size_t(1) << n;
    double h = sigma_max_ / static_cast<double>(panels);
    std::vector<cplx> vals(panels * kGaussPoints);
    for (std::size_t p = 0; p < panels; ++p)
        for (int q = 0; q < kGaussPoints; ++q)
            vals[p * kGaussPoints + q] = ray(h * (static_cast<double>(p) + 0.5 * (1.0 + gl.x[q])));
    return cache_.emplace(n, std::move(vals)).first->second;
}

cplx RayIntegrator::integrate(cplx a, bool* converged) {
    if (converged) *converged = true;
    if (zero_) return 0.0;
    const auto& gl = gauss();
    double scale = sigma_max_ * std::max(std::abs(a), 1.0) / 2.0;
    int n0 = std::clamp(static_cast<int>(std::ceil(std::log2(std::max(scale, 1.0)))), 3, kMaxLevel - 1);
    auto at_level = [&](int n) {
        const auto& vals = level_values(n);
        std::size_t panels = std::size_t(1) << n;
        double h = sigma_max_ / static_cast<double>(panels);
        std::array<cplx, kGaussPoints> node;
        for (int q = 0; q < kGaussPoints; ++q) node[q] = 0.5 * h * gl.w[q] * std::exp(-a * (0.5 * h * (1.0 + gl.x[q])));
        cplx step = std::exp(-a * h), r = 1.0, sum = 0.0;
        for (std::size_t p = 0; p < panels; ++p) {
            cplx ps = 0.0;
            const cplx* v = &vals[p * kGaussPoints];
            for (int q = 0; q < kGaussPoints; ++q) ps += node[q] * v[q];
            sum += r * ps;
            r *= step;
        }
        return sum;
    };
    cplx prev = at_level(n0);
    for (int n = n0 + 1; n <= kMaxLevel; ++n) {
        cplx cur = at_level(n);
        if (std::abs(cur - prev) < kQuadTol) return cur;
        prev = cur;
    }
    if (converged) *converged = false;
    return prev;
}

double RayIntegrator::abs_integral() {
    if (zero_) return 0.0;
    const auto& gl = gauss();
    auto at_level = [&](int n) {
        const auto& vals = level_values(n);
        std::size_t panels = std::size_t(1) << n;
        double h = sigma_max_ / static_cast<double>(panels), s = 0.0;
        for (std::size_t p = 0; p < panels; ++p)
            for (int q = 0; q < kGaussPoints; ++q) s += 0.5 * h * gl.w[q] * std::abs(vals[p * kGaussPoints + q]);
        return s;
    };
    double prev = at_level(4);
    for (int n = 5; n <= kMaxLevel; ++n) {
        double cur = at_level(n);
        if (std::abs(cur - prev) < kQuadTol * std::max(1.0, cur)) return cur;
        prev = cur;
    }
    return prev;
}

double penrose_prefactor(double rho_f, double rho, const PressureLaw& law) {
    if (!(rho_f < 1.0)) throw Error(ErrorKind::Bound, "Penrose prefactor pole: rho_f >= 1");
    if (!(rho > 0.0)) throw Error(ErrorKind::Vacuum, "Penrose prefactor requires rho > 0");
    return law.dp(rho) * rho / (1.0 - rho_f);
}

cplx penrose_value(const Distribution& f, const ScalarField& rho_f, const ScalarField& rho,
                   const PressureLaw& law, std::size_t ix, const FrequencyPoint& point,
                   PenroseVariant variant) {
    if (!(point.gamma > 0.0)) throw Error(ErrorKind::Config, "gamma must be positive");
    double C = penrose_prefactor(rho_f[ix], rho[ix], law);
    double kn = norm(point.k);
    RayIntegrator ri(f, ix, point.k);
    double W = variant == PenroseVariant::Standard ? 1.0 / (1.0 + kn * kn) : 1.0;
    return C * W * ri.integrate(cplx(point.gamma, point.tau) / kn);
}

double penrose_majorant(const Distribution& f, const ScalarField& rho_f, const ScalarField& rho,
                        const PressureLaw& law, std::size_t ix, const std::vector<double>& k,
                        PenroseVariant variant) {
    double C = penrose_prefactor(rho_f[ix], rho[ix], law);
    double kn = norm(k);
    RayIntegrator ri(f, ix, k);
    double W = variant == PenroseVariant::Standard ? 1.0 / (1.0 + kn * kn) : 1.0;
    return C * W * ri.abs_integral();
}

double min_over_lambda(cplx z) { return lambda_min(z).first; }

namespace {

std::vector<std::vector<double>> direction_set(int d, int n_dir) {
    if (d == 1) return {{1.0}, {-1.0}};
    std::vector<std::vector<double>> dirs;
    for (int j = 0; j < n_dir; ++j) {
        double th = 2.0 * std::numbers::pi * j / n_dir;
        dirs.push_back({std::cos(th), std::sin(th)});
    }
    return dirs;
}

}  // namespace

PenroseReport check_condition(const Distribution& f, const FluidState& state, const PressureLaw& law,
                              const PenroseSampling& sampling, PenroseVariant variant, double c_required) {
    const auto& g = f.grid;
    if (sampling.n_phi < 1 || sampling.n_beta < 1 || sampling.x_stride < 1 || (g.d == 2 && sampling.n_dir < 1))
        throw Error(ErrorKind::Config, "Penrose sampling needs at least one point per axis");
    auto rho_f = density_moment(f);

    std::vector<std::size_t> xs;
    for (std::size_t ix = 0; ix < g.nx_total(); ++ix) {
        bool keep = g.d == 1 ? ix % sampling.x_stride == 0
                             : (ix / g.Nx) % sampling.x_stride == 0 && (ix % g.Nx) % sampling.x_stride == 0;
        if (keep) xs.push_back(ix);
    }
    std::vector<double> C(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) C[i] = penrose_prefactor(rho_f[xs[i]], state.rho[xs[i]], law);

    // group sampled nodes with identical velocity profiles
    std::size_t nv = g.nv_total();
    std::vector<std::size_t> reps, group(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double* col = &f.values[xs[i] * nv];
        std::size_t found = reps.size();
        for (std::size_t r = 0; r < reps.size(); ++r)
            if (std::equal(col, col + nv, &f.values[reps[r] * nv])) {
                found = r;
                break;
            }
        if (found == reps.size()) reps.push_back(xs[i]);
        group[i] = found;
    }

    struct Sample {
        double gamma, tau, kn;
        cplx a;
    };
    std::vector<Sample> samples;
    for (int jb = 1; jb <= sampling.n_beta; ++jb) {
        double beta = 0.5 * std::numbers::pi * jb / sampling.n_beta;
        double kn = std::sin(beta);
        for (int ip = 0; ip <= sampling.n_phi; ++ip) {
            double phi = -0.5 * std::numbers::pi + std::numbers::pi * ip / sampling.n_phi;
            double gam = std::max(std::cos(beta) * std::cos(phi), 1e-6 * kn);
            double tau = std::cos(beta) * std::sin(phi);
            samples.push_back({gam, tau, kn, cplx(gam, tau) / kn});
        }
    }
    auto dirs = direction_set(g.d, sampling.n_dir);

    std::size_t ntask = reps.size() * dirs.size();
    std::vector<std::vector<cplx>> integrals(ntask);
    std::vector<std::size_t> unconverged(ntask, 0);
    parallel_for(ntask, [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            RayIntegrator ri(f, reps[t / dirs.size()], dirs[t % dirs.size()]);
            auto& out = integrals[t];
            out.resize(samples.size());
            for (std::size_t s = 0; s < samples.size(); ++s) {
                bool ok = true;
                out[s] = ri.integrate(samples[s].a, &ok);
                if (!ok) ++unconverged[t];
            }
        }
    });

    PenroseReport rep;
    rep.variant = variant;
    rep.sampling = sampling;
    rep.c_required = c_required;
    rep.n_x = xs.size();
    rep.margin = INFINITY;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t dd = 0; dd < dirs.size(); ++dd) {
            const auto& I = integrals[group[i] * dirs.size() + dd];
            for (std::size_t s = 0; s < samples.size(); ++s) {
                cplx z = C[i] * I[s];
                double val, lam = 1.0;
                if (variant == PenroseVariant::Standard) {
                    std::tie(val, lam) = lambda_min(z);
                } else {
                    val = std::abs(1.0 - z);
                }
                ++rep.n_evaluations;
                if (val < rep.margin) {
                    rep.margin = val;
                    rep.argmin_x = xs[i];
                    rep.argmin_lambda = lam;
                    rep.argmin_point.gamma = samples[s].gamma;
                    rep.argmin_point.tau = samples[s].tau;
                    rep.argmin_point.k.clear();
                    for (double c : dirs[dd]) rep.argmin_point.k.push_back(c * samples[s].kn);
                }
            }
        }
    }
    for (auto u : unconverged) rep.n_unconverged += u;
    rep.pass = rep.margin > c_required;
    return rep;
}

std::set<std::string> classify_sufficient(const Distribution& f, const ScalarField& rho, const PressureLaw& law) {
    const auto& g = f.grid;
    std::size_t nv = g.nv_total();
    std::set<std::string> tags;
    double fmax = 0.0;
    for (double x : f.values) fmax = std::max(fmax, std::abs(x));

    if (fmax > 0.0 && g.d == 1) {
        bool ok = true;
        for (std::size_t ix = 0; ix < g.nx_total() && ok; ++ix) {
            const double* col = &f.values[ix * nv];
            int changes = 0, prev = 0;
            bool seen_up = false, seen_down = false;
            for (std::size_t j = 0; j + 1 < nv; ++j) {
                double diff = col[j + 1] - col[j];
                if (std::abs(diff) <= 1e-12 * fmax) continue;
                int sgn = diff > 0 ? 1 : -1;
                seen_up = seen_up || sgn > 0;
                seen_down = seen_down || sgn < 0;
                if (prev != 0 && sgn != prev) {
                    ++changes;
                    if (prev < 0) ok = false;  // decreasing then increasing
                }
                prev = sgn;
            }
            ok = ok && changes == 1 && seen_up && seen_down;
        }
        if (ok) tags.insert("one-bump");
    }

    if (fmax > 0.0) {
        std::vector<std::pair<double, std::size_t>> order(nv);
        double vc[2];
        for (std::size_t j = 0; j < nv; ++j) {
            g.v_coords(j, vc);
            double r2 = 0.0;
            for (int a = 0; a < g.d; ++a) r2 += vc[a] * vc[a];
            order[j] = {r2, j};
        }
        std::sort(order.begin(), order.end());
        double tol = 1e-10 * fmax, rtol = 1e-9 * g.dv() * g.dv();
        bool ok = true;
        for (std::size_t ix = 0; ix < g.nx_total() && ok; ++ix) {
            const double* col = &f.values[ix * nv];
            // shells of equal |v|: spread within tol, and shell values nonincreasing
            double prev_min = INFINITY;
            std::size_t j = 0;
            while (j < nv && ok) {
                std::size_t k = j;
                double lo = INFINITY, hi = -INFINITY;
                while (k < nv && order[k].first - order[j].first <= rtol) {
                    double val = col[order[k].second];
                    lo = std::min(lo, val);
                    hi = std::max(hi, val);
                    ++k;
                }
                if (hi - lo > tol || hi > prev_min + tol) ok = false;
                prev_min = std::min(prev_min, lo);
                j = k;
            }
        }
        if (ok) tags.insert("radial-nonincreasing");
    }

    auto rho_f = density_moment(f);
    auto dirs = direction_set(g.d, 32);
    double sup = 0.0;
    for (std::size_t ix = 0; ix < g.nx_total(); ++ix) {
        double C = penrose_prefactor(rho_f[ix], rho[ix], law);
        for (const auto& dir : dirs) {
            RayIntegrator ri(f, ix, dir);
            sup = std::max(sup, C * ri.abs_integral());
        }
    }
    if (sup < 0.5) tags.insert("small-amplitude");
    if (tags.empty()) tags.insert("none");
    return tags;
}

}  // namespace thickspray
