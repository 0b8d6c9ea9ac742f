#include "thickspray/grid.hpp"

#include "thickspray/error.hpp"
#include "thickspray/fft.hpp"
#include "thickspray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace thickspray {

using fft::cplx;

namespace {

/// Signed wavenumbers of flat mode index idx; nyq[a] flags the Nyquist index.
void mode_of(std::size_t idx, int d, int n, int* k, bool* nyq) {
    if (d == 1) {
        int i = static_cast<int>(idx);
        k[0] = fft::wavenumber(i, n);
        nyq[0] = fft::is_nyquist(i, n);
    } else {
        int i0 = static_cast<int>(idx / n), i1 = static_cast<int>(idx % n);
        k[0] = fft::wavenumber(i0, n);
        k[1] = fft::wavenumber(i1, n);
        nyq[0] = fft::is_nyquist(i0, n);
        nyq[1] = fft::is_nyquist(i1, n);
    }
}

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

PhaseGrid::PhaseGrid(int d_, int nx, int nv, double vmax) : d(d_), Nx(nx), Nv(nv), Vmax(vmax) {
    validate();
}

void PhaseGrid::validate() const {
    if (d != 1 && d != 2) throw Error(ErrorKind::Config, "grid.d must be 1 or 2");
    if (Nx < 8 || (Nx & (Nx - 1)) != 0)
        throw Error(ErrorKind::Config, "grid.Nx must be a power of two >= 8");
    if (Nv < 8 || Nv % 2 != 0) throw Error(ErrorKind::Config, "grid.Nv must be even and >= 8");
    if (!(Vmax > 0.0) || !std::isfinite(Vmax)) throw Error(ErrorKind::Config, "grid.Vmax must be positive");
}

double PhaseGrid::dx() const { return 2.0 * std::numbers::pi / Nx; }
double PhaseGrid::dv() const { return 2.0 * Vmax / Nv; }
std::size_t PhaseGrid::nx_total() const { return ipow(Nx, d); }
std::size_t PhaseGrid::nv_total() const { return ipow(Nv, d); }
double PhaseGrid::v_weight() const { return std::pow(dv(), d); }

void PhaseGrid::x_coords(std::size_t ix, double* out) const {
    if (d == 1) {
        out[0] = x(static_cast<int>(ix));
    } else {
        out[0] = x(static_cast<int>(ix / Nx));
        out[1] = x(static_cast<int>(ix % Nx));
    }
}

void PhaseGrid::v_coords(std::size_t jv, double* out) const {
    if (d == 1) {
        out[0] = v(static_cast<int>(jv));
    } else {
        out[0] = v(static_cast<int>(jv / Nv));
        out[1] = v(static_cast<int>(jv % Nv));
    }
}

ScalarField::ScalarField(int d_, int n_, double fill) : d(d_), n(n_), values(ipow(n_, d_), fill) {}

double ScalarField::mean() const {
    double s = 0.0;
    for (double x : values) s += x;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x));
    return m;
}

double ScalarField::l2() const {
    double s = 0.0;
    for (double x : values) s += x * x;
    return values.empty() ? 0.0 : std::sqrt(s / static_cast<double>(values.size()));
}

VectorField::VectorField(int d_, int n_, double fill) : d(d_), n(n_) {
    for (int a = 0; a < d_; ++a) comp.emplace_back(d_, n_, fill);
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : comp) m = std::max(m, c.max_abs());
    return m;
}

double VectorField::l2() const {
    double s = 0.0;
    for (const auto& c : comp) s += c.l2() * c.l2();
    return std::sqrt(s);
}

Distribution::Distribution(const PhaseGrid& g, double fill)
    : grid(g), values(g.nx_total() * g.nv_total(), fill) {}

double Distribution::min() const { return *std::min_element(values.begin(), values.end()); }

void require_finite(const std::vector<double>& values, const char* what) {
    for (double x : values)
        if (!std::isfinite(x)) throw Error(ErrorKind::NumericInput, std::string("non-finite value in ") + what);
}

ScalarField spectral_derivative(const ScalarField& field, int axis) {
    require_finite(field.values, "spectral_derivative input");
    if (axis < 0 || axis >= field.d) throw Error(ErrorKind::Config, "derivative axis out of range");
    auto c = fft::forward(field.values, field.d, field.n);
    int k[2] = {0, 0};
    bool nyq[2] = {false, false};
    for (std::size_t i = 0; i < c.size(); ++i) {
        mode_of(i, field.d, field.n, k, nyq);
        c[i] *= nyq[axis] ? cplx(0.0) : cplx(0.0, k[axis]);
    }
    ScalarField out(field.d, field.n);
    out.values = fft::inverse_real(c, field.d, field.n);
    return out;
}

VectorField gradient(const ScalarField& field) {
    VectorField out(field.d, field.n);
    for (int a = 0; a < field.d; ++a) out.comp[a] = spectral_derivative(field, a);
    return out;
}

ScalarField divergence(const VectorField& u) {
    ScalarField out(u.d, u.n);
    for (int a = 0; a < u.d; ++a) {
        auto da = spectral_derivative(u.comp[a], a);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += da[i];
    }
    return out;
}

ScalarField apply_j_epsilon(const ScalarField& field, double eps) {
    require_finite(field.values, "apply_j_epsilon input");
    if (!(eps >= 0.0)) throw Error(ErrorKind::Config, "epsilon must be nonnegative");
    if (eps == 0.0) return field;
    auto c = fft::forward(field.values, field.d, field.n);
    int k[2] = {0, 0};
    bool nyq[2] = {false, false};
    for (std::size_t i = 0; i < c.size(); ++i) {
        mode_of(i, field.d, field.n, k, nyq);
        double k2 = 0.0;
        for (int a = 0; a < field.d; ++a) k2 += double(k[a]) * k[a];
        c[i] /= 1.0 + eps * eps * k2;
    }
    ScalarField out(field.d, field.n);
    out.values = fft::inverse_real(c, field.d, field.n);
    return out;
}

namespace {

/// Symbol |k|^2 I + k (x) k with off-diagonal entries dropped on Nyquist rows.
void lame_symbol(const int* k, const bool* nyq, int d, double m[2][2]) {
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (a == b)
                m[a][b] = k2 + double(k[a]) * k[a];
            else
                m[a][b] = (nyq[a] || nyq[b]) ? 0.0 : double(k[a]) * k[b];
        }
}

template <class ModeOp>
VectorField lame_apply(const VectorField& u, ModeOp op) {
    int d = u.d, n = u.n;
    std::vector<std::vector<cplx>> c(d);
    for (int a = 0; a < d; ++a) {
        require_finite(u.comp[a].values, "vector field");
        c[a] = fft::forward(u.comp[a].values, d, n);
    }
    int k[2] = {0, 0};
    bool nyq[2] = {false, false};
    for (std::size_t i = 0; i < c[0].size(); ++i) {
        mode_of(i, d, n, k, nyq);
        double m[2][2];
        lame_symbol(k, nyq, d, m);
        cplx in[2], out[2];
        for (int a = 0; a < d; ++a) in[a] = c[a][i];
        op(m, in, out, d);
        for (int a = 0; a < d; ++a) c[a][i] = out[a];
    }
    VectorField res(d, n);
    for (int a = 0; a < d; ++a) res.comp[a].values = fft::inverse_real(c[a], d, n);
    return res;
}

}  // namespace

VectorField apply_lame(const VectorField& u) {
    return lame_apply(u, [](const double m[2][2], const cplx* in, cplx* out, int d) {
        for (int a = 0; a < d; ++a) {
            out[a] = 0.0;
            for (int b = 0; b < d; ++b) out[a] -= m[a][b] * in[b];
        }
    });
}

VectorField solve_lame_implicit(const VectorField& u, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::Config, "solve_lame_implicit requires a > 0");
    return lame_apply(u, [a](const double m[2][2], const cplx* in, cplx* out, int d) {
        if (d == 1) {
            out[0] = in[0] / (1.0 + a * m[0][0]);
            return;
        }
        double A = 1.0 + a * m[0][0], B = a * m[0][1], C = a * m[1][0], D = 1.0 + a * m[1][1];
        double det = A * D - B * C;
        out[0] = (D * in[0] - B * in[1]) / det;
        out[1] = (-C * in[0] + A * in[1]) / det;
    });
}

ScalarField dealias(const ScalarField& field) {
    auto c = fft::forward(field.values, field.d, field.n);
    int k[2] = {0, 0};
    bool nyq[2] = {false, false};
    for (std::size_t i = 0; i < c.size(); ++i) {
        mode_of(i, field.d, field.n, k, nyq);
        for (int a = 0; a < field.d; ++a)
            if (3 * std::abs(k[a]) > field.n) c[i] = 0.0;
    }
    ScalarField out(field.d, field.n);
    out.values = fft::inverse_real(c, field.d, field.n);
    return out;
}

namespace {

/// Accumulates sum_v w(v) f(x, v) dv^d for each spatial node.
template <class Weight>
ScalarField moment_of(const Distribution& f, Weight w) {
    const auto& g = f.grid;
    std::size_t nv = g.nv_total();
    std::vector<double> weights(nv);
    double vc[2];
    for (std::size_t j = 0; j < nv; ++j) {
        g.v_coords(j, vc);
        weights[j] = w(vc) * g.v_weight();
    }
    ScalarField out = ScalarField::like(g);
    parallel_for(g.nx_total(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double* row = &f.values[i * nv];
            double s = 0.0;
            for (std::size_t j = 0; j < nv; ++j) s += weights[j] * row[j];
            out[i] = s;
        }
    });
    return out;
}

}  // namespace

ScalarField density_moment(const Distribution& f) {
    return moment_of(f, [](const double*) { return 1.0; });
}

VectorField current_moment(const Distribution& f) {
    VectorField out = VectorField::like(f.grid);
    for (int a = 0; a < f.grid.d; ++a) out.comp[a] = moment_of(f, [a](const double* v) { return v[a]; });
    return out;
}

ScalarField energy_moment(const Distribution& f) {
    int d = f.grid.d;
    return moment_of(f, [d](const double* v) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += v[a] * v[a];
        return s;
    });
}

VectorField velocity_moment(const Distribution& f, int order) {
    switch (order) {
    case 0: {
        VectorField out(f.grid.d, f.grid.Nx);
        out.comp = {density_moment(f)};
        return out;
    }
    case 1: return current_moment(f);
    case 2: {
        VectorField out(f.grid.d, f.grid.Nx);
        out.comp = {energy_moment(f)};
        return out;
    }
    default: throw Error(ErrorKind::Config, "velocity moment order must be 0, 1 or 2");
    }
}

double sobolev_norm(const ScalarField& field, int order) {
    if (order < 0) throw Error(ErrorKind::Config, "sobolev order must be nonnegative");
    if (order > field.n / 4)
        throw Error(ErrorKind::Resolution, "sobolev order " + std::to_string(order) + " exceeds Nx/4");
    require_finite(field.values, "sobolev_norm input");
    auto c = fft::forward(field.values, field.d, field.n);
    int k[2] = {0, 0};
    bool nyq[2] = {false, false};
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        mode_of(i, field.d, field.n, k, nyq);
        double k2 = 0.0;
        for (int a = 0; a < field.d; ++a) k2 += double(k[a]) * k[a];
        s += std::pow(1.0 + k2, order) * std::norm(c[i]);
    }
    return std::sqrt(s);
}

double sobolev_norm(const VectorField& u, int order) {
    double s = 0.0;
    for (const auto& c : u.comp) {
        double n = sobolev_norm(c, order);
        s += n * n;
    }
    return std::sqrt(s);
}

namespace {

/// Central difference along velocity axis `axis`, zero outside the box.
std::vector<double> v_difference(const std::vector<double>& vals, const PhaseGrid& g, int axis) {
    std::vector<double> out(vals.size(), 0.0);
    std::size_t nv = g.nv_total();
    std::size_t stride = (g.d == 2 && axis == 0) ? static_cast<std::size_t>(g.Nv) : 1;
    double h2 = 2.0 * g.dv();
    for (std::size_t i = 0; i < g.nx_total(); ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
            int pos = static_cast<int>((j / stride) % g.Nv);
            double up = pos + 1 < g.Nv ? vals[i * nv + j + stride] : 0.0;
            double dn = pos > 0 ? vals[i * nv + j - stride] : 0.0;
            out[i * nv + j] = (up - dn) / h2;
        }
    }
    return out;
}

}  // namespace

double weighted_phase_norm(const Distribution& f, int order, double r) {
    const auto& g = f.grid;
    if (order < 0) throw Error(ErrorKind::Config, "phase norm order must be nonnegative");
    if (order > g.Nx / 4) throw Error(ErrorKind::Resolution, "phase norm order exceeds Nx/4");
    std::size_t nx = g.nx_total(), nv = g.nv_total();
    // x-Fourier coefficients of every velocity column
    std::vector<std::vector<cplx>> cols(nv);
    parallel_for(nv, [&](std::size_t b, std::size_t e) {
        std::vector<double> col(nx);
        for (std::size_t j = b; j < e; ++j) {
            for (std::size_t i = 0; i < nx; ++i) col[i] = f.values[i * nv + j];
            cols[j] = fft::forward(col, g.d, g.Nx);
        }
    });
    std::vector<double> weight(nv);
    double vc[2];
    for (std::size_t j = 0; j < nv; ++j) {
        g.v_coords(j, vc);
        double v2 = 0.0;
        for (int a = 0; a < g.d; ++a) v2 += vc[a] * vc[a];
        weight[j] = std::pow(1.0 + v2, r) * g.v_weight();
    }
    double total = 0.0;
    int amax0 = order, amax1 = g.d == 2 ? order : 0;
    for (int a0 = 0; a0 <= amax0; ++a0) {
        for (int a1 = 0; a1 <= amax1 && a0 + a1 <= order; ++a1) {
            std::vector<double> dx_f(nx * nv);
            parallel_for(nv, [&](std::size_t b, std::size_t e) {
                int k[2] = {0, 0};
                bool nyq[2] = {false, false};
                for (std::size_t j = b; j < e; ++j) {
                    std::vector<cplx> c = cols[j];
                    for (std::size_t i = 0; i < nx; ++i) {
                        mode_of(i, g.d, g.Nx, k, nyq);
                        cplx m = 1.0;
                        for (int p = 0; p < a0; ++p) m *= nyq[0] ? cplx(0.0) : cplx(0.0, k[0]);
                        for (int p = 0; p < a1; ++p) m *= nyq[1] ? cplx(0.0) : cplx(0.0, k[1]);
                        c[i] *= m;
                    }
                    auto vals = fft::inverse_real(c, g.d, g.Nx);
                    for (std::size_t i = 0; i < nx; ++i) dx_f[i * nv + j] = vals[i];
                }
            });
            int rest = order - a0 - a1;
            // beta = (b0, b1): b0 differences along v axis 0, then b1 along axis 1
            std::vector<double> along0 = dx_f;
            for (int b0 = 0; b0 <= rest; ++b0) {
                std::vector<double> cur = along0;
                int b1max = g.d == 2 ? rest - b0 : 0;
                for (int b1 = 0; b1 <= b1max; ++b1) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < nx; ++i)
                        for (std::size_t j = 0; j < nv; ++j) {
                            double val = cur[i * nv + j];
                            s += weight[j] * val * val;
                        }
                    total += s / static_cast<double>(nx);
                    if (b1 < b1max) cur = v_difference(cur, g, 1);
                }
                if (b0 < rest) along0 = v_difference(along0, g, 0);
            }
        }
    }
    return std::sqrt(total);
}

double total_mass(const Distribution& f) { return density_moment(f).mean(); }

double tail_fraction(const Distribution& f) {
    const auto& g = f.grid;
    std::size_t nv = g.nv_total();
    std::vector<char> tail(nv);
    double vc[2];
    for (std::size_t j = 0; j < nv; ++j) {
        g.v_coords(j, vc);
        bool t = false;
        for (int a = 0; a < g.d; ++a) t = t || std::abs(vc[a]) > 0.9 * g.Vmax;
        tail[j] = t;
    }
    double all = 0.0, in_tail = 0.0;
    for (std::size_t i = 0; i < g.nx_total(); ++i)
        for (std::size_t j = 0; j < nv; ++j) {
            double val = std::abs(f.values[i * nv + j]);
            all += val;
            if (tail[j]) in_tail += val;
        }
    return all > 0.0 ? in_tail / all : 0.0;
}

double trig_eval(const std::vector<cplx>& coeffs, int d, int n, const double* x) {
    // e^{i k x} for k = 0..n/2 by recurrence, negative k by conjugation
    auto table = [n](double xa) {
        std::vector<cplx> e(n / 2 + 1);
        cplx step(std::cos(xa), std::sin(xa));
        e[0] = 1.0;
        for (int k = 1; k <= n / 2; ++k) e[k] = e[k - 1] * step;
        return e;
    };
    auto phase = [n](const std::vector<cplx>& e, int i, double& nyq_cos) -> cplx {
        int k = fft::wavenumber(i, n);
        if (fft::is_nyquist(i, n)) {
            nyq_cos = e[n / 2].real();
            return cplx(nyq_cos, 0.0);
        }
        return k >= 0 ? e[k] : std::conj(e[-k]);
    };
    double dummy;
    if (d == 1) {
        auto e = table(x[0]);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += (coeffs[i] * phase(e, i, dummy)).real();
        return s;
    }
    auto e0 = table(x[0]);
    auto e1 = table(x[1]);
    double s = 0.0;
    for (int i0 = 0; i0 < n; ++i0) {
        cplx p0 = phase(e0, i0, dummy);
        cplx row = 0.0;
        for (int i1 = 0; i1 < n; ++i1) row += coeffs[static_cast<std::size_t>(i0) * n + i1] * phase(e1, i1, dummy);
        s += (p0 * row).real();
    }
    return s;
}

}  // namespace thickspray
