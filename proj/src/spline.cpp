#include "thickspray/spline.hpp"

#include "thickspray/fft.hpp"
#include "thickspray/parallel.hpp"

#include <cmath>
#include <numbers>

namespace thickspray {

namespace {

/// Natural cubic B-spline coefficients of samples y[0..n-1], written with
/// one ghost coefficient at each end: out[0..n+1].
void natural_coefficients(const double* y, std::size_t ystride, int n, double* out, std::size_t ostride) {
    std::vector<double> c(n), cp(n), dp(n);
    c[0] = y[0];
    c[n - 1] = y[(n - 1) * ystride];
    // Thomas sweep for c_{j-1} + 4 c_j + c_{j+1} = 6 y_j, j = 1..n-2
    int m = n - 2;
    for (int i = 0; i < m; ++i) {
        int j = i + 1;
        double rhs = 6.0 * y[j * ystride];
        if (j == 1) rhs -= c[0];
        if (j == n - 2) rhs -= c[n - 1];
        double denom = 4.0 - (i > 0 ? cp[i - 1] : 0.0);
        cp[i] = 1.0 / denom;
        dp[i] = (rhs - (i > 0 ? dp[i - 1] : 0.0)) / denom;
    }
    for (int i = m - 1; i >= 0; --i) c[i + 1] = dp[i] - (i + 1 < m ? cp[i] * c[i + 2] : 0.0);
    out[0] = 2.0 * c[0] - c[1];
    for (int j = 0; j < n; ++j) out[(j + 1) * ostride] = c[j];
    out[(n + 1) * ostride] = 2.0 * c[n - 1] - c[n - 2];
}

inline void bspline_weights(double t, double* w) {
    double t2 = t * t, t3 = t2 * t, u = 1.0 - t;
    w[0] = u * u * u / 6.0;
    w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    w[3] = t3 / 6.0;
}

}  // namespace

PhaseSpline::PhaseSpline(const Distribution& f) : grid_(f.grid) {
    const auto& g = grid_;
    int nv = g.Nv, d = g.d;
    std::size_t nvt = g.nv_total(), nxt = g.nx_total();
    std::size_t np = static_cast<std::size_t>(nv + 2);
    nvp_ = d == 1 ? np : np * np;
    coef_.assign(nxt * nvp_, 0.0);

    // velocity prefilter
    parallel_for(nxt, [&](std::size_t b, std::size_t e) {
        std::vector<double> tmp(d == 1 ? 0 : static_cast<std::size_t>(nv) * np);
        for (std::size_t i = b; i < e; ++i) {
            const double* src = &f.values[i * nvt];
            double* dst = &coef_[i * nvp_];
            if (d == 1) {
                natural_coefficients(src, 1, nv, dst, 1);
            } else {
                for (int j0 = 0; j0 < nv; ++j0) natural_coefficients(src + j0 * nv, 1, nv, &tmp[j0 * np], 1);
                for (std::size_t q = 0; q < np; ++q) natural_coefficients(&tmp[q], np, nv, dst + q, np);
            }
        }
    });

    // periodic prefilter in x, diagonal in Fourier space
    double dx = g.dx();
    int n = g.Nx;
    std::vector<double> symbol(n);
    for (int i = 0; i < n; ++i) symbol[i] = (4.0 + 2.0 * std::cos(fft::wavenumber(i, n) * dx)) / 6.0;
    parallel_for(nvp_, [&](std::size_t b, std::size_t e) {
        std::vector<double> col(nxt);
        for (std::size_t q = b; q < e; ++q) {
            for (std::size_t i = 0; i < nxt; ++i) col[i] = coef_[i * nvp_ + q];
            auto c = fft::forward(col, d, n);
            for (std::size_t i = 0; i < nxt; ++i) {
                double s = d == 1 ? symbol[i] : symbol[i / n] * symbol[i % n];
                c[i] /= s;
            }
            auto back = fft::inverse_real(c, d, n);
            for (std::size_t i = 0; i < nxt; ++i) coef_[i * nvp_ + q] = back[i];
        }
    });
}

double PhaseSpline::eval(const double* x, const double* v) const {
    const auto& g = grid_;
    int d = g.d, n = g.Nx, nv = g.Nv;
    double dv = g.dv(), v0 = -g.Vmax + 0.5 * dv;
    int vi[2];
    double wv[2][4];
    for (int a = 0; a < d; ++a) {
        double s = (v[a] - v0) / dv;
        if (!(s >= -1e-12 && s <= nv - 1 + 1e-12)) return 0.0;
        int j = static_cast<int>(std::floor(s));
        if (j > nv - 2) j = nv - 2;
        if (j < 0) j = 0;
        bspline_weights(s - j, wv[a]);
        vi[a] = j;  // padded index of node j-1 is j
    }
    int xi[2][4];
    double wx[2][4];
    double dx = g.dx();
    for (int a = 0; a < d; ++a) {
        double s = x[a] / dx;
        double fl = std::floor(s);
        bspline_weights(s - fl, wx[a]);
        long base = static_cast<long>(fl) % n;
        if (base < 0) base += n;
        for (int p = 0; p < 4; ++p) xi[a][p] = static_cast<int>((base - 1 + p + n) % n);
    }
    std::size_t np = static_cast<std::size_t>(nv + 2);
    double sum = 0.0;
    if (d == 1) {
        for (int p = 0; p < 4; ++p) {
            const double* row = &coef_[xi[0][p] * nvp_ + vi[0]];
            double s = wv[0][0] * row[0] + wv[0][1] * row[1] + wv[0][2] * row[2] + wv[0][3] * row[3];
            sum += wx[0][p] * s;
        }
        return sum;
    }
    for (int p0 = 0; p0 < 4; ++p0)
        for (int p1 = 0; p1 < 4; ++p1) {
            std::size_t ix = static_cast<std::size_t>(xi[0][p0]) * n + xi[1][p1];
            const double* base = &coef_[ix * nvp_];
            double s = 0.0;
            for (int q0 = 0; q0 < 4; ++q0) {
                const double* row = base + (vi[0] + q0) * np + vi[1];
                s += wv[0][q0] * (wv[1][0] * row[0] + wv[1][1] * row[1] + wv[1][2] * row[2] + wv[1][3] * row[3]);
            }
            sum += wx[0][p0] * wx[1][p1] * s;
        }
    return sum;
}

}  // namespace thickspray
