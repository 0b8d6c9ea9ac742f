#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace thickspray {

/// Uniform discretization of T^d x [-Vmax, Vmax]^d, d in {1, 2}.
/// Space: x_i = i*dx, dx = 2*pi/Nx. Velocity: cell centres
/// v_j = -Vmax + (j + 1/2)*dv, dv = 2*Vmax/Nv.
struct PhaseGrid {
    int d = 1;
    int Nx = 32;
    int Nv = 64;
    double Vmax = 8.0;

    PhaseGrid() = default;
    PhaseGrid(int d_, int nx, int nv, double vmax);

    /// Throws Error(Config) on invalid parameters.
    void validate() const;

    double dx() const;
    double dv() const;
    std::size_t nx_total() const;  // Nx^d
    std::size_t nv_total() const;  // Nv^d
    double x(int i) const { return i * dx(); }
    double v(int j) const { return -Vmax + (j + 0.5) * dv(); }
    /// Quadrature weight of one velocity cell, dv^d.
    double v_weight() const;

    /// Coordinates of flat spatial / velocity indices.
    void x_coords(std::size_t ix, double* out) const;
    void v_coords(std::size_t jv, double* out) const;
};

/// Real field on the spatial grid [Nx]^d (row-major).
struct ScalarField {
    int d = 1;
    int n = 0;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(int d_, int n_, double fill = 0.0);
    static ScalarField like(const PhaseGrid& g, double fill = 0.0) { return {g.d, g.Nx, fill}; }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double mean() const;
    double min() const;
    double max() const;
    double max_abs() const;
    /// L^2 norm for the normalized torus measure.
    double l2() const;
};

/// d-component real vector field.
struct VectorField {
    int d = 1;
    int n = 0;
    std::vector<ScalarField> comp;

    VectorField() = default;
    VectorField(int d_, int n_, double fill = 0.0);
    static VectorField like(const PhaseGrid& g, double fill = 0.0) { return {g.d, g.Nx, fill}; }

    double max_abs() const;
    double l2() const;
};

/// Particle density f(x, v) >= 0 stored as values[ix * nv_total + jv].
struct Distribution {
    PhaseGrid grid;
    std::vector<double> values;

    Distribution() = default;
    explicit Distribution(const PhaseGrid& g, double fill = 0.0);

    double& at(std::size_t ix, std::size_t jv) { return values[ix * grid.nv_total() + jv]; }
    double at(std::size_t ix, std::size_t jv) const { return values[ix * grid.nv_total() + jv]; }
    double min() const;
};

void require_finite(const std::vector<double>& values, const char* what);

ScalarField spectral_derivative(const ScalarField& field, int axis);
VectorField gradient(const ScalarField& field);
ScalarField divergence(const VectorField& u);

/// J_eps = (I - eps^2 Laplacian)^{-1}.
ScalarField apply_j_epsilon(const ScalarField& field, double eps);

/// (Laplacian + grad div) u.
VectorField apply_lame(const VectorField& u);

/// Solves (I - a (Laplacian + grad div)) w = u mode by mode; requires a > 0.
VectorField solve_lame_implicit(const VectorField& u, double a);

/// Zeroes modes with some |k_i| > n/3.
ScalarField dealias(const ScalarField& field);

ScalarField density_moment(const Distribution& f);
VectorField current_moment(const Distribution& f);
ScalarField energy_moment(const Distribution& f);
/// order 0 and 2 return a one-component field; order 1 returns d components.
VectorField velocity_moment(const Distribution& f, int order);

/// (sum_k (1+|k|^2)^order |g_k|^2)^{1/2}; order > Nx/4 raises a resolution error.
double sobolev_norm(const ScalarField& field, int order);
double sobolev_norm(const VectorField& u, int order);

/// Weighted phase-space norm: sum over |alpha|+|beta| <= order of
/// <v>^{2r} |d_x^alpha d_v^beta f|^2; x derivatives spectral, v derivatives
/// by central differences with zero extension.
double weighted_phase_norm(const Distribution& f, int order, double r);

/// integral of f over x and v (normalized torus measure).
double total_mass(const Distribution& f);

/// Mass fraction carried by cells with some |v_i| > 0.9 Vmax.
double tail_fraction(const Distribution& f);

/// Trigonometric interpolant of a real field at an arbitrary point, given
/// the coefficients from fft::forward.
double trig_eval(const std::vector<std::complex<double>>& coeffs, int d, int n, const double* x);

}  // namespace thickspray
