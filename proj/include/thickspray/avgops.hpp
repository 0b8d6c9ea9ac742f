#pragma once

#include "thickspray/grid.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace thickspray {

using cplx = std::complex<double>;

/// H(t, x) stored as normalized Fourier coefficients on a uniform time grid
/// t_i = i T / (nt - 1), i = 0..nt-1. Layout c[i * modes + mode].
struct SpaceTimeField {
    int d = 1;
    int n = 0;
    int nt = 0;
    double T = 1.0;
    std::vector<cplx> c;

    SpaceTimeField() = default;
    SpaceTimeField(int d_, int n_, int nt_, double T_);

    std::size_t modes() const;
    double dt() const { return T / (nt - 1); }
    double time(int i) const { return i * dt(); }
    cplx& at(int i, std::size_t mode) { return c[static_cast<std::size_t>(i) * modes() + mode]; }
    cplx at(int i, std::size_t mode) const { return c[static_cast<std::size_t>(i) * modes() + mode]; }

    /// Sets time slice i from a real physical field.
    void set_slice(int i, const ScalarField& field);
    /// Physical values of time slice i (real part).
    ScalarField slice(int i) const;
    /// Flat mode index of wavenumber k (components in [-n/2, n/2)).
    std::size_t mode_index(const int* k) const;
};

/// Kernel G(t, s, x, v) described through its Fourier transform in (x, v).
class Kernel {
public:
    virtual ~Kernel() = default;
    virtual int dim() const = 0;
    virtual bool diagonal_vanishing() const = 0;
    /// x-wavenumbers m with nonzero Fourier coefficient of G (m = l - k).
    virtual std::vector<std::array<int, 2>> x_modes() const = 0;
    /// (F_{x,v} G)(t, s, m, xi), d components.
    virtual void symbol(double t, double s, const int* m, const double* xi, cplx* out) const = 0;
    /// Throws a config error if the kernel cannot be used with this time grid.
    virtual void check_time_grid(int /*nt*/, double /*T*/) const {}
};

/// G = w(t,s) (1 + delta cos(l0 x_0)) grad_v exp(-|v - v0|^2 / sigma^2), with
/// w = 1, or w = t - s for the diagonal-vanishing family.
class AnalyticGaussianKernel : public Kernel {
public:
    struct Params {
        int d = 1;
        double sigma = 1.0;
        std::array<double, 2> v0{0.0, 0.0};
        double delta = 0.0;
        int l0 = 1;
        bool time_weight = false;
    };
    explicit AnalyticGaussianKernel(Params p) : p_(p) {}

    int dim() const override { return p_.d; }
    bool diagonal_vanishing() const override { return p_.time_weight; }
    std::vector<std::array<int, 2>> x_modes() const override;
    void symbol(double t, double s, const int* m, const double* xi, cplx* out) const override;
    const Params& params() const { return p_; }

private:
    Params p_;
};

/// Kernel sampled on a time-pair x phase grid. x modes are truncated to
/// |m_i| <= coupling_band; F_v is a direct sum over the velocity grid.
class GriddedKernel : public Kernel {
public:
    using Fn = std::function<void(double t, double s, const double* x, const double* v, double* out)>;

    GriddedKernel(const PhaseGrid& grid, int nt, double T, const Fn& fn, bool diagonal_vanishing,
                  int coupling_band = 16);

    int dim() const override { return grid_.d; }
    bool diagonal_vanishing() const override { return diag_; }
    std::vector<std::array<int, 2>> x_modes() const override { return modes_; }
    void symbol(double t, double s, const int* m, const double* xi, cplx* out) const override;
    void check_time_grid(int nt, double T) const override;

private:
    PhaseGrid grid_;
    int nt_;
    double T_;
    bool diag_;
    std::vector<std::array<int, 2>> modes_;
    // coefficients [pair][mode][jv][component]
    std::vector<cplx> coef_;
};

enum class Characteristic { Free, Fric };

/// K[H](t) = sum_k int_0^t H_k(s) (ik).(F_{x,v}G)(t, s, l-k, xi) ds with
/// xi = k (t-s) (free) or k (e^{t-s} - 1) (fric); trapezoid rule in s.
SpaceTimeField k_free(const Kernel& G, const SpaceTimeField& H);
SpaceTimeField k_fric(const Kernel& G, const SpaceTimeField& H);

/// Linear map on SpaceTimeFields with an adjoint for the weighted inner
/// product sum_i w_i sum_l g_l conj(a) b (trapezoid w_i, g_l = 1 or 1+|l|^2 on output).
struct LinearOperator {
    std::function<SpaceTimeField(const SpaceTimeField&)> apply;
    std::function<SpaceTimeField(const SpaceTimeField&)> adjoint;
};

/// Precomputed kernel operator (symbol table over time pairs and modes).
class KernelOperator {
public:
    KernelOperator(const Kernel& G, Characteristic ch, int d, int n, int nt, double T);
    /// Difference K_free - K_fric.
    static KernelOperator difference(const Kernel& G, int d, int n, int nt, double T);

    SpaceTimeField apply(const SpaceTimeField& H) const;
    /// Adjoint for L2_T L2 input and L2_T L2 (graded=false) or L2_T H1 (graded=true) output.
    SpaceTimeField adjoint(const SpaceTimeField& Y, bool graded) const;
    LinearOperator as_operator(bool graded) const;
    /// Copy keeping only the entries fed by input mode `in_mode`.
    KernelOperator restricted(std::size_t in_mode) const;

private:
    KernelOperator() = default;
    struct Entry {
        std::uint32_t out_mode, in_mode;
        std::vector<cplx> w;  // [i * nt + j], trapezoid weight included
    };
    int d_ = 1, n_ = 0, nt_ = 0;
    double T_ = 1.0;
    std::vector<Entry> entries_;
};

struct NormOptions {
    int probes = 8;
    std::uint64_t seed = 1;
    int max_iterations = 200;
    double tol = 1e-10;
    bool graded = false;   // H1-graded output norm
    int only_mode = -1;    // restrict inputs to this flat mode index
};

struct NormEstimate {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
};

/// Power iteration on op* op from `probes` seeded random starts; returns the
/// largest Rayleigh estimate. Non-convergence is reported, not thrown.
NormEstimate operator_norm_estimate(const LinearOperator& op, const SpaceTimeField& shape, const NormOptions& opt);

/// Weighted norm used by operator_norm_estimate.
double spacetime_norm(const SpaceTimeField& H, bool graded);

struct SuiteRow {
    std::string test;
    int Nx = 0;
    int k = 0;
    double value = 0.0;
    std::string verdict;  // "pass", "fail" or "info"
};

struct SuiteOptions {
    std::vector<int> ladder{32, 64, 128};
    double T = 1.0;
    int diff_modes = 32;  // difference test uses k = 1..min(diff_modes, Nx/4), needs >= 4 modes
    double ratio_limit = 1.25;
    std::vector<double> growth_T{0.5, 1.0, 2.0};
    NormOptions norm;
};

struct SuiteReport {
    std::vector<SuiteRow> rows;
    bool l2_pass = false, graded_pass = false, diff_pass = false;
};

/// Empirical boundedness tests for K_free/K_fric (L2), the diagonal-vanishing
/// graded norm, and |k|-weighted single-mode differences.
SuiteReport smoothing_suite(const AnalyticGaussianKernel::Params& base, const SuiteOptions& opt);

}  // namespace thickspray
