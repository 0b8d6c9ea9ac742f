#pragma once

#include "thickspray/grid.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace thickspray {

/// Time-dependent force F(tau, x) defined on [t_min, t_max].
class ForceField {
public:
    virtual ~ForceField() = default;
    virtual int dim() const = 0;
    virtual double t_min() const = 0;
    virtual double t_max() const = 0;
    virtual void evaluate(double tau, const double* x, double* out) const = 0;
    /// Times where F may jump; substeps are aligned to them.
    virtual std::vector<double> breakpoints() const { return {}; }
};

class AnalyticForce : public ForceField {
public:
    using Fn = std::function<void(double tau, const double* x, double* out)>;

    AnalyticForce(int d, Fn fn, double t_min = -1e300, double t_max = 1e300);
    static AnalyticForce zero(int d);
    static AnalyticForce constant(int d, std::vector<double> value);

    int dim() const override { return d_; }
    double t_min() const override { return t0_; }
    double t_max() const override { return t1_; }
    void evaluate(double tau, const double* x, double* out) const override;

private:
    int d_;
    Fn fn_;
    double t0_, t1_;
};

/// Piecewise-constant-in-time gridded force; each segment stores a
/// VectorField evaluated off-grid by trigonometric interpolation.
class GriddedForceHistory : public ForceField {
public:
    GriddedForceHistory(int d, int n) : d_(d), n_(n) {}

    /// Appends the field as the force on [t_begin, t_end]; segments must be contiguous.
    void push(double t_begin, double t_end, const VectorField& field);
    bool empty() const { return segs_.empty(); }
    std::size_t size() const { return segs_.size(); }

    int dim() const override { return d_; }
    double t_min() const override;
    double t_max() const override;
    void evaluate(double tau, const double* x, double* out) const override;
    std::vector<double> breakpoints() const override;

private:
    struct Segment {
        double t0, t1;
        std::vector<std::vector<std::complex<double>>> coeffs;
    };
    int d_, n_;
    std::vector<Segment> segs_;
};

struct FlowResult {
    double X[2] = {0.0, 0.0};  // position, not wrapped to the torus
    double V[2] = {0.0, 0.0};
    double jacobian_phase = 1.0;
    std::size_t substeps = 0;
};

/// Solves dX/dtau = V, dV/dtau = -V + F(tau, X) from (x, v) at time t to
/// time s (either direction). Friction enters through exact exponential
/// weights; F is frozen at a predicted midpoint on each substep.
FlowResult flow(const ForceField& F, const double* x, const double* v, double t, double s, double dt_sub);

struct StraightenResult {
    double psi[2] = {0.0, 0.0};
    double det = 1.0;          // det D_v psi
    double contraction = 0.0;  // largest observed fixed-point contraction ratio
    double residual = 0.0;
    int iterations = 0;
};

struct StraightenOptions {
    double tol = 1e-10;
    double horizon = 0.5;
    double dt_sub = 1e-3;
    double det_step = 1e-3;
    int max_iterations = 200;
};

/// psi with X^{s;t}(x, psi) = x + (1 - e^{t-s}) v, by the fixed point
/// psi = v - Xtilde(x, psi). Raises a horizon error when |s - t| exceeds the
/// horizon or the iteration stops contracting.
StraightenResult straighten(const ForceField& F, const double* x, const double* v, double s, double t,
                            const StraightenOptions& opt = {});

/// Straightening map on the tensor sub-grid xs x vs (coordinates per axis).
struct StraighteningMap {
    int d = 1;
    std::vector<double> xs, vs;
    std::vector<StraightenResult> nodes;  // index (ix * nv_sub + jv)
    double det_min = 1.0, det_max = 1.0;
    double residual_max = 0.0;
};

StraighteningMap straighten_map(const ForceField& F, int d, const std::vector<double>& xs,
                                const std::vector<double>& vs, double s, double t,
                                const StraightenOptions& opt = {});

/// f(t, x, v) = e^{d t} f_in(X^{0;t}(x, v), V^{0;t}(x, v)) with cubic spline
/// interpolation of f_in. Raises a tail error when a foot leaves the velocity
/// box while the tail fraction of f_in exceeds tail_tol.
Distribution pushforward_representation(const Distribution& f_in, const ForceField& F, double t,
                                        double dt_sub = 1e-3, double tail_tol = 1e-10);

}  // namespace thickspray
