#pragma once

#include "thickspray/grid.hpp"
#include "thickspray/model.hpp"

#include <complex>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace thickspray {

using cplx = std::complex<double>;

enum class PenroseVariant { Standard, Optimal };

const char* to_string(PenroseVariant v);
PenroseVariant penrose_variant_from_string(const std::string& s);

struct FrequencyPoint {
    double gamma = 1.0;
    double tau = 0.0;
    std::vector<double> k;  // d components, nonzero
};

/// i khat . (F_v grad_v f)(x, khat s) = -s (F_v f)(x, khat s), with F_v f a direct
/// sum over the velocity grid. `ix` is the flat spatial index.
cplx ray_transform(const Distribution& f, std::size_t ix, const std::vector<double>& khat, double s);

/// Integrals of e^{-a sigma} ray(sigma) along one velocity direction for one
/// spatial node. Composite 16-point Gauss-Legendre on 2^n equal panels of
/// [0, sigma_max], doubling n until the value moves by less than 1e-9.
class RayIntegrator {
public:
    RayIntegrator(const Distribution& f, std::size_t ix, const std::vector<double>& khat);

    cplx ray(double sigma) const;
    /// int_0^inf e^{-a sigma} ray(sigma) dsigma for Re a >= 0.
    cplx integrate(cplx a, bool* converged = nullptr);
    /// int_0^inf |ray(sigma)| dsigma.
    double abs_integral();
    double sigma_max() const { return sigma_max_; }
    bool vanishes() const { return zero_; }

private:
    const std::vector<cplx>& level_values(int n);

    PhaseGrid grid_;
    std::vector<double> column_;
    std::vector<double> khat_;
    double sigma_max_ = 0.0;
    bool zero_ = false;
    std::map<int, std::vector<cplx>> cache_;
};

/// p'(rho) rho / (1 - rho_f); raises a bound error when rho_f >= 1.
double penrose_prefactor(double rho_f, double rho, const PressureLaw& law);

/// Penrose function at spatial node ix. Standard variant carries 1/(1+|k|^2).
cplx penrose_value(const Distribution& f, const ScalarField& rho_f, const ScalarField& rho,
                   const PressureLaw& law, std::size_t ix, const FrequencyPoint& point,
                   PenroseVariant variant);

/// Upper bound of |P| obtained by integrating the modulus of the integrand.
double penrose_majorant(const Distribution& f, const ScalarField& rho_f, const ScalarField& rho,
                        const PressureLaw& law, std::size_t ix, const std::vector<double>& k,
                        PenroseVariant variant);

/// inf over lambda in (0,1] of |1 - lambda z|.
double min_over_lambda(cplx z);

struct PenroseSampling {
    int n_phi = 64;    // angle intervals of (gamma, tau) on the half circle
    int n_beta = 48;   // balance angles between |k| and (gamma, tau)
    int n_dir = 32;    // directions of khat (d = 2 only; d = 1 uses +-1)
    int x_stride = 1;  // spatial subsampling

    PenroseSampling refined() const { return {2 * n_phi, 2 * n_beta, 2 * n_dir, x_stride}; }
};

struct PenroseReport {
    double margin = 1.0;
    std::size_t argmin_x = 0;
    FrequencyPoint argmin_point;
    double argmin_lambda = 1.0;
    PenroseVariant variant = PenroseVariant::Standard;
    PenroseSampling sampling;
    std::size_t n_x = 0;
    std::size_t n_evaluations = 0;
    std::size_t n_unconverged = 0;
    double c_required = 0.0;
    bool pass = true;
};

/// Sampled minimum of |1 - lambda P_opt| over x, the unit half sphere in
/// (gamma, tau, k) and lambda in (0,1] (standard), or of |1 - P_opt| (optimal).
PenroseReport check_condition(const Distribution& f, const FluidState& state, const PressureLaw& law,
                              const PenroseSampling& sampling, PenroseVariant variant, double c_required);

/// Tags among "one-bump", "radial-nonincreasing", "small-amplitude", "none".
std::set<std::string> classify_sufficient(const Distribution& f, const ScalarField& rho,
                                          const PressureLaw& law);

}  // namespace thickspray
