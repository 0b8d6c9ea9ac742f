#pragma once

#include "thickspray/grid.hpp"

#include <vector>

namespace thickspray {

/// Tensor-product cubic B-spline interpolant of a Distribution: periodic in
/// x, natural end conditions in v, and zero for velocities outside
/// [v_0, v_{Nv-1}].
class PhaseSpline {
public:
    explicit PhaseSpline(const Distribution& f);

    double eval(const double* x, const double* v) const;
    const PhaseGrid& grid() const { return grid_; }

private:
    PhaseGrid grid_;
    std::size_t nvp_;  // (Nv + 2)^d padded velocity coefficients per x node
    std::vector<double> coef_;
};

}  // namespace thickspray
