#pragma once

#include <complex>
#include <vector>

namespace thickspray::fft {

using cplx = std::complex<double>;

/// Signed wavenumber of index i on an n-point periodic grid, in [-n/2, n/2).
inline int wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }

inline bool is_nyquist(int i, int n) { return i == n / 2; }

/// Forward transform on [n]^d (row-major, d in {1,2}) with kernel e^{-ik.x}.
/// The result is divided by n^d, so entry 0 is the mean of the field.
std::vector<cplx> forward(const std::vector<double>& values, int d, int n);
std::vector<cplx> forward(const std::vector<cplx>& values, int d, int n);

/// Inverse of forward(): sum_k c_k e^{ik.x}.
std::vector<cplx> inverse(const std::vector<cplx>& coeffs, int d, int n);

/// Real part of inverse(); used when the coefficients are conjugate symmetric.
std::vector<double> inverse_real(const std::vector<cplx>& coeffs, int d, int n);

}  // namespace thickspray::fft
