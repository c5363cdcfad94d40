#pragma once

#include <complex>
#include <functional>

namespace oracle {

/// Pure single-mode wavefunction in the x representation ([x, p] = i/2).
using Wavefunction = std::function<std::complex<double>(double)>;

/// Gaussian wavepacket with x variance `var_x`, centred at (x0, p0).
/// var_x = 1/4 gives a coherent state; other values an x- or p-squeezed state.
Wavefunction gaussian_wavepacket(double x0, double p0, double var_x);

/// W(x, p) = (2/pi) int dxi exp(-4 i xi p) psi(x + xi) conj(psi(x - xi)),
/// evaluated by composite Simpson quadrature over |xi| <= half_width.
double wigner_by_quadrature(const Wavefunction& psi, double x, double p,
                            double half_width = 8.0, int intervals = 4000);

}  // namespace oracle
