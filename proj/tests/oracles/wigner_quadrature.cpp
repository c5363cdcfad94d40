#include "oracles/wigner_quadrature.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

Wavefunction gaussian_wavepacket(double x0, double p0, double var_x) {
  const double norm = std::pow(2.0 * std::numbers::pi * var_x, -0.25);
  return [=](double x) {
    const double d = x - x0;
    return norm * std::exp(std::complex<double>(-d * d / (4.0 * var_x), 2.0 * p0 * x));
  };
}

double wigner_by_quadrature(const Wavefunction& psi, double x, double p, double half_width,
                            int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = 2.0 * half_width / intervals;
  std::complex<double> acc = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double xi = -half_width + k * h;
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::exp(std::complex<double>(0.0, -4.0 * xi * p)) * psi(x + xi) *
           std::conj(psi(x - xi));
  }
  return (2.0 / std::numbers::pi) * (acc * (h / 3.0)).real();
}

}  // namespace oracle
