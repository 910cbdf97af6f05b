#include "qdyn/oracles/reference.hpp"

#include <cmath>

#include "qdyn/units.hpp"

namespace qdyn::oracles {

double rabi_population(double t, double rabi_omega) {
  const double s = std::sin(0.5 * rabi_omega * t);
  return s * s;
}

double rabi_omega(double e0, double mu) { return std::abs(e0 * mu) / units::hbar; }

double landau_zener_probability(double coupling, double slope, double velocity) {
  // d(dE)/dt = 2 * slope * velocity for diabatic energies +- slope * x.
  return std::exp(-2.0 * M_PI * coupling * coupling /
                  (units::hbar * 2.0 * slope * velocity));
}

Complex free_phase(double e, double t) {
  return std::exp(Complex(0.0, -e * t / units::hbar));
}

TwoLevelEigen two_level_eigenvalues(double h11, double h22, double h12, double s) {
  // det(H - E S) = 0 with S = [[1, s], [s, 1]]:
  // (1 - s^2) E^2 - (h11 + h22 - 2 s h12) E + (h11 h22 - h12^2) = 0.
  const double a = 1.0 - s * s;
  const double b = -(h11 + h22 - 2.0 * s * h12);
  const double c = h11 * h22 - h12 * h12;
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  // Numerically stable quadratic roots.
  const double q = -0.5 * (b + (b >= 0.0 ? disc : -disc));
  const double r1 = q / a;
  const double r2 = c / q;
  return {std::min(r1, r2), std::max(r1, r2)};
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace qdyn::oracles
