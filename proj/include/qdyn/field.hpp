#pragma once

#include <cmath>
#include <string>

#include "qdyn/types.hpp"
#include "qdyn/units.hpp"

namespace qdyn {

enum class Envelope { gaussian, sin2, constant };

std::string to_string(Envelope e);
Envelope envelope_from_string(const std::string& s);

// Single lattice-scale EM pulse in the long-wavelength limit: a spatially
// uniform vector potential
//   A(t) = a0 * env(t - t0) * cos(omega (t - t0) + phase) * pol + delta_a,
// with the electric field E(t) = -(1/c) dA/dt evaluated analytically.
// delta_a is a constant offset used for gauge experiments; it never
// contributes to E.
struct PulseSpec {
  double a0 = 0.0;     // peak vector potential, au
  double omega = 0.1;  // carrier angular frequency, au
  Envelope envelope = Envelope::sin2;
  double tau = 0.0;    // envelope scale: full width for sin2, sigma for gaussian
  double t0 = 0.0;     // pulse center, au
  double phase = 0.0;  // carrier-envelope phase, rad
  Vec3 pol = Vec3::UnitZ();
  Vec3 delta_a = Vec3::Zero();

  double env(double t) const {
    const double s = t - t0;
    switch (envelope) {
      case Envelope::gaussian:
        return std::exp(-0.5 * s * s / (tau * tau));
      case Envelope::sin2: {
        if (std::abs(s) >= 0.5 * tau) return 0.0;
        const double c = std::cos(M_PI * s / tau);
        return c * c;
      }
      case Envelope::constant:
        return 1.0;
    }
    return 0.0;
  }

  double denv(double t) const {
    const double s = t - t0;
    switch (envelope) {
      case Envelope::gaussian:
        return -s / (tau * tau) * env(t);
      case Envelope::sin2: {
        if (std::abs(s) >= 0.5 * tau) return 0.0;
        return -M_PI / tau * std::sin(2.0 * M_PI * s / tau);
      }
      case Envelope::constant:
        return 0.0;
    }
    return 0.0;
  }

  Vec3 a_bar(double t) const {
    const double s = t - t0;
    return a0 * env(t) * std::cos(omega * s + phase) * pol + delta_a;
  }

  // E = -(1/c) dA/dt, by the product rule on envelope times carrier.
  Vec3 e_bar(double t) const {
    const double s = t - t0;
    const double da = a0 * (denv(t) * std::cos(omega * s + phase) -
                            omega * env(t) * std::sin(omega * s + phase));
    return -(da / units::speed_of_light) * pol;
  }

  // Peak electric field amplitude corresponding to a0.
  double e0() const { return a0 * omega / units::speed_of_light; }

  // True once the envelope has permanently returned to (numerically) zero.
  // A constant envelope never ends.
  bool is_over(double t) const {
    switch (envelope) {
      case Envelope::sin2: return t - t0 >= 0.5 * tau;
      case Envelope::gaussian: return t - t0 >= 8.0 * tau;
      case Envelope::constant: return false;
    }
    return false;
  }

  // Central wavelength in bohr; the dipole-limit guard compares this against
  // the system extent.
  double wavelength() const { return 2.0 * M_PI * units::speed_of_light / omega; }

  void validate() const;
};

// Peak vector potential for a stated peak intensity (W/cm^2) and carrier
// frequency: a0 = c E0 / omega.
double a0_from_intensity(double i_wcm2, double omega);

}  // namespace qdyn
