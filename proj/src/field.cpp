#include "qdyn/field.hpp"

#include <cmath>

#include "qdyn/types.hpp"
#include "qdyn/units.hpp"

namespace qdyn {

std::string to_string(Envelope e) {
  switch (e) {
    case Envelope::gaussian: return "gaussian";
    case Envelope::sin2:     return "sin2";
    case Envelope::constant: return "constant";
  }
  return "?";
}

Envelope envelope_from_string(const std::string& s) {
  if (s == "gaussian") return Envelope::gaussian;
  if (s == "sin2") return Envelope::sin2;
  if (s == "constant") return Envelope::constant;
  throw ConfigError("unknown envelope '" + s + "' (expected gaussian, sin2, constant)");
}

void PulseSpec::validate() const {
  if (omega <= 0.0) throw ConfigError("pulse: omega must be positive");
  if (a0 < 0.0) throw ConfigError("pulse: a0 must be nonnegative");
  if (envelope != Envelope::constant && tau <= 0.0)
    throw ConfigError("pulse: tau must be positive for shaped envelopes");
  const double pn = pol.norm();
  if (pn < 1e-12) throw ConfigError("pulse: polarization vector is zero");
  if (std::abs(pn - 1.0) > 1e-9)
    throw ConfigError("pulse: polarization vector must be normalized");
}

double a0_from_intensity(double i_wcm2, double omega) {
  if (i_wcm2 < 0.0) throw ConfigError("pulse: intensity must be nonnegative");
  const double e0 = units::field_from_intensity(i_wcm2);
  return units::speed_of_light * e0 / omega;
}

}  // namespace qdyn

namespace qdyn::units {

double field_from_intensity(double i_wcm2) {
  return std::sqrt(i_wcm2 / wcm2_per_au_intensity);
}

}  // namespace qdyn::units
