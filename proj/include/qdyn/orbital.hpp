#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qdyn/types.hpp"

namespace qdyn {

// Minimal-basis shells: one normalized Cartesian Gaussian per shell,
// s or p_x/p_y/p_z, single exponent.
enum class ShellKind { s, px, py, pz };

std::string to_string(ShellKind k);
ShellKind shell_kind_from_string(const std::string& s);

struct OrbitalShell {
  ShellKind kind = ShellKind::s;
  double alpha = 1.0;    // Gaussian exponent, bohr^-2
  double epsilon = 0.0;  // on-site orbital energy, hartree

  // Cartesian powers (i,j,k) of the prefactor x^i y^j z^k.
  std::array<int, 3> powers() const {
    switch (kind) {
      case ShellKind::s:  return {0, 0, 0};
      case ShellKind::px: return {1, 0, 0};
      case ShellKind::py: return {0, 1, 0};
      case ShellKind::pz: return {0, 0, 1};
    }
    return {0, 0, 0};
  }

  // Normalization constant so that <phi|phi> = 1.
  double norm() const {
    const double ns = std::pow(2.0 * alpha / M_PI, 0.75);
    return kind == ShellKind::s ? ns : 2.0 * std::sqrt(alpha) * ns;
  }

  // Pointwise value at displacement u from the shell's center.
  double evaluate(const Vec3& u) const {
    const auto p = powers();
    double mono = 1.0;
    for (int ax = 0; ax < 3; ++ax)
      for (int m = 0; m < p[ax]; ++m) mono *= u[ax];
    return norm() * mono * std::exp(-alpha * u.squaredNorm());
  }
};

struct Species {
  std::string name;
  double mass = 1.0;        // nuclear mass in electron masses
  double hueckel_k = 1.75;  // off-site Hamiltonian proportionality constant
  std::vector<OrbitalShell> shells;

  void validate() const;
};

}  // namespace qdyn
