#pragma once

#include "qdyn/orbital.hpp"
#include "qdyn/types.hpp"

// Brute-force numerical cross-checks for the closed-form two-center tables.
// Everything here integrates pointwise orbital values on adaptive
// Gauss-Legendre grids and must stay independent of the analytic ladder code:
// the only shared ingredient is the orbital definition itself.

namespace qdyn::oracles {

enum class ElementKind { overlap, dipole, momentum };

struct QuadratureResult {
  Eigen::Vector3cd value;  // scalar kinds fill component 0 only
  double err = 0.0;        // difference between refinement levels
  long evals = 0;          // integrand evaluations spent
};

// <bra(u-d)| op |ket(u)> by tensor-product Gauss-Legendre quadrature over a
// box centered on the Gaussian-product center, refined until two consecutive
// orders agree to tol (relative to max(1, |value|)). The momentum kind
// applies -i hbar grad to the ket with a five-point finite-difference
// stencil, deliberately avoiding the analytic derivative ladders.
QuadratureResult quadrature_matrix_element(ElementKind kind, const OrbitalShell& bra,
                                           const OrbitalShell& ket, const Vec3& d,
                                           double tol = 1e-10);

}  // namespace qdyn::oracles
