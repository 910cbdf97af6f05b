#pragma once

#include <functional>

#include "qdyn/types.hpp"

// Closed-form reference dynamics and small analytic solvers used to pin down
// expected values in tests. None of this code touches the simulator's matrix
// assembly or propagation paths.

namespace qdyn::oracles {

// Resonant two-level Rabi flopping in the rotating-wave approximation:
// excited population sin^2(Omega t / 2).
double rabi_population(double t, double rabi_omega);

// Rabi frequency for a dipole-coupled two-level system driven at resonance:
// Omega = |E0 mu| / hbar.
double rabi_omega(double e0, double mu);

// Landau-Zener single-passage transition probability for diabatic energies
// +-lambda x, coupling V, and sweep velocity v (so d(dE)/dt = 2 lambda v):
// P = exp(-2 pi V^2 / (hbar 2 lambda v)).
double landau_zener_probability(double coupling, double slope, double velocity);

// Stationary-state phase evolution, psi(t) = psi(0) exp(-i E t / hbar).
Complex free_phase(double e, double t);

// Both eigenvalues of the 2x2 generalized problem
//   [[h11, h12], [h12, h22]] Psi = E [[1, s], [s, 1]] Psi
// from the quadratic characteristic polynomial.
struct TwoLevelEigen {
  double e_lo, e_hi;
};
TwoLevelEigen two_level_eigenvalues(double h11, double h22, double h12, double s);

// Five-point central difference d/dx f, O(h^4).
double central_difference(const std::function<double(double)>& f, double x, double h);

// Composite Simpson integral on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace qdyn::oracles
