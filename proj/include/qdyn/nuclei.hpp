#pragma once

#include <map>
#include <utility>
#include <vector>

#include "qdyn/coupling.hpp"
#include "qdyn/geometry.hpp"
#include "qdyn/propagator.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// Pairwise internuclear repulsion U(r) = b exp(-lambda r), shifted so that
// both U and dU/dr vanish at the cutoff (C1 continuity, no force jumps).
struct RepulsionSpec {
  double b = 0.0;
  double lambda = 1.0;
  double r_cut = 10.0;

  double energy(double r) const;
  double dU(double r) const;  // dU/dr, shifted consistently
};

// Repulsion lookup per unordered species pair; absent pairs interact only
// through the electrons.
struct RepulsionTable {
  std::map<std::pair<int, int>, RepulsionSpec> pairs;

  const RepulsionSpec* find(int sa, int sb) const;
  double energy(const SystemGeometry& g) const;
  // Gradient with respect to all nuclear coordinates, flattened (atom-major).
  VectorXd gradient(const SystemGeometry& g) const;
};

// Ehrenfest force on every nuclear coordinate, flattened atom-major:
//   F = -sum_n occ_n Re psi_n^dag [dH/dX - dS/dX S^{-1} H] psi_n - dU/dX.
// The dS/dX S^{-1} H piece is the nonorthogonality correction that replaces
// i hbar dS/dX d/dt via the equation of motion; no extra Pulay term is added.
VectorXd ehrenfest_forces(const SystemGeometry& g, const BasisRoster& roster,
                          const ElectronState& st, const Vec3& a_bar, const Vec3& e_bar,
                          const CouplingOptions& opt, const RepulsionTable& rep);

// dU/dX alone (no electronic contribution), for tests and diagnostics.
VectorXd repulsion_gradient(const SystemGeometry& g, const RepulsionTable& rep);

// Velocity-Verlet pieces; the driver interleaves electronic substeps between
// the position drift and the closing half kick.
void half_kick(SystemGeometry& g, const VectorXd& forces, double dt);
void drift(SystemGeometry& g, double dt);

// Throws NumericalError if any two atoms are closer than min_dist (bohr).
void check_atom_overlap(const SystemGeometry& g, double min_dist = 0.1);

}  // namespace qdyn
