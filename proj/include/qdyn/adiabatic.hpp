#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "qdyn/coupling.hpp"
#include "qdyn/geometry.hpp"
#include "qdyn/propagator.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// Field-free electronic eigenstates at fixed nuclear geometry:
// H0 Psi_i = E_i S0 Psi_i, with Psi^dag S0 Psi = I. Eigenvectors carry a
// deterministic sign (largest-magnitude component real positive).
struct AdiabaticSnapshot {
  VectorXd energies;  // ascending
  MatrixXd states;    // columns are S0-orthonormal eigenvectors
  MatrixXd h0, s0;    // the matrices that were diagonalized

  int n_states() const { return static_cast<int>(energies.size()); }
};

AdiabaticSnapshot eigensolve(const MatrixXd& h0, const MatrixXd& s0);

// Convenience: build field-free H0, S0 for a geometry and diagonalize.
AdiabaticSnapshot eigensolve_geometry(const SystemGeometry& g, const BasisRoster& roster);

// Projection of propagated states onto the snapshot's eigenbasis in the S0
// metric: c(i, n) = Psi_i^dag S0 psi_n. Populations are occupation-weighted
// |c|^2 summed over electron states.
MatrixXc project(const AdiabaticSnapshot& snap, const MatrixXc& psi);
VectorXd adiabatic_populations(const AdiabaticSnapshot& snap, const ElectronState& st);

// First-derivative nonadiabatic coupling between eigenstates i and j over all
// nuclear coordinates (flattened atom-major):
//   g_ij(X_k) = Psi_i^T (dH0/dX_k - E_j dS0/dX_k) Psi_j,
//   F_ij = g_ij / (E_j - E_i) = Psi_i^T S0 (dPsi_j/dX_k).
// Requesting a pair with |E_j - E_i| < eps_degenerate throws DegeneratePair:
// the quotient is undefined there, and the pair should be treated as strongly
// coupled without computing it.
struct CouplingResult {
  VectorXd g;        // numerator vector, one entry per coordinate
  double gap = 0.0;  // E_j - E_i
};
CouplingResult nonadiabatic_coupling(const SystemGeometry& g, const BasisRoster& roster,
                                     const AdiabaticSnapshot& snap, int i, int j,
                                     double eps_degenerate = 1e-8);

// Closeness measure for pair (i, j):
//   rho = |g_ij| (hbar / P) / |gap|,
// the Hamiltonian variation across one nuclear de Broglie wavelength compared
// with the level spacing; the pair is treated as nonadiabatic when rho >= theta.
// The momentum scale P is selectable: `projected` (default) contracts the
// actual nuclear momentum along the coupling direction, P = |sum_k M_k v_k
// ghat_ij(k)|; `kinetic` uses P = sqrt(2 M_mean Ekin_mean) regardless of
// direction. P below p_floor is clamped up to it (a thermal floor keeps
// turning points from diverging). Limits: nuclei exactly at rest (zero
// kinetic energy, no floor) count as adiabatic, rho = 0; moving nuclei whose
// momentum along the coupling direction vanishes get rho = infinity, since
// the nuclear wavelength along that direction is unbounded.
enum class MomentumModel { projected, kinetic };

struct AdiabaticityOptions {
  MomentumModel model = MomentumModel::projected;
  double theta = 0.1;           // classification threshold on rho
  double p_floor = 0.0;         // momentum floor (atomic units)
  double eps_degenerate = 1e-8; // gap guard, hartree
};

double adiabaticity_rho(const CouplingResult& c, const SystemGeometry& g,
                        const AdiabaticityOptions& opt = {});

// rho for every pair (upper triangle mirrored, zero diagonal); pairs inside
// the degeneracy guard are not computed and get infinite rho, i.e. they are
// nonadiabatic unconditionally.
MatrixXd adiabaticity_matrix(const SystemGeometry& g, const BasisRoster& roster,
                             const AdiabaticSnapshot& snap,
                             const AdiabaticityOptions& opt = {});

// Pairs (i, j), i < j, whose rho meets or exceeds opt.theta.
std::vector<std::pair<int, int>> nonadiabatic_pairs(const MatrixXd& rho, double theta);

// Persistent labeling across snapshots: perm[i_now] = label of column i in
// the previous snapshot's ordering, matched by largest |Psi_prev^T S0 Psi_now|.
std::vector<int> match_labels(const AdiabaticSnapshot& prev, const AdiabaticSnapshot& now,
                              const std::vector<int>& prev_labels);

}  // namespace qdyn
