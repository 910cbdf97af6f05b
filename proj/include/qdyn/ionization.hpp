#pragma once

#include <vector>

#include "qdyn/coupling.hpp"
#include "qdyn/field.hpp"
#include "qdyn/geometry.hpp"
#include "qdyn/propagator.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// One-way continuum sink: a single extra basis row/column whose inbound
// coupling grows with |A(t)| and whose outbound coupling is zero, so bound
// amplitude leaks out and never returns. The sink amplitude deposited during
// each step is converted to ionized probability and removed, keeping
// bound_norm + q_ion = 1 exactly.
struct SinkSpec {
  bool enabled = false;
  VectorXd alpha;        // per-orbital coupling strength, roster order
  double p0_sink = 1.0;  // momentum-type matrix element into the continuum, au

  // H(sink, l) = alpha_l (e / m c) |A| p0_sink; e = m = 1 in au.
  double coupling(double alpha_l, double a_norm) const {
    return alpha_l * a_norm * p0_sink / units::speed_of_light;
  }
};

// Grow the matrix set by the sink row/column. S gains an orthogonal unit
// diagonal entry; H gains the one-way row. Call after assemble().
void extend_matrices(MatrixSet& m, const SinkSpec& sink, double a_norm);

// Grow state vectors by a zero sink amplitude.
void extend_state(ElectronState& st);

// Per-run ionization ledger. At every analysis frame the driver calls
// absorb(), which measures the sink amplitudes grown coherently since the
// previous frame, books them as ionized probability split over source
// orbitals, zeroes the sink row of psi, and rescales the bound part so
// bound norm = 1 - q_ion exactly. Booking at frame stride (not every
// integrator substep) keeps the total independent of dt: within a frame
// the transfer amplitude accumulates coherently, across frames the
// continuum is treated as memoryless.
struct IonizationLedger {
  double q_ion = 0.0;
  VectorXd channels;  // per-orbital share of q_ion
  VectorXd q_state;   // ionized probability per electron state

  void reset(int n_orbitals);
  // coupling_row holds H(sink, l) at the absorb time; channel attribution
  // uses the instantaneous flux |H(sink,l) psi_l|^2 and falls back to bound
  // populations when the coupling has already returned to zero.
  void absorb(ElectronState& st, const VectorXc& coupling_row);
};

}  // namespace qdyn
