#pragma once

#include <functional>

#include "qdyn/types.hpp"

namespace qdyn {

// One or more independent single-particle states sharing the same basis,
// stored column-wise with fixed occupation weights.
struct ElectronState {
  MatrixXc psi;   // n_orbitals x n_states
  VectorXd occ;   // occupation weight per state
  double t = 0.0;

  int n_states() const { return static_cast<int>(psi.cols()); }
};

struct StepMatrices {
  MatrixXc S, H;
};

// Provides the overlap and Hamiltonian at an arbitrary time. Interior times
// are requested when a step is subdivided, so providers must be continuous
// in t. midpoint_feedback signals that the matrices depend on the midpoint
// wavefunction (self-consistent providers); the prescribed-segment providers
// used by the driver are state-independent, so the fixed-point correction on
// the midpoint converges in a single application for them.
struct MatrixProvider {
  std::function<StepMatrices(double t)> at;
  bool midpoint_feedback = false;
  std::function<StepMatrices(double t, const MatrixXc& psi_mid)> at_feedback;
};

struct StepControls {
  double fixed_point_tol = 1e-12;
  int fixed_point_iters = 3;
  double reject_drift = 1e-6;  // per-step norm drift that triggers subdivision
  int max_halvings = 8;
};

struct StepReport {
  long solves = 0;
  long rejections = 0;
  double max_drift = 0.0;  // largest per-substep norm drift seen
};

// One implicit-midpoint (Cayley) step of the nonorthogonal TDSE
//   (S_m + i dt/(2 hbar) H_m) psi(t+dt) = (S_m - i dt/(2 hbar) H_m) psi(t),
// with S_m, H_m at t + dt/2. The conserved quantity with moving nuclei is
// the norm in the instantaneous metric, psi^dag S(t) psi, which stays fixed
// through the combination of i hbar dS/dt = H^dag - H (exact for the full
// coupling) and the time symmetry of the scheme. Drift is therefore measured
// between the endpoint metrics S(t) and S(t+dt); comparing both ends in the
// midpoint metric would misread the metric's own motion as error. A step
// whose drift exceeds controls.reject_drift is re-done as two half steps,
// up to max_halvings levels deep.
StepReport step(ElectronState& st, const MatrixProvider& provider, double dt,
                const StepControls& controls);

struct Schedule {
  double t_end = 0.0;
  double dt = 0.01;
};

// March st.t forward to schedule.t_end. The observer, if given, is called
// after every step with the current state and accumulated report.
using StepObserver = std::function<void(const ElectronState&, const StepReport&)>;
StepReport propagate(ElectronState& st, const MatrixProvider& provider, const Schedule& schedule,
                     const StepControls& controls, const StepObserver& observer = nullptr);

// Norm of each state in the metric S: diag(psi^dag S psi), real parts.
VectorXd state_norms(const ElectronState& st, const MatrixXc& S);

// Mulliken orbital populations summed over states with occupation weights:
// pop_l = sum_n occ_n Re( conj(psi_ln) (S psi_n)_l ).
VectorXd orbital_populations(const ElectronState& st, const MatrixXc& S);

}  // namespace qdyn
