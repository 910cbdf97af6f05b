#pragma once

#include <array>
#include <string>

#include "qdyn/field.hpp"
#include "qdyn/geometry.hpp"
#include "qdyn/two_center.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// How the EM field and the nuclear motion enter the electronic Hamiltonian.
//
// full:      H = H0 e^{i theta} - E.mu e^{i theta} - Xdot.(p e^{i theta} + (q/c) A S)
// peierls:   H = H0 e^{i theta} (overlap still phased)
// gen. Peierls: every H0(l',l) is dressed with site phases
//            exp(i/hbar [(q/c) A + m_e Xdot_site] . X_site) on bra and ket;
//            the dipole and velocity terms are absorbed into the phase.
// theta(l',l) = q A.(X_l' - X_l) / (hbar c) in all modes, and S = S0 e^{i theta}
// in all modes.
enum class CouplingMode { full, peierls_only, generalized_peierls };

std::string to_string(CouplingMode m);
CouplingMode coupling_mode_from_string(const std::string& s);

struct CouplingOptions {
  CouplingMode mode = CouplingMode::full;
  bool dipole = true;    // -E.mu term (full mode only)
  bool velocity = true;  // -Xdot.(p + (q/c) A S) term (full mode only)
  // Velocity entering the coupling: ket-atom velocity (default) keeps
  // i hbar dS/dt = H^dag - H an exact identity; the symmetric average is
  // retained for comparison runs and breaks that identity at O(dS/dt).
  bool velocity_average = false;
};

struct MatrixSet {
  MatrixXc S, H;
  std::array<MatrixXc, 3> mu;  // phased dipole, moment about the ket center
  std::array<MatrixXc, 3> p;   // phased kinetic momentum
  std::array<MatrixXc, 3> P;   // p + (q/c) A S, the velocity-coupling matrix
};

// Assemble all coupling matrices for the given geometry, field values, and
// nuclear velocities (taken from g.v). Matrix indices follow the roster.
MatrixSet assemble(const SystemGeometry& g, const BasisRoster& roster, const Vec3& a_bar,
                   const Vec3& e_bar, const CouplingOptions& opt);

// Analytic derivatives of S and H with respect to one nuclear coordinate
// (atom, axis), at fixed velocities and field. Used by the Ehrenfest forces
// and the nonadiabatic couplings.
struct DerivativePair {
  MatrixXc dS, dH;
};
DerivativePair assemble_derivatives(const SystemGeometry& g, const BasisRoster& roster,
                                    const Vec3& a_bar, const Vec3& e_bar,
                                    const CouplingOptions& opt, int atom, int axis);

// Multiply amplitudes by the site phases e^{i q delta_a . X_l / (hbar c)}
// that map a solution to its gauge-shifted counterpart.
void apply_gauge_shift(MatrixXc& psi, const SystemGeometry& g, const BasisRoster& roster,
                       const Vec3& delta_a);

// Throws NumericalError with the smallest eigenvalue in the message if the
// overlap matrix is not positive definite (overcomplete geometry).
void validate_overlap(const MatrixXc& S);

}  // namespace qdyn
