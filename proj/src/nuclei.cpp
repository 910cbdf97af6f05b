#include "qdyn/nuclei.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

namespace qdyn {

double RepulsionSpec::energy(double r) const {
  if (r >= r_cut) return 0.0;
  const double e_rc = b * std::exp(-lambda * r_cut);
  // Shifted-force form: both U and dU/dr reach zero at r_cut.
  return b * std::exp(-lambda * r) - e_rc + lambda * e_rc * (r - r_cut);
}

double RepulsionSpec::dU(double r) const {
  if (r >= r_cut) return 0.0;
  const double e_rc = b * std::exp(-lambda * r_cut);
  return -lambda * b * std::exp(-lambda * r) + lambda * e_rc;
}

const RepulsionSpec* RepulsionTable::find(int sa, int sb) const {
  auto it = pairs.find({std::min(sa, sb), std::max(sa, sb)});
  return it == pairs.end() ? nullptr : &it->second;
}

double RepulsionTable::energy(const SystemGeometry& g) const {
  double e = 0.0;
  for (int a = 0; a < g.n_atoms(); ++a)
    for (int b = a + 1; b < g.n_atoms(); ++b) {
      const RepulsionSpec* spec = find(g.atom_species[a], g.atom_species[b]);
      if (spec) e += spec->energy((g.x[a] - g.x[b]).norm());
    }
  return e;
}

VectorXd RepulsionTable::gradient(const SystemGeometry& g) const {
  VectorXd grad = VectorXd::Zero(3 * g.n_atoms());
  for (int a = 0; a < g.n_atoms(); ++a)
    for (int b = a + 1; b < g.n_atoms(); ++b) {
      const RepulsionSpec* spec = find(g.atom_species[a], g.atom_species[b]);
      if (!spec) continue;
      const Vec3 d = g.x[a] - g.x[b];
      const double r = d.norm();
      if (r >= spec->r_cut) continue;
      const Vec3 dg = spec->dU(r) * d / r;
      grad.segment<3>(3 * a) += dg;
      grad.segment<3>(3 * b) -= dg;
    }
  return grad;
}

VectorXd repulsion_gradient(const SystemGeometry& g, const RepulsionTable& rep) {
  return rep.gradient(g);
}

VectorXd ehrenfest_forces(const SystemGeometry& g, const BasisRoster& roster,
                          const ElectronState& st, const Vec3& a_bar, const Vec3& e_bar,
                          const CouplingOptions& opt, const RepulsionTable& rep) {
  const int n_coords = 3 * g.n_atoms();
  VectorXd f = -rep.gradient(g);

  const MatrixSet m = assemble(g, roster, a_bar, e_bar, opt);
  // W = S^{-1} H psi replaces i hbar d/dt psi through the equation of motion.
  const MatrixXc w = Eigen::PartialPivLU<MatrixXc>(m.S).solve(m.H * st.psi);

  for (int a = 0; a < g.n_atoms(); ++a) {
    for (int axis = 0; axis < 3; ++axis) {
      const DerivativePair d = assemble_derivatives(g, roster, a_bar, e_bar, opt, a, axis);
      double acc = 0.0;
      for (int n = 0; n < st.n_states(); ++n) {
        const Complex th = st.psi.col(n).dot(d.dH * st.psi.col(n));  // psi^dag dH psi
        const Complex ts = st.psi.col(n).dot(d.dS * w.col(n));       // psi^dag dS W
        acc += st.occ[n] * (th.real() - ts.real());
      }
      f[3 * a + axis] -= acc;
    }
  }
  return f;
}

void half_kick(SystemGeometry& g, const VectorXd& forces, double dt) {
  for (int a = 0; a < g.n_atoms(); ++a)
    g.v[a] += (0.5 * dt / g.mass(a)) * forces.segment<3>(3 * a);
}

void drift(SystemGeometry& g, double dt) {
  for (int a = 0; a < g.n_atoms(); ++a) g.x[a] += dt * g.v[a];
}

void check_atom_overlap(const SystemGeometry& g, double min_dist) {
  if (g.n_atoms() < 2) return;
  const double r = g.min_pair_distance();
  if (r < min_dist) {
    std::ostringstream msg;
    msg << "atoms closer than " << min_dist << " bohr (min distance " << r
        << "); geometry has collapsed";
    throw NumericalError(msg.str());
  }
}

}  // namespace qdyn
