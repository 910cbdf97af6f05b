#include "qdyn/adiabatic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

namespace qdyn {

AdiabaticSnapshot eigensolve(const MatrixXd& h0, const MatrixXd& s0) {
  if (h0.rows() == 0 || h0.rows() != h0.cols() || s0.rows() != h0.rows() ||
      s0.cols() != h0.cols())
    throw ConfigError("eigensolve needs square matrices of matching nonzero size");
  // The generalized solver Cholesky-reduces s0 without reliably reporting
  // indefiniteness, so gate on the overlap spectrum explicitly.
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> chk(s0, Eigen::EigenvaluesOnly);
    const double lo = chk.eigenvalues().minCoeff(), hi = chk.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || lo < 1e-12 * hi)
      throw NumericalError("overlap matrix not safely positive definite (eigenvalue range " +
                           std::to_string(lo) + " .. " + std::to_string(hi) +
                           "); cannot form adiabatic states");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(h0, s0,
                                                        Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError("generalized eigensolve failed to converge");
  AdiabaticSnapshot snap;
  snap.energies = es.eigenvalues();
  snap.states = es.eigenvectors();
  snap.h0 = h0;
  snap.s0 = s0;
  // Deterministic sign: largest-|.| component of each column positive.
  for (int i = 0; i < snap.states.cols(); ++i) {
    int idx = 0;
    snap.states.col(i).cwiseAbs().maxCoeff(&idx);
    if (snap.states(idx, i) < 0.0) snap.states.col(i) = -snap.states.col(i);
  }
  return snap;
}

AdiabaticSnapshot eigensolve_geometry(const SystemGeometry& g, const BasisRoster& roster) {
  CouplingOptions field_free;
  field_free.mode = CouplingMode::peierls_only;
  SystemGeometry frozen = g;
  for (auto& vel : frozen.v) vel = Vec3::Zero();
  const MatrixSet m = assemble(frozen, roster, Vec3::Zero(), Vec3::Zero(), field_free);
  return eigensolve(m.H.real(), m.S.real());
}

MatrixXc project(const AdiabaticSnapshot& snap, const MatrixXc& psi) {
  return snap.states.transpose() * snap.s0 * psi;
}

VectorXd adiabatic_populations(const AdiabaticSnapshot& snap, const ElectronState& st) {
  const MatrixXc c = project(snap, st.psi);
  VectorXd pop = VectorXd::Zero(snap.n_states());
  for (int n = 0; n < st.n_states(); ++n) pop += st.occ[n] * c.col(n).cwiseAbs2();
  return pop;
}

CouplingResult nonadiabatic_coupling(const SystemGeometry& g, const BasisRoster& roster,
                                     const AdiabaticSnapshot& snap, int i, int j,
                                     double eps_degenerate) {
  CouplingResult res;
  res.gap = snap.energies[j] - snap.energies[i];
  if (std::abs(res.gap) < eps_degenerate)
    throw DegeneratePair("eigenstates " + std::to_string(i) + " and " + std::to_string(j) +
                             " are degenerate within the guard; derivative coupling undefined",
                         res.gap);
  const int n_coords = 3 * g.n_atoms();
  res.g = VectorXd::Zero(n_coords);

  CouplingOptions field_free;
  field_free.mode = CouplingMode::peierls_only;
  SystemGeometry frozen = g;
  for (auto& vel : frozen.v) vel = Vec3::Zero();

  const VectorXd psi_i = snap.states.col(i), psi_j = snap.states.col(j);
  for (int a = 0; a < g.n_atoms(); ++a)
    for (int axis = 0; axis < 3; ++axis) {
      const DerivativePair d =
          assemble_derivatives(frozen, roster, Vec3::Zero(), Vec3::Zero(), field_free, a, axis);
      // Field-free derivative matrices are real.
      const MatrixXd dh = d.dH.real(), ds = d.dS.real();
      res.g[3 * a + axis] = psi_i.dot((dh - snap.energies[j] * ds) * psi_j);
    }
  return res;
}

double adiabaticity_rho(const CouplingResult& c, const SystemGeometry& g,
                        const AdiabaticityOptions& opt) {
  if (std::abs(c.gap) < opt.eps_degenerate) return std::numeric_limits<double>::infinity();
  const double gnorm = c.g.norm();
  // A vanishing coupling vector means no motion can drive this pair.
  if (gnorm == 0.0) return 0.0;
  double e_kin = 0.0, m_sum = 0.0;
  for (int a = 0; a < g.n_atoms(); ++a) {
    e_kin += 0.5 * g.mass(a) * g.v[a].squaredNorm();
    m_sum += g.mass(a);
  }
  // Nuclei exactly at rest count as adiabatic across any finite gap; the
  // formula's P -> 0 divergence is only meaningful for moving nuclei.
  if (e_kin == 0.0 && opt.p_floor == 0.0) return 0.0;
  double p = 0.0;
  if (opt.model == MomentumModel::projected) {
    double pg = 0.0;
    for (int a = 0; a < g.n_atoms(); ++a)
      for (int axis = 0; axis < 3; ++axis)
        pg += g.mass(a) * g.v[a][axis] * c.g[3 * a + axis];
    p = std::abs(pg) / gnorm;
  } else {
    // Direction-blind momentum scale from the mean kinetic energy per atom.
    const double m_mean = m_sum / std::max(1, g.n_atoms());
    const double e_mean = e_kin / std::max(1, g.n_atoms());
    p = std::sqrt(2.0 * m_mean * e_mean);
  }
  p = std::max(p, opt.p_floor);
  // Moving nuclei with no momentum along the coupling direction and no floor:
  // the nuclear wavelength along that direction is unbounded, so the pair is
  // flagged rather than excused.
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return gnorm * (units::hbar / p) / std::abs(c.gap);
}

MatrixXd adiabaticity_matrix(const SystemGeometry& g, const BasisRoster& roster,
                             const AdiabaticSnapshot& snap, const AdiabaticityOptions& opt) {
  const int n = snap.n_states();
  MatrixXd rho = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      // Pairs inside the guard are strongly coupled by fiat; the quotient
      // itself is not computable there.
      if (std::abs(snap.energies[j] - snap.energies[i]) < opt.eps_degenerate) {
        rho(i, j) = rho(j, i) = std::numeric_limits<double>::infinity();
        continue;
      }
      const CouplingResult c = nonadiabatic_coupling(g, roster, snap, i, j, opt.eps_degenerate);
      rho(i, j) = rho(j, i) = adiabaticity_rho(c, g, opt);
    }
  return rho;
}

std::vector<std::pair<int, int>> nonadiabatic_pairs(const MatrixXd& rho, double theta) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < rho.rows(); ++i)
    for (int j = i + 1; j < rho.cols(); ++j)
      if (rho(i, j) >= theta) pairs.emplace_back(i, j);
  return pairs;
}

std::vector<int> match_labels(const AdiabaticSnapshot& prev, const AdiabaticSnapshot& now,
                              const std::vector<int>& prev_labels) {
  const int n = now.n_states();
  // Overlap in the current metric; rows previous states, columns new ones.
  const MatrixXd o = (prev.states.transpose() * now.s0 * now.states).cwiseAbs();
  std::vector<int> labels(n, -1);
  std::vector<bool> used_prev(n, false), used_now(n, false);
  // Greedy best-match: repeatedly take the largest remaining overlap.
  for (int pass = 0; pass < n; ++pass) {
    int bi = -1, bj = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (used_prev[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (used_now[j]) continue;
        if (o(i, j) > best) {
          best = o(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    labels[bj] = prev_labels[bi];
    used_prev[bi] = true;
    used_now[bj] = true;
  }
  return labels;
}

}  // namespace qdyn
