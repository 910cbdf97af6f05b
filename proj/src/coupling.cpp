#include "qdyn/coupling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "qdyn/units.hpp"

namespace qdyn {

std::string to_string(CouplingMode m) {
  switch (m) {
    case CouplingMode::full:                 return "full";
    case CouplingMode::peierls_only:         return "peierls_only";
    case CouplingMode::generalized_peierls:  return "generalized_peierls";
  }
  return "?";
}

CouplingMode coupling_mode_from_string(const std::string& s) {
  if (s == "full") return CouplingMode::full;
  if (s == "peierls_only") return CouplingMode::peierls_only;
  if (s == "generalized_peierls") return CouplingMode::generalized_peierls;
  throw ConfigError("unknown coupling mode '" + s + "'");
}

namespace {

constexpr double kQc = units::q_electron / units::speed_of_light;  // q/c

// Velocity entering the velocity coupling of element (bra, ket).
Vec3 coupling_velocity(const SystemGeometry& g, const CouplingOptions& opt, int atom_bra,
                       int atom_ket) {
  if (opt.velocity_average) return 0.5 * (g.v[atom_bra] + g.v[atom_ket]);
  return g.v[atom_ket];
}

// Site phase of the generalized Peierls substitution,
// phi_l = (1/hbar) [(q/c) A + m_e v_l] . X_l.
double site_phase(const Vec3& a_bar, const Vec3& x, const Vec3& v) {
  return (kQc * a_bar + units::electron_mass * v).dot(x) / units::hbar;
}

}  // namespace

MatrixSet assemble(const SystemGeometry& g, const BasisRoster& roster, const Vec3& a_bar,
                   const Vec3& e_bar, const CouplingOptions& opt) {
  const int n = roster.n_orbitals();
  MatrixSet m;
  m.S = MatrixXc::Zero(n, n);
  m.H = MatrixXc::Zero(n, n);
  for (int k = 0; k < 3; ++k) {
    m.mu[k] = MatrixXc::Zero(n, n);
    m.p[k] = MatrixXc::Zero(n, n);
    m.P[k] = MatrixXc::Zero(n, n);
  }

  for (int lb = 0; lb < n; ++lb) {
    const int ab = roster.atom(lb);
    const OrbitalShell& sb = roster.shell(g, lb);
    for (int lk = 0; lk < n; ++lk) {
      const int ak = roster.atom(lk);
      const OrbitalShell& sk = roster.shell(g, lk);

      double s0, h0;
      Vec3 mu0, w;  // p0 = i w
      Complex phase;

      if (ab == ak) {
        // Same atom: shells of distinct kinds are exactly orthogonal, the
        // field phase cancels, and H0 is the bare orbital energy.
        s0 = (lb == lk) ? 1.0 : 0.0;
        h0 = (lb == lk) ? sb.epsilon : 0.0;
        const Vec3 zero = Vec3::Zero();
        mu0 = dipole_mu0(sb, sk, zero);
        w = momentum_p0_im(sb, sk, zero);
        phase = 1.0;
      } else {
        const Vec3 d = g.x[ab] - g.x[ak];
        if (d.norm() > pair_r_cut(sb, sk)) continue;
        s0 = overlap_s0(sb, sk, d);
        h0 = hamiltonian_h0(sb, sk, d, std::sqrt(g.spec(ab).hueckel_k * g.spec(ak).hueckel_k));
        mu0 = dipole_mu0(sb, sk, d);
        w = momentum_p0_im(sb, sk, d);
        const double theta = units::q_electron * a_bar.dot(d) / (units::hbar * units::speed_of_light);
        phase = std::exp(iunit * theta);
      }

      const Complex s = s0 * phase;
      m.S(lb, lk) = s;
      for (int k = 0; k < 3; ++k) {
        m.mu[k](lb, lk) = mu0[k] * phase;
        m.p[k](lb, lk) = iunit * w[k] * phase;
        m.P[k](lb, lk) = m.p[k](lb, lk) + kQc * a_bar[k] * s;
      }

      switch (opt.mode) {
        case CouplingMode::full: {
          Complex c = h0;
          if (opt.dipole) c -= e_bar.dot(mu0);
          if (opt.velocity) {
            const Vec3 vel = coupling_velocity(g, opt, ab, ak);
            c -= vel.dot(w) * iunit + kQc * vel.dot(a_bar) * s0;
          }
          m.H(lb, lk) = c * phase;
          break;
        }
        case CouplingMode::peierls_only:
          m.H(lb, lk) = h0 * phase;
          break;
        case CouplingMode::generalized_peierls: {
          const double dphi = site_phase(a_bar, g.x[ab], g.v[ab]) -
                              site_phase(a_bar, g.x[ak], g.v[ak]);
          m.H(lb, lk) = (ab == ak) ? Complex(h0) : h0 * std::exp(iunit * dphi);
          break;
        }
      }
    }
  }
  return m;
}

DerivativePair assemble_derivatives(const SystemGeometry& g, const BasisRoster& roster,
                                    const Vec3& a_bar, const Vec3& e_bar,
                                    const CouplingOptions& opt, int atom, int axis) {
  const int n = roster.n_orbitals();
  DerivativePair out;
  out.dS = MatrixXc::Zero(n, n);
  out.dH = MatrixXc::Zero(n, n);

  for (int lb = 0; lb < n; ++lb) {
    const int ab = roster.atom(lb);
    const OrbitalShell& sb = roster.shell(g, lb);
    for (int lk = 0; lk < n; ++lk) {
      const int ak = roster.atom(lk);
      if (ab == ak) continue;  // on-site elements are translation invariant
      const bool hits_bra = (atom == ab), hits_ket = (atom == ak);
      if (!hits_bra && !hits_ket) continue;
      const double sigma = hits_bra ? 1.0 : -1.0;  // d(d)/dX_atom

      const OrbitalShell& sk = roster.shell(g, lk);
      const Vec3 d = g.x[ab] - g.x[ak];
      if (d.norm() > pair_r_cut(sb, sk)) continue;

      const double s0 = overlap_s0(sb, sk, d);
      const Vec3 ds0 = overlap_ds0(sb, sk, d);
      const double k_eff = std::sqrt(g.spec(ab).hueckel_k * g.spec(ak).hueckel_k);
      const double h0 = hamiltonian_h0(sb, sk, d, k_eff);
      const Vec3 dh0 = hamiltonian_dh0(sb, sk, d, k_eff);
      const double theta =
          units::q_electron * a_bar.dot(d) / (units::hbar * units::speed_of_light);
      const Complex phase = std::exp(iunit * theta);
      const double dtheta = units::q_electron * a_bar[axis] / (units::hbar * units::speed_of_light);

      out.dS(lb, lk) += sigma * phase * (ds0[axis] + iunit * dtheta * s0);

      switch (opt.mode) {
        case CouplingMode::full: {
          const Vec3 mu0 = dipole_mu0(sb, sk, d);
          const Mat3 dmu0 = dipole_dmu0(sb, sk, d);
          const Vec3 w = momentum_p0_im(sb, sk, d);
          const Mat3 dw = momentum_dp0_im(sb, sk, d);
          Complex c = h0;
          Complex dc = dh0[axis];
          if (opt.dipole) {
            c -= e_bar.dot(mu0);
            dc -= e_bar.dot(dmu0.col(axis));
          }
          if (opt.velocity) {
            const Vec3 vel = coupling_velocity(g, opt, ab, ak);
            c -= vel.dot(w) * iunit + kQc * vel.dot(a_bar) * s0;
            dc -= vel.dot(dw.col(axis)) * iunit + kQc * vel.dot(a_bar) * ds0[axis];
          }
          out.dH(lb, lk) += sigma * phase * (dc + iunit * dtheta * c);
          break;
        }
        case CouplingMode::peierls_only:
          out.dH(lb, lk) += sigma * phase * (dh0[axis] + iunit * dtheta * h0);
          break;
        case CouplingMode::generalized_peierls: {
          const double dphi = site_phase(a_bar, g.x[ab], g.v[ab]) -
                              site_phase(a_bar, g.x[ak], g.v[ak]);
          const Complex gp_phase = std::exp(iunit * dphi);
          // d(dphi)/dX_atom: the site factor of whichever site moves.
          const Vec3 vsite = hits_bra ? g.v[ab] : g.v[ak];
          const double dphi_dx =
              sigma * (kQc * a_bar[axis] + units::electron_mass * vsite[axis]) / units::hbar;
          out.dH(lb, lk) += gp_phase * (sigma * dh0[axis] + iunit * dphi_dx * h0);
          break;
        }
      }
    }
  }
  return out;
}

void apply_gauge_shift(MatrixXc& psi, const SystemGeometry& g, const BasisRoster& roster,
                       const Vec3& delta_a) {
  for (int l = 0; l < psi.rows(); ++l) {
    const double phi = units::q_electron * delta_a.dot(g.x[roster.atom(l)]) /
                       (units::hbar * units::speed_of_light);
    psi.row(l) *= std::exp(iunit * phi);
  }
}

void validate_overlap(const MatrixXc& S) {
  // LLT alone can still "succeed" on a numerically singular overlap (two
  // basis functions nearly coincident leave an eigenvalue ~ machine eps), so
  // gate on the actual spectrum: the propagator solves linear systems in S
  // every step and a condition number beyond ~1e12 poisons them.
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(S, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo > 0.0 && lo >= 1e-12 * hi) return;
  std::ostringstream msg;
  msg << "overlap matrix is numerically singular (smallest eigenvalue " << lo
      << ", largest " << hi << "); basis is overcomplete at this geometry";
  throw NumericalError(msg.str());
}

}  // namespace qdyn
