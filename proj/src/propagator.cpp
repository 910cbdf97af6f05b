#include "qdyn/propagator.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "qdyn/units.hpp"

namespace qdyn {

namespace {

VectorXd norms_in_metric(const MatrixXc& psi, const MatrixXc& S) {
  return (psi.adjoint() * S * psi).diagonal().real();
}

// One Cayley application at a fixed midpoint. Returns the solved state.
MatrixXc cayley_solve(const MatrixXc& S, const MatrixXc& H, const MatrixXc& psi, double dt,
                      long& solves) {
  const Complex lambda = iunit * dt / (2.0 * units::hbar);
  const MatrixXc a_plus = S + lambda * H;
  const MatrixXc rhs = (S - lambda * H) * psi;
  Eigen::PartialPivLU<MatrixXc> lu(a_plus);
  MatrixXc next = lu.solve(rhs);
  ++solves;
  const double resid = (a_plus * next - rhs).norm();
  if (!next.allFinite() || resid > 1e-8 * std::max(1.0, rhs.norm())) {
    std::ostringstream msg;
    msg << "implicit midpoint solve failed (residual " << resid
        << "); overlap-plus-Hamiltonian operator is numerically singular";
    throw NumericalError(msg.str());
  }
  return next;
}

// Attempt one step of size dt between known endpoint metrics; subdivide on
// norm drift. The recursion reuses the parent's midpoint overlap as the
// shared endpoint of the two halves, so only fresh midpoints are assembled.
void step_level(ElectronState& st, const MatrixProvider& provider, double dt,
                const MatrixXc& s_start, const MatrixXc& s_end, const StepControls& c,
                StepReport& rep, int level) {
  const double t_mid = st.t + 0.5 * dt;
  StepMatrices m = provider.at(t_mid);

  MatrixXc next = cayley_solve(m.S, m.H, st.psi, dt, rep.solves);

  // Fixed-point correction on the midpoint for self-consistent providers:
  // rebuild the midpoint operators from the predicted midpoint wavefunction
  // until the step stops changing. State-independent providers converge in
  // the single application above.
  if (provider.midpoint_feedback) {
    for (int it = 0; it < c.fixed_point_iters; ++it) {
      const MatrixXc psi_mid = 0.5 * (st.psi + next);
      StepMatrices fb = provider.at_feedback(t_mid, psi_mid);
      MatrixXc refined = cayley_solve(fb.S, fb.H, st.psi, dt, rep.solves);
      const double change = (refined - next).norm();
      next.swap(refined);
      m = std::move(fb);
      if (change < c.fixed_point_tol) break;
    }
  }

  const VectorXd n_before = norms_in_metric(st.psi, s_start);
  const VectorXd n_after = norms_in_metric(next, s_end);
  const double drift = (n_after - n_before).cwiseAbs().maxCoeff();

  if (drift > c.reject_drift) {
    ++rep.rejections;
    if (level >= c.max_halvings) {
      std::ostringstream msg;
      msg << "norm drift " << drift << " in one step still exceeds " << c.reject_drift
          << " after " << c.max_halvings << " halvings (dt " << dt << ")";
      throw NumericalError(msg.str());
    }
    const double t_start = st.t;
    step_level(st, provider, 0.5 * dt, s_start, m.S, c, rep, level + 1);
    st.t = t_start + 0.5 * dt;  // re-pin against accumulation
    step_level(st, provider, 0.5 * dt, m.S, s_end, c, rep, level + 1);
    st.t = t_start + dt;
    return;
  }

  rep.max_drift = std::max(rep.max_drift, drift);
  st.psi.swap(next);
  st.t += dt;
}

}  // namespace

StepReport step(ElectronState& st, const MatrixProvider& provider, double dt,
                const StepControls& controls) {
  StepReport rep;
  const MatrixXc s_start = provider.at(st.t).S;
  const MatrixXc s_end = provider.at(st.t + dt).S;
  step_level(st, provider, dt, s_start, s_end, controls, rep, 0);
  return rep;
}

StepReport propagate(ElectronState& st, const MatrixProvider& provider, const Schedule& schedule,
                     const StepControls& controls, const StepObserver& observer) {
  StepReport total;
  const double t0 = st.t;
  const double span = schedule.t_end - t0;
  const long n_steps = std::lround(span / schedule.dt);
  if (n_steps < 0) throw ConfigError("propagation schedule runs backward of its dt sign");
  MatrixXc s_carry = provider.at(t0).S;  // endpoint metric, reused across steps
  for (long k = 0; k < n_steps; ++k) {
    const double t_next = t0 + (k + 1) * schedule.dt;  // exact arithmetic sequence
    MatrixXc s_next = provider.at(t_next).S;
    StepReport r;
    step_level(st, provider, schedule.dt, s_carry, s_next, controls, r, 0);
    total.solves += r.solves;
    total.rejections += r.rejections;
    total.max_drift = std::max(total.max_drift, r.max_drift);
    st.t = t_next;
    s_carry.swap(s_next);
    if (observer) observer(st, total);
  }
  return total;
}

VectorXd state_norms(const ElectronState& st, const MatrixXc& S) {
  return norms_in_metric(st.psi, S);
}

VectorXd orbital_populations(const ElectronState& st, const MatrixXc& S) {
  const MatrixXc sp = S * st.psi;
  VectorXd pop = VectorXd::Zero(st.psi.rows());
  for (int n = 0; n < st.psi.cols(); ++n)
    pop += st.occ[n] * st.psi.col(n).conjugate().cwiseProduct(sp.col(n)).real();
  return pop;
}

}  // namespace qdyn
