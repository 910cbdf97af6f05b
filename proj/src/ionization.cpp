#include "qdyn/ionization.hpp"

#include <cmath>

namespace qdyn {

void extend_matrices(MatrixSet& m, const SinkSpec& sink, double a_norm) {
  if (!sink.enabled) return;
  const int n = static_cast<int>(m.S.rows());
  auto grow = [n](MatrixXc& mat) {
    mat.conservativeResize(n + 1, n + 1);
    mat.row(n).setZero();
    mat.col(n).setZero();
  };
  grow(m.S);
  grow(m.H);
  for (int k = 0; k < 3; ++k) {
    grow(m.mu[k]);
    grow(m.p[k]);
    grow(m.P[k]);
  }
  m.S(n, n) = 1.0;  // sink orthonormal to every bound orbital
  // One-way coupling: the sink row drains the bound space, the sink column
  // stays zero so nothing flows back, and the sink has no energy of its own.
  for (int l = 0; l < n; ++l) m.H(n, l) = sink.coupling(sink.alpha[l], a_norm);
}

void extend_state(ElectronState& st) {
  st.psi.conservativeResize(st.psi.rows() + 1, Eigen::NoChange);
  st.psi.row(st.psi.rows() - 1).setZero();
}

void IonizationLedger::reset(int n_orbitals) {
  q_ion = 0.0;
  channels = VectorXd::Zero(n_orbitals);
  q_state.resize(0);
}

void IonizationLedger::absorb(ElectronState& st, const VectorXc& coupling_row) {
  const int bound = static_cast<int>(st.psi.rows()) - 1;
  if (q_state.size() != st.n_states()) q_state = VectorXd::Zero(st.n_states());

  for (int n = 0; n < st.n_states(); ++n) {
    const Complex a = st.psi(bound, n);
    st.psi(bound, n) = 0.0;
    const double q_old = q_state[n];
    const double q_new = std::min(q_old + std::norm(a), 1.0);
    const double dq = q_new - q_old;
    if (dq == 0.0) continue;

    // Split the booked probability over source orbitals by their share of
    // the inbound flux |c_l psi_l|^2; once the coupling is back to zero the
    // flux carries no information, so fall back to the bound populations.
    VectorXd w(bound);
    for (int l = 0; l < bound; ++l) w[l] = std::norm(coupling_row[l] * st.psi(l, n));
    if (w.sum() <= 0.0)
      for (int l = 0; l < bound; ++l) w[l] = std::norm(st.psi(l, n));
    if (w.sum() <= 0.0) w.setOnes();
    channels += (st.occ[n] * dq / w.sum()) * w;

    q_state[n] = q_new;
    // Bound norm tracks 1 - q exactly: the one-way coupling leaves the bound
    // block's own evolution norm-conserving, so the loss is booked here.
    const double scale = q_old < 1.0 ? std::sqrt((1.0 - q_new) / (1.0 - q_old)) : 0.0;
    st.psi.col(n).head(bound) *= scale;
  }

  q_ion = 0.0;
  for (int n = 0; n < st.n_states(); ++n) q_ion += st.occ[n] * q_state[n];
}

}  // namespace qdyn
