#include "qdyn/branching.hpp"

#include <cmath>

namespace qdyn {

std::string to_string(BranchReason r) {
  switch (r) {
    case BranchReason::pulse_end:         return "pulse_end";
    case BranchReason::nonadiabatic_exit: return "nonadiabatic_exit";
    case BranchReason::manual:            return "manual";
  }
  return "?";
}

std::string to_string(CollapsePolicy p) {
  switch (p) {
    case CollapsePolicy::off:     return "off";
    case CollapsePolicy::argmax:  return "argmax";
    case CollapsePolicy::sampled: return "sampled";
    case CollapsePolicy::fixed:   return "fixed";
  }
  return "?";
}

CollapsePolicy collapse_policy_from_string(const std::string& s) {
  if (s == "off") return CollapsePolicy::off;
  if (s == "argmax") return CollapsePolicy::argmax;
  if (s == "sampled") return CollapsePolicy::sampled;
  if (s == "fixed") return CollapsePolicy::fixed;
  throw ConfigError("unknown collapse policy '" + s + "'");
}

std::optional<BranchReason> EventDetector::sample(double t, const VectorXd& pops, double rho_max,
                                                  bool pulse_over) {
  std::optional<BranchReason> fired;

  if (in_episode_) {
    if (rho_max < theta_) {
      in_episode_ = false;
      const double transfer = (pops - entry_pops_).cwiseAbs().maxCoeff();
      if (transfer > delta_pop_) fired = BranchReason::nonadiabatic_exit;
    }
  } else if (rho_max >= theta_) {
    in_episode_ = true;
    entry_pops_ = pops;
  }

  // The pulse end fires once, and an episode closing at the same sample wins.
  if (!fired && pulse_over && !pulse_reported_) {
    pulse_reported_ = true;
    fired = BranchReason::pulse_end;
  }
  return fired;
}

double draw_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

std::vector<std::pair<int, double>> enumerate_branches(const VectorXd& populations,
                                                       double threshold) {
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < populations.size(); ++i)
    if (populations[i] >= threshold) out.emplace_back(i, populations[i]);
  return out;
}

// Population below which a branch counts as empty and collapse is refused.
static constexpr double kEmptyBranch = 1e-12;

int choose_collapse_target(const VectorXd& populations, CollapsePolicy policy,
                           std::mt19937_64& rng, int fixed_index) {
  switch (policy) {
    case CollapsePolicy::off:
      return -1;
    case CollapsePolicy::fixed:
      if (fixed_index < 0 || fixed_index >= populations.size())
        throw ConfigError("fixed collapse index out of range");
      if (populations[fixed_index] <= kEmptyBranch)
        throw ConfigError("fixed collapse index " + std::to_string(fixed_index) +
                          " holds no population");
      return fixed_index;
    case CollapsePolicy::argmax: {
      int idx = 0;
      populations.maxCoeff(&idx);
      return idx;
    }
    case CollapsePolicy::sampled: {
      const double total = populations.sum();
      if (total <= 0.0) throw NumericalError("sampled collapse with no population");
      const double u = draw_uniform(rng) * total;
      double acc = 0.0;
      int last_live = -1;
      for (int i = 0; i < populations.size(); ++i) {
        if (populations[i] <= kEmptyBranch) continue;  // never land on an empty branch
        last_live = i;
        acc += populations[i];
        if (u < acc) return i;
      }
      if (last_live < 0) throw NumericalError("sampled collapse with no populated branch");
      return last_live;
    }
  }
  return -1;
}

std::vector<int> choose_collapse_targets(const AdiabaticSnapshot& snap, const ElectronState& st,
                                         CollapsePolicy policy, std::mt19937_64& rng,
                                         int fixed_index) {
  std::vector<int> targets(st.n_states(), -1);
  if (policy == CollapsePolicy::off) return targets;
  const MatrixXc c = project(snap, st.psi.topRows(snap.states.rows()));
  for (int n = 0; n < st.n_states(); ++n) {
    const VectorXd pops = c.col(n).cwiseAbs2();
    targets[n] = choose_collapse_target(pops, policy, rng, fixed_index);
  }
  return targets;
}

void collapse_onto(ElectronState& st, const AdiabaticSnapshot& snap,
                   const std::vector<int>& targets, const MatrixXc& s_current) {
  if (static_cast<int>(targets.size()) != st.n_states())
    throw ConfigError("one collapse target per electron state required");
  const int bound = snap.states.rows();
  const MatrixXc c = project(snap, st.psi.topRows(bound));
  for (int n = 0; n < st.n_states(); ++n) {
    const int target = targets[n];
    if (target < 0 || target >= snap.n_states())
      throw ConfigError("collapse target out of range");
    // Keep the projection phase so the collapsed state joins continuously.
    Complex ph = c(target, n);
    const double mag = std::abs(ph);
    if (mag * mag <= kEmptyBranch)
      throw NumericalError("state " + std::to_string(n) + " holds no population on adiabatic state " +
                           std::to_string(target) + "; refusing to collapse onto an empty branch");
    ph /= mag;
    st.psi.col(n).head(bound) = ph * snap.states.col(target).cast<Complex>();
    if (st.psi.rows() > bound) st.psi.col(n).tail(st.psi.rows() - bound).setZero();
    // Renormalize in the live metric (relevant if collapse happens mid-pulse).
    const Complex nrm =
        st.psi.col(n).head(bound).dot(s_current.topLeftCorner(bound, bound) * st.psi.col(n).head(bound));
    st.psi.col(n).head(bound) /= std::sqrt(nrm.real());
  }
}

}  // namespace qdyn
