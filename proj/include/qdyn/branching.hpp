#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qdyn/adiabatic.hpp"
#include "qdyn/propagator.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// Reduced-Ehrenfest surface collapse: at well-separated decision points the
// mean-field wavefunction is replaced by a single adiabatic state, and the
// discarded alternatives are preserved as resumable branches.

enum class BranchReason { pulse_end, nonadiabatic_exit, manual };
std::string to_string(BranchReason r);

enum class CollapsePolicy { off, argmax, sampled, fixed };
std::string to_string(CollapsePolicy p);
CollapsePolicy collapse_policy_from_string(const std::string& s);

struct BranchEvent {
  double t = 0.0;
  long step = 0;
  BranchReason reason = BranchReason::pulse_end;
  CollapsePolicy policy = CollapsePolicy::off;
  VectorXd populations;        // occupation-weighted adiabatic populations at the event
  std::vector<int> eligible;   // adiabatic states with population >= branch threshold
  std::vector<int> targets;    // per-electron-state collapse targets (empty if off)
  int chosen = -1;             // primary (first state's) target, -1 if policy off
  uint64_t state_hash = 0;     // hash of the post-collapse coefficients
  std::string checkpoint;      // file path written just before the collapse
};

// Watches the adiabaticity measure and populations between analysis samples
// and reports at most one event per completed nonadiabatic episode plus one
// at the end of the pulse.
class EventDetector {
 public:
  EventDetector(double theta, double delta_pop) : theta_(theta), delta_pop_(delta_pop) {}

  // Feed one analysis sample; pops are adiabatic populations under persistent
  // labels, rho_max the largest pairwise adiabaticity measure, pulse_over the
  // field envelope status. Returns a reason when a decision point closes.
  std::optional<BranchReason> sample(double t, const VectorXd& pops, double rho_max,
                                     bool pulse_over);

  bool in_episode() const { return in_episode_; }

 private:
  double theta_, delta_pop_;
  bool in_episode_ = false;
  bool pulse_reported_ = false;
  VectorXd entry_pops_;
};

// Deterministic uniform draw in [0,1) from the engine's raw 64-bit output;
// avoids std::uniform_real_distribution, whose mapping differs across
// standard libraries.
double draw_uniform(std::mt19937_64& rng);

// Branches worth replaying: adiabatic states whose population meets the
// threshold, each paired with its population as the branch weight.
std::vector<std::pair<int, double>> enumerate_branches(const VectorXd& populations,
                                                       double threshold = 0.05);

// Pick one collapse target from a population distribution. sampled draws
// proportionally to population using the supplied engine; fixed uses
// fixed_index. Returns -1 when policy is off. Refuses unpopulated targets.
int choose_collapse_target(const VectorXd& populations, CollapsePolicy policy,
                           std::mt19937_64& rng, int fixed_index);

// Per-electron-state targets: the policy is applied to each occupied state's
// own projection distribution, so argmax sends every orbital to its dominant
// adiabatic component. fixed sends all states to the same index.
std::vector<int> choose_collapse_targets(const AdiabaticSnapshot& snap, const ElectronState& st,
                                         CollapsePolicy policy, std::mt19937_64& rng,
                                         int fixed_index);

// Replace each electron state with its target adiabatic state, carrying over
// the projection phase so the collapse is continuous in the S0 metric, then
// renormalize in the current overlap metric. Distinct targets stay mutually
// S0-orthonormal because they are eigenvectors. Throws if a target holds no
// population (never collapse onto an empty branch).
void collapse_onto(ElectronState& st, const AdiabaticSnapshot& snap,
                   const std::vector<int>& targets, const MatrixXc& s_current);

}  // namespace qdyn
