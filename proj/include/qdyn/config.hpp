#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdyn/adiabatic.hpp"
#include "qdyn/branching.hpp"
#include "qdyn/coupling.hpp"
#include "qdyn/field.hpp"
#include "qdyn/geometry.hpp"
#include "qdyn/nuclei.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

inline constexpr int kSchemaVersion = 1;

struct InitialStateSpec {
  std::vector<int> indices{0};        // adiabatic states to occupy at t = 0
  std::vector<double> occupations{1.0};
};

struct IntegratorConfig {
  double dt = 0.5 * 0.041341373335182;  // electronic step, au (default 0.5 as)
  int substep_ratio = 10;               // electronic substeps per nuclear step
  double t_end = 0.0;                   // au
};

struct ToleranceConfig {
  double norm_warn = 1e-8;      // frame-level norm deviation worth flagging
  double step_reject = 1e-6;    // per-step drift that triggers subdivision
  double fixed_point = 1e-12;
  int fixed_point_iters = 3;
  int max_halvings = 8;
  double atom_overlap = 0.1;          // bohr, hard abort below this
  double wavelength_factor = 100.0;   // dipole-limit guard ratio
  double eps_degenerate = 1e-8;       // hartree
};

struct BranchingConfig {
  CollapsePolicy policy = CollapsePolicy::off;
  int fixed_index = 0;
  std::uint64_t seed = 1;
  double delta_pop = 0.01;   // population transfer that closes an episode
  double threshold = 0.05;   // population floor for enumerated branches
  std::vector<double> manual_times;  // au; forced decision points
};

struct AdiabaticConfig {
  int stride = 10;  // nuclear steps between analysis samples
  double theta = 0.1;
  MomentumModel model = MomentumModel::projected;
};

struct IonizationConfig {
  bool enabled = false;
  double alpha = 0.0;  // uniform per-orbital coupling
  std::map<std::string, std::vector<double>> alpha_per_species;  // overrides
  double p0_sink = 1.0;
};

struct OutputConfig {
  int stride = 10;  // nuclear steps between recorded frames
  std::string record = "trajectory.jsonl";
  bool binary = false;
  std::string checkpoint_dir = ".";
};

struct RunConfig {
  SystemGeometry geometry;
  RepulsionTable repulsion;
  PulseSpec pulse;
  bool waive_wavelength_guard = false;
  CouplingOptions coupling;
  IntegratorConfig integrator;
  ToleranceConfig tolerances;
  InitialStateSpec initial_state;
  BranchingConfig branching;
  AdiabaticConfig adiabatic;
  IonizationConfig ionization;
  OutputConfig output;

  void validate() const;
};

// Strict parser: unknown keys anywhere are a ConfigError, as are missing
// required fields, wrong types, and physically inconsistent values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

// Round-trip: the echo embedded in records and checkpoints.
nlohmann::json config_to_json(const RunConfig& c);

}  // namespace qdyn
