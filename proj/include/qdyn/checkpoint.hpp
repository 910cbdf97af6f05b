#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

#include "qdyn/config.hpp"
#include "qdyn/ionization.hpp"
#include "qdyn/propagator.hpp"

namespace qdyn {

// Everything needed to continue a run bit-for-bit: full precision state,
// integer step index (times are recomputed as t0 + k dt, never accumulated),
// the RNG stream, and the config echo.
struct Checkpoint {
  long step = 0;        // nuclear step index at the checkpoint
  double t0 = 0.0;      // run start time
  ElectronState state;  // psi may include the sink row when ionization is on
  SystemGeometry geometry_snapshot;  // positions and velocities only
  double q_ion = 0.0;
  VectorXd channels;
  VectorXd q_state;
  std::string rng_state;  // serialized mt19937_64 stream
  int event_index = -1;   // which event this checkpoint belongs to, -1 if none
  nlohmann::json event;   // event payload (populations, eligible branches)
  nlohmann::json config;  // full config echo
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string serialize_rng(const std::mt19937_64& rng);
std::mt19937_64 deserialize_rng(const std::string& s);

}  // namespace qdyn
