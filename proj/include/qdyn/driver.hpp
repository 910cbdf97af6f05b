#pragma once

#include <optional>
#include <string>

#include "qdyn/checkpoint.hpp"
#include "qdyn/config.hpp"
#include "qdyn/record.hpp"

namespace qdyn {

struct RunOptions {
  // Override the record path in the config (empty keeps it).
  std::string record_path;
  // Suppress file output entirely (in-memory record only), used by tests.
  bool no_files = false;
};

// Execute a full coupled run from t0 = 0. Writes the trajectory record and
// any event checkpoints, and returns the in-memory record.
TrajectoryRecord run(const RunConfig& config, const RunOptions& opts = {});

// Continue from a checkpoint. branch_index, if given, collapses onto that
// entry of the checkpointed event's eligible-branch list before resuming;
// otherwise the stored electronic state continues unchanged.
TrajectoryRecord resume(const Checkpoint& ckpt, std::optional<int> branch_index,
                        const RunOptions& opts = {});

}  // namespace qdyn
