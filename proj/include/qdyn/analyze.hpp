#pragma once

#include <string>
#include <vector>

#include "qdyn/record.hpp"

namespace qdyn {

// Post-processing queries over a trajectory record. Each query renders a
// TSV table (or a scalar line) to the returned string; unknown query names
// raise ConfigError. Supported:
//   summary                 key findings of the run
//   norms                   t, per-state norms
//   populations             t, adiabatic populations (persistent labels)
//   orbital_populations     t, Mulliken orbital populations
//   energies                t, adiabatic energies
//   energy                  t, electronic/kinetic/repulsion/total energy
//   field                   t, |A|, |E|
//   gap:I:J                 t, E_J - E_I
//   population:I            t, adiabatic population of label I
//   absorbed_energy         scalar, E_tot(final) - E_tot(initial)
//   sink                    t, ionized charge
//   events                  table of branch events
std::string analyze_query(const TrajectoryRecord& rec, const std::string& query);

// The branch manifest: events with their eligible branches, chosen targets,
// and checkpoint paths.
std::string branch_manifest(const TrajectoryRecord& rec);

}  // namespace qdyn
