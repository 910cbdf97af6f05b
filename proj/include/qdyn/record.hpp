#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdyn/branching.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// One sampled instant of the coupled dynamics.
struct Frame {
  long step = 0;
  double t = 0.0;
  std::vector<double> x, v;          // flattened nuclear coordinates
  std::vector<double> norms;         // per electron state, current S metric
  std::vector<double> orbital_pop;   // Mulliken, occupation-weighted
  std::vector<double> adiabatic_pop; // persistent labels
  std::vector<double> energies;      // adiabatic energies at this geometry
  std::vector<int> labels;           // persistent label of each sorted state
  double e_el = 0.0, e_kin = 0.0, e_rep = 0.0, e_tot = 0.0;
  double a_norm = 0.0, e_norm = 0.0; // field magnitudes
  double rho_max = 0.0;
  double q_ion = 0.0;
  std::vector<std::string> warnings;
};

struct RunSummary {
  double t_final = 0.0;
  double absorbed_energy = 0.0;
  double q_ion = 0.0;
  std::vector<double> final_adiabatic_pop;
  std::vector<double> final_norms;
  long steps = 0;
  long solves = 0;
  long rejections = 0;
  double max_step_drift = 0.0;
};

// Full in-memory trajectory; also the unit the writers serialize.
struct TrajectoryRecord {
  nlohmann::json header;
  std::vector<Frame> frames;
  std::vector<BranchEvent> events;
  RunSummary summary;
};

// JSON-lines writer: header line, then one line per frame/event, then the
// summary. Streams frames as they arrive so partial runs stay inspectable.
class RecordWriter {
 public:
  RecordWriter(const std::string& path, bool binary, const nlohmann::json& header);
  ~RecordWriter();
  void frame(const Frame& f);
  void event(const BranchEvent& e);
  void summary(const RunSummary& s);
  void close();

 private:
  std::ofstream out_;
  bool binary_;
  int frame_doubles_ = 0;  // payload width pinned by the first frame
};

// Reads either format back (binary is detected from the magic in line 2).
TrajectoryRecord read_record(const std::string& path);

nlohmann::json frame_to_json(const Frame& f);
Frame frame_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const BranchEvent& e);
BranchEvent event_from_json(const nlohmann::json& j);
nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);

}  // namespace qdyn
