#include "qdyn/analyze.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <sstream>

#include "qdyn/config.hpp"

namespace qdyn {

namespace {

void check_schema(const TrajectoryRecord& rec) {
  if (!rec.header.is_object() || !rec.header.contains("schema_version"))
    throw ConfigError("analyze: record has no schema version");
  const auto& v = rec.header["schema_version"];
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ConfigError("analyze: record schema version " + v.dump() +
                      " does not match this build (" +
                      std::to_string(kSchemaVersion) + ")");
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string join_csv(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

// One row per frame: t followed by the chosen per-frame values.
std::string series(const TrajectoryRecord& rec, const std::vector<std::string>& names,
                   const std::function<std::vector<double>(const Frame&)>& pick) {
  std::ostringstream os;
  os << "t";
  for (const auto& n : names) os << '\t' << n;
  os << '\n';
  for (const auto& f : rec.frames) {
    os << fmt(f.t);
    for (double v : pick(f)) os << '\t' << fmt(v);
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> indexed_names(const std::string& stem, size_t n) {
  std::vector<std::string> names;
  for (size_t i = 0; i < n; ++i) names.push_back(stem + std::to_string(i));
  return names;
}

int parse_index(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("analyze: bad " + what + " '" + s + "'");
  }
}

// Energy of the state carrying persistent label `want` in this frame.
double energy_of_label(const Frame& f, int want) {
  for (size_t i = 0; i < f.labels.size(); ++i)
    if (f.labels[i] == want) return f.energies[i];
  throw ConfigError("analyze: label " + std::to_string(want) + " not present");
}

std::string events_table(const TrajectoryRecord& rec) {
  std::ostringstream os;
  os << "event\tt\tstep\treason\tpolicy\tchosen\ttargets\teligible\tpopulations\tcheckpoint\n";
  for (size_t i = 0; i < rec.events.size(); ++i) {
    const BranchEvent& e = rec.events[i];
    os << i << '\t' << fmt(e.t) << '\t' << e.step << '\t' << to_string(e.reason) << '\t'
       << to_string(e.policy) << '\t' << e.chosen << '\t' << join_csv(e.targets) << '\t'
       << join_csv(e.eligible) << '\t';
    for (int s = 0; s < e.populations.size(); ++s) {
      if (s) os << ',';
      os << fmt(e.populations[s]);
    }
    os << '\t' << e.checkpoint << '\n';
  }
  return os.str();
}

std::string summary_table(const TrajectoryRecord& rec) {
  const RunSummary& s = rec.summary;
  std::ostringstream os;
  os << "t_final\t" << fmt(s.t_final) << '\n';
  os << "absorbed_energy\t" << fmt(s.absorbed_energy) << '\n';
  os << "q_ion\t" << fmt(s.q_ion) << '\n';
  os << "steps\t" << s.steps << '\n';
  os << "solves\t" << s.solves << '\n';
  os << "rejections\t" << s.rejections << '\n';
  os << "max_step_drift\t" << fmt(s.max_step_drift) << '\n';
  os << "frames\t" << rec.frames.size() << '\n';
  os << "events\t" << rec.events.size() << '\n';
  os << "final_adiabatic_pop";
  for (double p : s.final_adiabatic_pop) os << '\t' << fmt(p);
  os << '\n';
  os << "final_norms";
  for (double p : s.final_norms) os << '\t' << fmt(p);
  os << '\n';
  return os.str();
}

}  // namespace

std::string analyze_query(const TrajectoryRecord& rec, const std::string& query) {
  check_schema(rec);

  std::vector<std::string> parts;
  {
    std::istringstream is(query);
    std::string piece;
    while (std::getline(is, piece, ':')) parts.push_back(piece);
  }
  if (parts.empty()) throw ConfigError("analyze: empty query");
  const std::string& name = parts[0];
  const size_t n_frames = rec.frames.size();

  if (name == "summary" && parts.size() == 1) return summary_table(rec);

  if (name == "norms" && parts.size() == 1)
    return series(rec, indexed_names("norm", n_frames ? rec.frames[0].norms.size() : 0),
                  [](const Frame& f) { return f.norms; });

  if (name == "populations" && parts.size() == 1)
    return series(
        rec, indexed_names("pop", n_frames ? rec.frames[0].adiabatic_pop.size() : 0),
        [](const Frame& f) { return f.adiabatic_pop; });

  if (name == "orbital_populations" && parts.size() == 1)
    return series(
        rec, indexed_names("orb", n_frames ? rec.frames[0].orbital_pop.size() : 0),
        [](const Frame& f) { return f.orbital_pop; });

  if (name == "energies" && parts.size() == 1)
    return series(rec, indexed_names("E", n_frames ? rec.frames[0].energies.size() : 0),
                  [](const Frame& f) { return f.energies; });

  if (name == "energy" && parts.size() == 1)
    return series(rec, {"e_el", "e_kin", "e_rep", "e_tot"}, [](const Frame& f) {
      return std::vector<double>{f.e_el, f.e_kin, f.e_rep, f.e_tot};
    });

  if (name == "field" && parts.size() == 1)
    return series(rec, {"a_norm", "e_norm"}, [](const Frame& f) {
      return std::vector<double>{f.a_norm, f.e_norm};
    });

  if (name == "sink" && parts.size() == 1)
    return series(rec, {"q_ion"},
                  [](const Frame& f) { return std::vector<double>{f.q_ion}; });

  if (name == "gap" && parts.size() == 3) {
    const int i = parse_index(parts[1], "state label");
    const int j = parse_index(parts[2], "state label");
    return series(rec, {"gap_" + std::to_string(i) + "_" + std::to_string(j)},
                  [i, j](const Frame& f) {
                    return std::vector<double>{energy_of_label(f, j) -
                                               energy_of_label(f, i)};
                  });
  }

  if (name == "population" && parts.size() == 2) {
    const int i = parse_index(parts[1], "state label");
    return series(rec, {"pop" + std::to_string(i)}, [i](const Frame& f) {
      if (i >= static_cast<int>(f.adiabatic_pop.size()))
        throw ConfigError("analyze: label " + std::to_string(i) + " not present");
      return std::vector<double>{f.adiabatic_pop[i]};
    });
  }

  if (name == "absorbed_energy" && parts.size() == 1)
    return fmt(rec.summary.absorbed_energy) + "\n";

  if (name == "events" && parts.size() == 1) return events_table(rec);

  throw ConfigError("analyze: unknown query '" + query + "'");
}

std::string branch_manifest(const TrajectoryRecord& rec) {
  check_schema(rec);
  std::ostringstream os;
  os << "event\tt\tstep\treason\tbranch\tstate\tweight\tchosen\tcheckpoint\n";
  for (size_t i = 0; i < rec.events.size(); ++i) {
    const BranchEvent& e = rec.events[i];
    for (size_t b = 0; b < e.eligible.size(); ++b) {
      const int state = e.eligible[b];
      const double weight =
          state < e.populations.size() ? e.populations[state] : 0.0;
      os << i << '\t' << fmt(e.t) << '\t' << e.step << '\t' << to_string(e.reason)
         << '\t' << b << '\t' << state << '\t' << fmt(weight) << '\t' << e.chosen
         << '\t' << e.checkpoint << '\n';
    }
    if (e.eligible.empty())
      os << i << '\t' << fmt(e.t) << '\t' << e.step << '\t' << to_string(e.reason)
         << "\t-\t-\t-\t" << e.chosen << '\t' << e.checkpoint << '\n';
  }
  return os.str();
}

}  // namespace qdyn
