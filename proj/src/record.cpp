#include "qdyn/record.hpp"

#include <cstdint>
#include <cstring>
#include <sstream>

namespace qdyn {

namespace {

using nlohmann::json;

// Line 2 of a binary record; everything after it is tagged blocks.
constexpr const char* kBinaryMagic = "#qdyn-binary-v1";

std::vector<double> as_dvec(const json& v) { return v.get<std::vector<double>>(); }

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("record: truncated binary block");
  return v;
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  if (!v.empty())
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, std::uint32_t n) {
  std::vector<double> v(n);
  if (n) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ConfigError("record: truncated binary block");
  }
  return v;
}

void write_json_block(std::ofstream& out, char tag, const json& j) {
  const std::string text = j.dump();
  write_pod(out, tag);
  write_pod(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json read_json_block(std::istream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ConfigError("record: truncated binary block");
  return json::parse(text);
}

int total_frame_doubles(const Frame& f) {
  return static_cast<int>(f.x.size() + f.v.size() + f.norms.size() +
                          f.orbital_pop.size() + f.adiabatic_pop.size() +
                          f.energies.size()) +
         8;  // e_el, e_kin, e_rep, e_tot, a_norm, e_norm, rho_max, q_ion
}

}  // namespace

nlohmann::json frame_to_json(const Frame& f) {
  json j;
  j["kind"] = "frame";
  j["step"] = f.step;
  j["t"] = f.t;
  j["x"] = f.x;
  j["v"] = f.v;
  j["norms"] = f.norms;
  j["orbital_pop"] = f.orbital_pop;
  j["adiabatic_pop"] = f.adiabatic_pop;
  j["energies"] = f.energies;
  j["labels"] = f.labels;
  j["e_el"] = f.e_el;
  j["e_kin"] = f.e_kin;
  j["e_rep"] = f.e_rep;
  j["e_tot"] = f.e_tot;
  j["a_norm"] = f.a_norm;
  j["e_norm"] = f.e_norm;
  j["rho_max"] = f.rho_max;
  j["q_ion"] = f.q_ion;
  j["warnings"] = f.warnings;
  return j;
}

Frame frame_from_json(const nlohmann::json& j) {
  Frame f;
  f.step = j.at("step").get<long>();
  f.t = j.at("t").get<double>();
  f.x = as_dvec(j.at("x"));
  f.v = as_dvec(j.at("v"));
  f.norms = as_dvec(j.at("norms"));
  f.orbital_pop = as_dvec(j.at("orbital_pop"));
  f.adiabatic_pop = as_dvec(j.at("adiabatic_pop"));
  f.energies = as_dvec(j.at("energies"));
  f.labels = j.at("labels").get<std::vector<int>>();
  f.e_el = j.at("e_el").get<double>();
  f.e_kin = j.at("e_kin").get<double>();
  f.e_rep = j.at("e_rep").get<double>();
  f.e_tot = j.at("e_tot").get<double>();
  f.a_norm = j.at("a_norm").get<double>();
  f.e_norm = j.at("e_norm").get<double>();
  f.rho_max = j.at("rho_max").get<double>();
  f.q_ion = j.at("q_ion").get<double>();
  f.warnings = j.at("warnings").get<std::vector<std::string>>();
  return f;
}

nlohmann::json event_to_json(const BranchEvent& e) {
  json j;
  j["kind"] = "event";
  j["t"] = e.t;
  j["step"] = e.step;
  j["reason"] = to_string(e.reason);
  j["policy"] = to_string(e.policy);
  std::vector<double> pops(e.populations.data(), e.populations.data() + e.populations.size());
  j["populations"] = pops;
  j["eligible"] = e.eligible;
  j["targets"] = e.targets;
  j["chosen"] = e.chosen;
  j["state_hash"] = e.state_hash;
  j["checkpoint"] = e.checkpoint;
  return j;
}

BranchEvent event_from_json(const nlohmann::json& j) {
  BranchEvent e;
  e.t = j.at("t").get<double>();
  e.step = j.at("step").get<long>();
  const std::string reason = j.at("reason").get<std::string>();
  if (reason == "pulse_end")
    e.reason = BranchReason::pulse_end;
  else if (reason == "nonadiabatic_exit")
    e.reason = BranchReason::nonadiabatic_exit;
  else if (reason == "manual")
    e.reason = BranchReason::manual;
  else
    throw ConfigError("record: unknown branch reason '" + reason + "'");
  e.policy = collapse_policy_from_string(j.at("policy").get<std::string>());
  const auto pops = as_dvec(j.at("populations"));
  e.populations = Eigen::Map<const VectorXd>(pops.data(), static_cast<long>(pops.size()));
  e.eligible = j.at("eligible").get<std::vector<int>>();
  e.targets = j.at("targets").get<std::vector<int>>();
  e.chosen = j.at("chosen").get<int>();
  e.state_hash = j.at("state_hash").get<std::uint64_t>();
  e.checkpoint = j.at("checkpoint").get<std::string>();
  return e;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  json j;
  j["kind"] = "summary";
  j["t_final"] = s.t_final;
  j["absorbed_energy"] = s.absorbed_energy;
  j["q_ion"] = s.q_ion;
  j["final_adiabatic_pop"] = s.final_adiabatic_pop;
  j["final_norms"] = s.final_norms;
  j["steps"] = s.steps;
  j["solves"] = s.solves;
  j["rejections"] = s.rejections;
  j["max_step_drift"] = s.max_step_drift;
  return j;
}

RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.t_final = j.at("t_final").get<double>();
  s.absorbed_energy = j.at("absorbed_energy").get<double>();
  s.q_ion = j.at("q_ion").get<double>();
  s.final_adiabatic_pop = as_dvec(j.at("final_adiabatic_pop"));
  s.final_norms = as_dvec(j.at("final_norms"));
  s.steps = j.at("steps").get<long>();
  s.solves = j.at("solves").get<long>();
  s.rejections = j.at("rejections").get<long>();
  s.max_step_drift = j.at("max_step_drift").get<double>();
  return s;
}

RecordWriter::RecordWriter(const std::string& path, bool binary,
                           const nlohmann::json& header)
    : out_(path, std::ios::binary), binary_(binary) {
  if (!out_) throw ConfigError("record: cannot open '" + path + "' for writing");
  out_ << header.dump() << '\n';
  if (binary_) out_ << kBinaryMagic << '\n';
}

RecordWriter::~RecordWriter() { close(); }

void RecordWriter::close() {
  if (out_.is_open()) {
    out_.flush();
    out_.close();
  }
}

void RecordWriter::frame(const Frame& f) {
  if (!binary_) {
    out_ << frame_to_json(f).dump() << '\n';
    return;
  }
  const int nd = total_frame_doubles(f);
  if (frame_doubles_ == 0) {
    frame_doubles_ = nd;
    // Shape block: the fixed per-frame vector lengths, written once.
    write_pod(out_, 'D');
    write_pod(out_, static_cast<std::uint32_t>(f.x.size()));
    write_pod(out_, static_cast<std::uint32_t>(f.v.size()));
    write_pod(out_, static_cast<std::uint32_t>(f.norms.size()));
    write_pod(out_, static_cast<std::uint32_t>(f.orbital_pop.size()));
    write_pod(out_, static_cast<std::uint32_t>(f.adiabatic_pop.size()));
    write_pod(out_, static_cast<std::uint32_t>(f.energies.size()));
    write_pod(out_, static_cast<std::uint32_t>(f.labels.size()));
  } else if (nd != frame_doubles_) {
    throw ConfigError("record: frame payload width changed mid-run");
  }
  write_pod(out_, 'F');
  write_pod(out_, static_cast<std::int64_t>(f.step));
  write_pod(out_, f.t);
  write_doubles(out_, f.x);
  write_doubles(out_, f.v);
  write_doubles(out_, f.norms);
  write_doubles(out_, f.orbital_pop);
  write_doubles(out_, f.adiabatic_pop);
  write_doubles(out_, f.energies);
  for (int l : f.labels) write_pod(out_, static_cast<std::int32_t>(l));
  write_pod(out_, f.e_el);
  write_pod(out_, f.e_kin);
  write_pod(out_, f.e_rep);
  write_pod(out_, f.e_tot);
  write_pod(out_, f.a_norm);
  write_pod(out_, f.e_norm);
  write_pod(out_, f.rho_max);
  write_pod(out_, f.q_ion);
  write_pod(out_, static_cast<std::uint32_t>(f.warnings.size()));
  for (const auto& w : f.warnings) {
    write_pod(out_, static_cast<std::uint32_t>(w.size()));
    out_.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
}

void RecordWriter::event(const BranchEvent& e) {
  if (!binary_)
    out_ << event_to_json(e).dump() << '\n';
  else
    write_json_block(out_, 'E', event_to_json(e));
}

void RecordWriter::summary(const RunSummary& s) {
  if (!binary_)
    out_ << summary_to_json(s).dump() << '\n';
  else
    write_json_block(out_, 'S', summary_to_json(s));
  out_.flush();
}

namespace {

TrajectoryRecord read_binary_body(std::istream& in, nlohmann::json header) {
  TrajectoryRecord rec;
  rec.header = std::move(header);
  std::uint32_t shape[7] = {0, 0, 0, 0, 0, 0, 0};
  bool have_shape = false;
  char tag;
  while (in.read(&tag, 1)) {
    switch (tag) {
      case 'D': {
        for (auto& s : shape) s = read_pod<std::uint32_t>(in);
        have_shape = true;
        break;
      }
      case 'F': {
        if (!have_shape) throw ConfigError("record: frame before shape block");
        Frame f;
        f.step = static_cast<long>(read_pod<std::int64_t>(in));
        f.t = read_pod<double>(in);
        f.x = read_doubles(in, shape[0]);
        f.v = read_doubles(in, shape[1]);
        f.norms = read_doubles(in, shape[2]);
        f.orbital_pop = read_doubles(in, shape[3]);
        f.adiabatic_pop = read_doubles(in, shape[4]);
        f.energies = read_doubles(in, shape[5]);
        f.labels.resize(shape[6]);
        for (auto& l : f.labels) l = read_pod<std::int32_t>(in);
        f.e_el = read_pod<double>(in);
        f.e_kin = read_pod<double>(in);
        f.e_rep = read_pod<double>(in);
        f.e_tot = read_pod<double>(in);
        f.a_norm = read_pod<double>(in);
        f.e_norm = read_pod<double>(in);
        f.rho_max = read_pod<double>(in);
        f.q_ion = read_pod<double>(in);
        const auto nwarn = read_pod<std::uint32_t>(in);
        for (std::uint32_t i = 0; i < nwarn; ++i) {
          const auto len = read_pod<std::uint32_t>(in);
          std::string w(len, '\0');
          in.read(w.data(), static_cast<std::streamsize>(len));
          if (!in) throw ConfigError("record: truncated binary block");
          f.warnings.push_back(std::move(w));
        }
        rec.frames.push_back(std::move(f));
        break;
      }
      case 'E':
        rec.events.push_back(event_from_json(read_json_block(in)));
        break;
      case 'S':
        rec.summary = summary_from_json(read_json_block(in));
        break;
      default:
        throw ConfigError("record: unknown binary block tag");
    }
  }
  return rec;
}

}  // namespace

TrajectoryRecord read_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("record: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("record: '" + path + "' is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("record: '" + path + "': bad header: " + e.what());
  }

  // Peek the second line: the binary magic, or the first JSONL record.
  const auto body_start = in.tellg();
  if (std::getline(in, line) && line == kBinaryMagic) return read_binary_body(in, header);

  in.clear();
  in.seekg(body_start);
  TrajectoryRecord rec;
  rec.header = std::move(header);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("record: '" + path + "': bad line: " + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "frame")
      rec.frames.push_back(frame_from_json(j));
    else if (kind == "event")
      rec.events.push_back(event_from_json(j));
    else if (kind == "summary")
      rec.summary = summary_from_json(j);
    else
      throw ConfigError("record: '" + path + "': unknown record kind '" + kind + "'");
  }
  return rec;
}

}  // namespace qdyn
