#include "qdyn/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace qdyn {

namespace {

using nlohmann::json;

json complex_matrix_to_json(const MatrixXc& m) {
  json cols = json::array();
  for (int c = 0; c < m.cols(); ++c) {
    json col = json::array();
    for (int r = 0; r < m.rows(); ++r)
      col.push_back({m(r, c).real(), m(r, c).imag()});
    cols.push_back(std::move(col));
  }
  return cols;
}

MatrixXc complex_matrix_from_json(const json& j) {
  const int n_cols = static_cast<int>(j.size());
  const int n_rows = n_cols ? static_cast<int>(j[0].size()) : 0;
  MatrixXc m(n_rows, n_cols);
  for (int c = 0; c < n_cols; ++c) {
    if (static_cast<int>(j[c].size()) != n_rows)
      throw ConfigError("checkpoint: ragged state matrix");
    for (int r = 0; r < n_rows; ++r)
      m(r, c) = Complex(j[c][r][0].get<double>(), j[c][r][1].get<double>());
  }
  return m;
}

std::vector<double> vecxd_to_std(const VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

VectorXd std_to_vecxd(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<long>(v.size()));
}

std::vector<double> flatten(const std::vector<Vec3>& xs) {
  std::vector<double> out;
  out.reserve(3 * xs.size());
  for (const auto& x : xs)
    for (int k = 0; k < 3; ++k) out.push_back(x[k]);
  return out;
}

std::vector<Vec3> unflatten(const std::vector<double>& flat) {
  if (flat.size() % 3 != 0) throw ConfigError("checkpoint: coordinate array not 3N long");
  std::vector<Vec3> out(flat.size() / 3);
  for (size_t a = 0; a < out.size(); ++a)
    out[a] = Vec3(flat[3 * a], flat[3 * a + 1], flat[3 * a + 2]);
  return out;
}

}  // namespace

std::string serialize_rng(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 deserialize_rng(const std::string& s) {
  std::mt19937_64 rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw ConfigError("checkpoint: malformed RNG state");
  return rng;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  json j;
  j["kind"] = "checkpoint";
  j["schema_version"] = kSchemaVersion;
  j["step"] = c.step;
  j["t0"] = c.t0;
  j["state"] = {{"t", c.state.t},
                {"occ", vecxd_to_std(c.state.occ)},
                {"psi", complex_matrix_to_json(c.state.psi)}};
  j["geometry"] = {{"x", flatten(c.geometry_snapshot.x)},
                   {"v", flatten(c.geometry_snapshot.v)}};
  j["q_ion"] = c.q_ion;
  j["channels"] = vecxd_to_std(c.channels);
  j["q_state"] = vecxd_to_std(c.q_state);
  j["rng"] = c.rng_state;
  j["event_index"] = c.event_index;
  j["event"] = c.event;
  j["config"] = c.config;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
  if (!out) throw ConfigError("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint: '" + path + "': " + e.what());
  }
  if (j.value("kind", "") != "checkpoint")
    throw ConfigError("checkpoint: '" + path + "' is not a checkpoint file");
  if (j.value("schema_version", -1) != kSchemaVersion)
    throw ConfigError("checkpoint: '" + path + "': schema version mismatch");

  Checkpoint c;
  c.step = j.at("step").get<long>();
  c.t0 = j.at("t0").get<double>();
  const json& st = j.at("state");
  c.state.t = st.at("t").get<double>();
  c.state.occ = std_to_vecxd(st.at("occ").get<std::vector<double>>());
  c.state.psi = complex_matrix_from_json(st.at("psi"));
  const json& g = j.at("geometry");
  c.geometry_snapshot.x = unflatten(g.at("x").get<std::vector<double>>());
  c.geometry_snapshot.v = unflatten(g.at("v").get<std::vector<double>>());
  c.q_ion = j.at("q_ion").get<double>();
  c.channels = std_to_vecxd(j.at("channels").get<std::vector<double>>());
  c.q_state = std_to_vecxd(j.at("q_state").get<std::vector<double>>());
  c.rng_state = j.at("rng").get<std::string>();
  c.event_index = j.at("event_index").get<int>();
  c.event = j.at("event");
  c.config = j.at("config");
  return c;
}

}  // namespace qdyn
