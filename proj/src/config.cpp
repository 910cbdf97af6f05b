#include "qdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

#include "qdyn/ionization.hpp"
#include "qdyn/units.hpp"

namespace qdyn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void require_object(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_num(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double get_num(const json& j, const std::string& where, const char* key) {
  const json* v = find(j, key);
  if (!v) fail(where, "missing required key '" + std::string(key) + "'");
  return as_num(*v, where + "." + key);
}

double get_num_or(const json& j, const std::string& where, const char* key, double def) {
  const json* v = find(j, key);
  return v ? as_num(*v, where + "." + key) : def;
}

int get_int_or(const json& j, const std::string& where, const char* key, int def) {
  const json* v = find(j, key);
  if (!v) return def;
  if (!v->is_number_integer()) fail(where + "." + key, "expected an integer");
  return v->get<int>();
}

bool get_bool_or(const json& j, const std::string& where, const char* key, bool def) {
  const json* v = find(j, key);
  if (!v) return def;
  if (!v->is_boolean()) fail(where + "." + key, "expected a boolean");
  return v->get<bool>();
}

std::string get_str(const json& j, const std::string& where, const char* key) {
  const json* v = find(j, key);
  if (!v) fail(where, "missing required key '" + std::string(key) + "'");
  if (!v->is_string()) fail(where + "." + key, "expected a string");
  return v->get<std::string>();
}

std::string get_str_or(const json& j, const std::string& where, const char* key,
                       const std::string& def) {
  const json* v = find(j, key);
  if (!v) return def;
  if (!v->is_string()) fail(where + "." + key, "expected a string");
  return v->get<std::string>();
}

Vec3 as_vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected an array of 3 numbers");
  Vec3 r;
  for (int i = 0; i < 3; ++i) r[i] = as_num(v[i], where);
  return r;
}

std::vector<double> as_dvec(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> r;
  r.reserve(v.size());
  for (const auto& e : v) r.push_back(as_num(e, where));
  return r;
}

std::vector<int> as_ivec(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of integers");
  std::vector<int> r;
  r.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(where, "expected an array of integers");
    r.push_back(e.get<int>());
  }
  return r;
}

// Exactly one of the two unit spellings may appear; the value comes back in au.
double exclusive(const json& j, const std::string& where, const char* key_au,
                 const char* key_alt, double alt_to_au, bool required, double def_au) {
  const json* a = find(j, key_au);
  const json* b = find(j, key_alt);
  if (a && b)
    fail(where, "give exactly one of '" + std::string(key_au) + "' and '" +
                    std::string(key_alt) + "'");
  if (a) return as_num(*a, where + "." + key_au);
  if (b) return as_num(*b, where + "." + key_alt) * alt_to_au;
  if (required)
    fail(where, "missing required key '" + std::string(key_au) + "' (or '" +
                    std::string(key_alt) + "')");
  return def_au;
}

std::vector<Species> parse_species(const json& j) {
  if (!j.is_array() || j.empty()) fail("species", "expected a nonempty array");
  std::vector<Species> out;
  std::set<std::string> names;
  for (const auto& sj : j) {
    const std::string where = "species[" + std::to_string(out.size()) + "]";
    require_object(sj, where, {"name", "mass_amu", "mass_me", "hueckel_k", "hueckel_K",
                               "shells"});
    Species sp;
    sp.name = get_str(sj, where, "name");
    if (!names.insert(sp.name).second) fail(where, "duplicate species name '" + sp.name + "'");
    sp.mass = exclusive(sj, where, "mass_me", "mass_amu", units::m_e_per_amu, true, 0.0);
    {
      const json* k1 = find(sj, "hueckel_k");
      const json* k2 = find(sj, "hueckel_K");
      if (k1 && k2) fail(where, "give 'hueckel_k' only once");
      if (k1) sp.hueckel_k = as_num(*k1, where + ".hueckel_k");
      if (k2) sp.hueckel_k = as_num(*k2, where + ".hueckel_K");
    }
    const json* shells = find(sj, "shells");
    if (!shells || !shells->is_array() || shells->empty())
      fail(where, "missing nonempty 'shells' array");
    for (const auto& shj : *shells) {
      const std::string sw = where + ".shells[" + std::to_string(sp.shells.size()) + "]";
      require_object(shj, sw, {"kind", "alpha", "epsilon"});
      OrbitalShell sh;
      sh.kind = shell_kind_from_string(get_str(shj, sw, "kind"));
      sh.alpha = get_num(shj, sw, "alpha");
      sh.epsilon = get_num(shj, sw, "epsilon");
      sp.shells.push_back(sh);
    }
    sp.validate();
    out.push_back(std::move(sp));
  }
  return out;
}

int species_index(const std::vector<Species>& species, const std::string& name,
                  const std::string& where) {
  for (size_t i = 0; i < species.size(); ++i)
    if (species[i].name == name) return static_cast<int>(i);
  fail(where, "unknown species '" + name + "'");
}

SystemGeometry parse_geometry(const json& j, std::vector<Species> species) {
  require_object(j, "geometry", {"units", "mobile", "atoms"});
  SystemGeometry g;
  g.species = std::move(species);
  g.mobile = get_bool_or(j, "geometry", "mobile", true);
  const std::string units_name = get_str_or(j, "geometry", "units", "bohr");
  double scale = 1.0;
  if (units_name == "angstrom")
    scale = units::bohr_per_angstrom;
  else if (units_name != "bohr")
    fail("geometry.units", "expected 'bohr' or 'angstrom'");
  const json* atoms = find(j, "atoms");
  if (!atoms || !atoms->is_array() || atoms->empty())
    fail("geometry", "missing nonempty 'atoms' array");
  for (const auto& aj : *atoms) {
    const std::string where = "geometry.atoms[" + std::to_string(g.x.size()) + "]";
    require_object(aj, where, {"species", "x", "v"});
    g.atom_species.push_back(
        species_index(g.species, get_str(aj, where, "species"), where));
    const json* xj = find(aj, "x");
    if (!xj) fail(where, "missing required key 'x'");
    g.x.push_back(scale * as_vec3(*xj, where + ".x"));
    const json* vj = find(aj, "v");
    g.v.push_back(vj ? as_vec3(*vj, where + ".v") : Vec3(Vec3::Zero()));
  }
  return g;
}

RepulsionTable parse_repulsion(const json& j, const std::vector<Species>& species) {
  RepulsionTable table;
  if (!j.is_array()) fail("repulsion", "expected an array of pair entries");
  int idx = 0;
  for (const auto& pj : j) {
    const std::string where = "repulsion[" + std::to_string(idx++) + "]";
    require_object(pj, where, {"species", "b", "lambda", "r_cut"});
    const json* pair = find(pj, "species");
    if (!pair || !pair->is_array() || pair->size() != 2 || !(*pair)[0].is_string() ||
        !(*pair)[1].is_string())
      fail(where, "'species' must be an array of two species names");
    const int sa = species_index(species, (*pair)[0].get<std::string>(), where);
    const int sb = species_index(species, (*pair)[1].get<std::string>(), where);
    RepulsionSpec spec;
    spec.b = get_num(pj, where, "b");
    spec.lambda = get_num(pj, where, "lambda");
    spec.r_cut = get_num_or(pj, where, "r_cut", 10.0);
    if (spec.lambda <= 0.0) fail(where, "'lambda' must be positive");
    if (spec.r_cut <= 0.0) fail(where, "'r_cut' must be positive");
    const auto key = std::minmax(sa, sb);
    if (!table.pairs.emplace(std::make_pair(key.first, key.second), spec).second)
      fail(where, "duplicate repulsion pair");
  }
  return table;
}

PulseSpec parse_pulse(const json& j) {
  require_object(j, "pulse",
                 {"amplitude", "intensity_wcm2", "omega_au", "omega_ev", "envelope",
                  "tau_fs", "tau_au", "t0_fs", "t0_au", "phase", "polarization",
                  "delta_a"});
  PulseSpec p;
  p.omega = exclusive(j, "pulse", "omega_au", "omega_ev",
                      1.0 / units::ev_per_hartree, true, 0.0);
  p.envelope = envelope_from_string(get_str_or(j, "pulse", "envelope", "sin2"));
  p.tau = exclusive(j, "pulse", "tau_au", "tau_fs", units::au_time_per_fs,
                    p.envelope != Envelope::constant, 0.0);
  {
    const json* amp = find(j, "amplitude");
    const json* inten = find(j, "intensity_wcm2");
    if (amp && inten) fail("pulse", "give exactly one of 'amplitude' and 'intensity_wcm2'");
    if (!amp && !inten)
      fail("pulse", "missing required key 'amplitude' (or 'intensity_wcm2')");
    p.a0 = amp ? as_num(*amp, "pulse.amplitude")
               : a0_from_intensity(as_num(*inten, "pulse.intensity_wcm2"), p.omega);
  }
  // Default center: sin2 support starts exactly at t = 0; constant has no
  // center; gaussian needs an explicit choice.
  double t0_def = 0.0;
  bool t0_required = false;
  if (p.envelope == Envelope::sin2)
    t0_def = 0.5 * p.tau;
  else if (p.envelope == Envelope::gaussian)
    t0_required = true;
  p.t0 = exclusive(j, "pulse", "t0_au", "t0_fs", units::au_time_per_fs, t0_required,
                   t0_def);
  p.phase = get_num_or(j, "pulse", "phase", 0.0);
  if (const json* pol = find(j, "polarization")) {
    Vec3 e = as_vec3(*pol, "pulse.polarization");
    const double n = e.norm();
    if (n < 1e-12) fail("pulse.polarization", "polarization vector is zero");
    p.pol = e / n;
  }
  if (const json* da = find(j, "delta_a")) p.delta_a = as_vec3(*da, "pulse.delta_a");
  p.validate();
  return p;
}

CouplingOptions parse_coupling(const json& j) {
  require_object(j, "coupling", {"mode", "dipole", "velocity", "velocity_average"});
  CouplingOptions c;
  c.mode = coupling_mode_from_string(get_str_or(j, "coupling", "mode", "full"));
  c.dipole = get_bool_or(j, "coupling", "dipole", true);
  c.velocity = get_bool_or(j, "coupling", "velocity", true);
  c.velocity_average = get_bool_or(j, "coupling", "velocity_average", false);
  return c;
}

IntegratorConfig parse_integrator(const json& j) {
  require_object(j, "integrator",
                 {"dt_au", "dt_as", "substep_ratio", "t_end_au", "t_end_fs"});
  IntegratorConfig c;
  c.dt = exclusive(j, "integrator", "dt_au", "dt_as", units::au_time_per_as, false,
                   c.dt);
  c.substep_ratio = get_int_or(j, "integrator", "substep_ratio", c.substep_ratio);
  c.t_end = exclusive(j, "integrator", "t_end_au", "t_end_fs", units::au_time_per_fs,
                      true, 0.0);
  return c;
}

ToleranceConfig parse_tolerances(const json& j) {
  require_object(j, "tolerances",
                 {"norm_warn", "step_reject", "fixed_point", "fixed_point_iters",
                  "max_halvings", "atom_overlap", "wavelength_factor",
                  "eps_degenerate"});
  ToleranceConfig c;
  c.norm_warn = get_num_or(j, "tolerances", "norm_warn", c.norm_warn);
  c.step_reject = get_num_or(j, "tolerances", "step_reject", c.step_reject);
  c.fixed_point = get_num_or(j, "tolerances", "fixed_point", c.fixed_point);
  c.fixed_point_iters =
      get_int_or(j, "tolerances", "fixed_point_iters", c.fixed_point_iters);
  c.max_halvings = get_int_or(j, "tolerances", "max_halvings", c.max_halvings);
  c.atom_overlap = get_num_or(j, "tolerances", "atom_overlap", c.atom_overlap);
  c.wavelength_factor =
      get_num_or(j, "tolerances", "wavelength_factor", c.wavelength_factor);
  c.eps_degenerate = get_num_or(j, "tolerances", "eps_degenerate", c.eps_degenerate);
  return c;
}

InitialStateSpec parse_initial_state(const json& j) {
  require_object(j, "initial_state", {"indices", "occupations"});
  InitialStateSpec c;
  if (const json* v = find(j, "indices")) c.indices = as_ivec(*v, "initial_state.indices");
  if (const json* v = find(j, "occupations"))
    c.occupations = as_dvec(*v, "initial_state.occupations");
  else
    c.occupations.assign(c.indices.size(), 1.0);
  return c;
}

BranchingConfig parse_branching(const json& j) {
  require_object(j, "branching",
                 {"policy", "fixed_index", "seed", "delta_pop", "threshold",
                  "manual_times_au", "manual_times_fs"});
  BranchingConfig c;
  c.policy = collapse_policy_from_string(get_str_or(j, "branching", "policy", "off"));
  c.fixed_index = get_int_or(j, "branching", "fixed_index", c.fixed_index);
  if (const json* v = find(j, "seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer())
      fail("branching.seed", "expected a nonnegative integer");
    c.seed = v->get<std::uint64_t>();
  }
  c.delta_pop = get_num_or(j, "branching", "delta_pop", c.delta_pop);
  c.threshold = get_num_or(j, "branching", "threshold", c.threshold);
  const json* au = find(j, "manual_times_au");
  const json* fs = find(j, "manual_times_fs");
  if (au && fs) fail("branching", "give exactly one of 'manual_times_au' and 'manual_times_fs'");
  if (au) c.manual_times = as_dvec(*au, "branching.manual_times_au");
  if (fs) {
    c.manual_times = as_dvec(*fs, "branching.manual_times_fs");
    for (double& t : c.manual_times) t *= units::au_time_per_fs;
  }
  std::sort(c.manual_times.begin(), c.manual_times.end());
  return c;
}

AdiabaticConfig parse_adiabatic(const json& j) {
  require_object(j, "adiabatic", {"stride", "theta", "momentum_model"});
  AdiabaticConfig c;
  c.stride = get_int_or(j, "adiabatic", "stride", c.stride);
  c.theta = get_num_or(j, "adiabatic", "theta", c.theta);
  const std::string m = get_str_or(j, "adiabatic", "momentum_model", "projected");
  if (m == "projected")
    c.model = MomentumModel::projected;
  else if (m == "kinetic")
    c.model = MomentumModel::kinetic;
  else
    fail("adiabatic.momentum_model", "expected 'projected' or 'kinetic'");
  return c;
}

IonizationConfig parse_ionization(const json& j) {
  require_object(j, "ionization", {"enabled", "alpha", "alpha_per_species", "p0_sink"});
  IonizationConfig c;
  c.enabled = get_bool_or(j, "ionization", "enabled", c.enabled);
  c.alpha = get_num_or(j, "ionization", "alpha", c.alpha);
  c.p0_sink = get_num_or(j, "ionization", "p0_sink", c.p0_sink);
  if (const json* v = find(j, "alpha_per_species")) {
    if (!v->is_object()) fail("ionization.alpha_per_species", "expected an object");
    for (const auto& item : v->items())
      c.alpha_per_species[item.key()] =
          as_dvec(item.value(), "ionization.alpha_per_species." + item.key());
  }
  return c;
}

OutputConfig parse_output(const json& j) {
  require_object(j, "output", {"stride", "record", "binary", "checkpoint_dir"});
  OutputConfig c;
  c.stride = get_int_or(j, "output", "stride", c.stride);
  c.record = get_str_or(j, "output", "record", c.record);
  c.binary = get_bool_or(j, "output", "binary", c.binary);
  c.checkpoint_dir = get_str_or(j, "output", "checkpoint_dir", c.checkpoint_dir);
  return c;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  require_object(j, "top level",
                 {"schema_version", "species", "geometry", "repulsion", "pulse",
                  "waive_wavelength_guard", "coupling", "integrator", "tolerances",
                  "initial_state", "branching", "adiabatic", "ionization", "output"});
  const json* ver = find(j, "schema_version");
  if (!ver) fail("top level", "missing required key 'schema_version'");
  if (!ver->is_number_integer() || ver->get<int>() != kSchemaVersion)
    fail("schema_version", "expected " + std::to_string(kSchemaVersion));

  RunConfig c;
  const json* species = find(j, "species");
  if (!species) fail("top level", "missing required key 'species'");
  const json* geometry = find(j, "geometry");
  if (!geometry) fail("top level", "missing required key 'geometry'");
  c.geometry = parse_geometry(*geometry, parse_species(*species));
  if (const json* v = find(j, "repulsion"))
    c.repulsion = parse_repulsion(*v, c.geometry.species);
  if (const json* v = find(j, "pulse")) c.pulse = parse_pulse(*v);
  c.waive_wavelength_guard =
      get_bool_or(j, "top level", "waive_wavelength_guard", false);
  if (const json* v = find(j, "coupling")) c.coupling = parse_coupling(*v);
  const json* integ = find(j, "integrator");
  if (!integ) fail("top level", "missing required key 'integrator'");
  c.integrator = parse_integrator(*integ);
  if (const json* v = find(j, "tolerances")) c.tolerances = parse_tolerances(*v);
  if (const json* v = find(j, "initial_state")) c.initial_state = parse_initial_state(*v);
  if (const json* v = find(j, "branching")) c.branching = parse_branching(*v);
  if (const json* v = find(j, "adiabatic")) c.adiabatic = parse_adiabatic(*v);
  if (const json* v = find(j, "ionization")) c.ionization = parse_ionization(*v);
  if (const json* v = find(j, "output")) c.output = parse_output(*v);

  c.validate();
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "': " + e.what());
  }
  return parse_config(j);
}

void RunConfig::validate() const {
  geometry.validate();
  if (pulse.a0 != 0.0 || pulse.delta_a.norm() != 0.0) pulse.validate();

  // Long-wavelength (dipole-limit) guard: the spatially uniform A(t) is only
  // defensible while the carrier wavelength dwarfs the system.
  if (pulse.a0 > 0.0 && !waive_wavelength_guard) {
    const double extent = geometry.max_pair_distance();
    const double lambda = pulse.wavelength();
    if (lambda < tolerances.wavelength_factor * extent)
      throw ConfigError(
          "config: pulse.omega: wavelength " + std::to_string(lambda) +
          " bohr is below " + std::to_string(tolerances.wavelength_factor) +
          " x system extent " + std::to_string(extent) +
          " bohr; set waive_wavelength_guard to proceed");
  }

  if (integrator.dt <= 0.0) throw ConfigError("config: integrator.dt_au: must be positive");
  if (integrator.substep_ratio < 1)
    throw ConfigError("config: integrator.substep_ratio: must be at least 1");
  if (integrator.t_end <= 0.0)
    throw ConfigError("config: integrator.t_end_au: must be positive");

  if (tolerances.norm_warn <= 0.0 || tolerances.step_reject <= 0.0 ||
      tolerances.fixed_point <= 0.0 || tolerances.eps_degenerate <= 0.0)
    throw ConfigError("config: tolerances: thresholds must be positive");
  if (tolerances.fixed_point_iters < 1 || tolerances.max_halvings < 0)
    throw ConfigError("config: tolerances: iteration counts out of range");
  if (tolerances.atom_overlap < 0.0)
    throw ConfigError("config: tolerances.atom_overlap: must be nonnegative");
  if (tolerances.wavelength_factor <= 0.0)
    throw ConfigError("config: tolerances.wavelength_factor: must be positive");

  int n_orb = 0;
  for (int a = 0; a < geometry.n_atoms(); ++a)
    n_orb += static_cast<int>(geometry.spec(a).shells.size());

  if (initial_state.indices.empty())
    throw ConfigError("config: initial_state.indices: must not be empty");
  if (initial_state.indices.size() != initial_state.occupations.size())
    throw ConfigError(
        "config: initial_state: indices and occupations must have equal length");
  std::set<int> seen;
  for (int i : initial_state.indices) {
    if (i < 0 || i >= n_orb)
      throw ConfigError("config: initial_state.indices: state " + std::to_string(i) +
                        " out of range [0, " + std::to_string(n_orb) + ")");
    if (!seen.insert(i).second)
      throw ConfigError("config: initial_state.indices: duplicate state " +
                        std::to_string(i));
  }
  for (double f : initial_state.occupations)
    if (f <= 0.0)
      throw ConfigError("config: initial_state.occupations: must be positive");

  if (branching.delta_pop < 0.0)
    throw ConfigError("config: branching.delta_pop: must be nonnegative");
  if (branching.threshold < 0.0 || branching.threshold > 1.0)
    throw ConfigError("config: branching.threshold: must lie in [0, 1]");
  if (branching.policy == CollapsePolicy::fixed &&
      (branching.fixed_index < 0 || branching.fixed_index >= n_orb))
    throw ConfigError("config: branching.fixed_index: out of range");

  if (adiabatic.stride < 1)
    throw ConfigError("config: adiabatic.stride: must be at least 1");
  if (adiabatic.theta <= 0.0)
    throw ConfigError("config: adiabatic.theta: must be positive");

  if (ionization.alpha < 0.0)
    throw ConfigError("config: ionization.alpha: must be nonnegative");
  if (ionization.p0_sink < 0.0)
    throw ConfigError("config: ionization.p0_sink: must be nonnegative");
  for (const auto& [name, vec] : ionization.alpha_per_species) {
    const Species* sp = nullptr;
    for (const auto& s : geometry.species)
      if (s.name == name) sp = &s;
    if (!sp)
      throw ConfigError("config: ionization.alpha_per_species: unknown species '" +
                        name + "'");
    if (vec.size() != sp->shells.size())
      throw ConfigError("config: ionization.alpha_per_species." + name + ": expected " +
                        std::to_string(sp->shells.size()) + " entries (one per shell)");
    for (double a : vec)
      if (a < 0.0)
        throw ConfigError("config: ionization.alpha_per_species." + name +
                          ": must be nonnegative");
  }

  if (output.stride < 1) throw ConfigError("config: output.stride: must be at least 1");
  if (output.record.empty())
    throw ConfigError("config: output.record: must not be empty");
}

nlohmann::json config_to_json(const RunConfig& c) {
  using nlohmann::json;
  json j;
  j["schema_version"] = kSchemaVersion;

  json species = json::array();
  for (const auto& sp : c.geometry.species) {
    json sj;
    sj["name"] = sp.name;
    sj["mass_me"] = sp.mass;
    sj["hueckel_k"] = sp.hueckel_k;
    json shells = json::array();
    for (const auto& sh : sp.shells)
      shells.push_back(
          {{"kind", to_string(sh.kind)}, {"alpha", sh.alpha}, {"epsilon", sh.epsilon}});
    sj["shells"] = std::move(shells);
    species.push_back(std::move(sj));
  }
  j["species"] = std::move(species);

  json atoms = json::array();
  for (int a = 0; a < c.geometry.n_atoms(); ++a) {
    json aj;
    aj["species"] = c.geometry.spec(a).name;
    aj["x"] = {c.geometry.x[a][0], c.geometry.x[a][1], c.geometry.x[a][2]};
    aj["v"] = {c.geometry.v[a][0], c.geometry.v[a][1], c.geometry.v[a][2]};
    atoms.push_back(std::move(aj));
  }
  j["geometry"] = {{"mobile", c.geometry.mobile}, {"atoms", std::move(atoms)}};

  json rep = json::array();
  for (const auto& [key, spec] : c.repulsion.pairs)
    rep.push_back({{"species",
                    {c.geometry.species[key.first].name,
                     c.geometry.species[key.second].name}},
                   {"b", spec.b},
                   {"lambda", spec.lambda},
                   {"r_cut", spec.r_cut}});
  j["repulsion"] = std::move(rep);

  j["pulse"] = {{"amplitude", c.pulse.a0},
                {"omega_au", c.pulse.omega},
                {"envelope", to_string(c.pulse.envelope)},
                {"tau_au", c.pulse.tau},
                {"t0_au", c.pulse.t0},
                {"phase", c.pulse.phase},
                {"polarization", {c.pulse.pol[0], c.pulse.pol[1], c.pulse.pol[2]}},
                {"delta_a",
                 {c.pulse.delta_a[0], c.pulse.delta_a[1], c.pulse.delta_a[2]}}};
  j["waive_wavelength_guard"] = c.waive_wavelength_guard;

  j["coupling"] = {{"mode", to_string(c.coupling.mode)},
                   {"dipole", c.coupling.dipole},
                   {"velocity", c.coupling.velocity},
                   {"velocity_average", c.coupling.velocity_average}};

  j["integrator"] = {{"dt_au", c.integrator.dt},
                     {"substep_ratio", c.integrator.substep_ratio},
                     {"t_end_au", c.integrator.t_end}};

  j["tolerances"] = {{"norm_warn", c.tolerances.norm_warn},
                     {"step_reject", c.tolerances.step_reject},
                     {"fixed_point", c.tolerances.fixed_point},
                     {"fixed_point_iters", c.tolerances.fixed_point_iters},
                     {"max_halvings", c.tolerances.max_halvings},
                     {"atom_overlap", c.tolerances.atom_overlap},
                     {"wavelength_factor", c.tolerances.wavelength_factor},
                     {"eps_degenerate", c.tolerances.eps_degenerate}};

  j["initial_state"] = {{"indices", c.initial_state.indices},
                        {"occupations", c.initial_state.occupations}};

  j["branching"] = {{"policy", to_string(c.branching.policy)},
                    {"fixed_index", c.branching.fixed_index},
                    {"seed", c.branching.seed},
                    {"delta_pop", c.branching.delta_pop},
                    {"threshold", c.branching.threshold},
                    {"manual_times_au", c.branching.manual_times}};

  j["adiabatic"] = {{"stride", c.adiabatic.stride},
                    {"theta", c.adiabatic.theta},
                    {"momentum_model",
                     c.adiabatic.model == MomentumModel::projected ? "projected"
                                                                   : "kinetic"}};

  json aps = json::object();
  for (const auto& [name, vec] : c.ionization.alpha_per_species) aps[name] = vec;
  j["ionization"] = {{"enabled", c.ionization.enabled},
                     {"alpha", c.ionization.alpha},
                     {"alpha_per_species", std::move(aps)},
                     {"p0_sink", c.ionization.p0_sink}};

  j["output"] = {{"stride", c.output.stride},
                 {"record", c.output.record},
                 {"binary", c.output.binary},
                 {"checkpoint_dir", c.output.checkpoint_dir}};
  return j;
}

}  // namespace qdyn
