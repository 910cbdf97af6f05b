#include "qdyn/driver.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdyn/adiabatic.hpp"
#include "qdyn/branching.hpp"
#include "qdyn/coupling.hpp"
#include "qdyn/ionization.hpp"
#include "qdyn/nuclei.hpp"
#include "qdyn/units.hpp"

namespace qdyn {

namespace {

using nlohmann::json;

std::vector<double> to_std(const VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// Uniform default with per-species shell overrides, resolved to roster order.
SinkSpec resolve_sink(const RunConfig& cfg, const BasisRoster& roster) {
  SinkSpec sink;
  sink.enabled = cfg.ionization.enabled;
  sink.p0_sink = cfg.ionization.p0_sink;
  if (!sink.enabled) return sink;
  sink.alpha = VectorXd::Constant(roster.n_orbitals(), cfg.ionization.alpha);
  for (int l = 0; l < roster.n_orbitals(); ++l) {
    const Species& sp = cfg.geometry.spec(roster.atom(l));
    auto it = cfg.ionization.alpha_per_species.find(sp.name);
    if (it != cfg.ionization.alpha_per_species.end())
      sink.alpha[l] = it->second[roster.entries[l].shell];
  }
  return sink;
}

VectorXc sink_row(const SinkSpec& sink, double a_norm) {
  VectorXc row(sink.alpha.size());
  for (int l = 0; l < sink.alpha.size(); ++l)
    row[l] = sink.coupling(sink.alpha[l], a_norm);
  return row;
}

ElectronState bound_part(const ElectronState& st, int n_orb) {
  return {st.psi.topRows(n_orb), st.occ, st.t};
}

std::uint64_t hash_state(const MatrixXc& psi) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffull;
      h *= 1099511628211ull;
    }
  };
  for (int c = 0; c < psi.cols(); ++c)
    for (int r = 0; r < psi.rows(); ++r) {
      mix(psi(r, c).real());
      mix(psi(r, c).imag());
    }
  return h;
}

// E_el = sum_n occ_n Re(psi_n^dag H psi_n) / Re(psi_n^dag S psi_n); states
// whose bound norm has fully drained contribute nothing.
double electronic_energy(const ElectronState& bound, const MatrixXc& S, const MatrixXc& H) {
  double e = 0.0;
  for (int n = 0; n < bound.n_states(); ++n) {
    const VectorXc psi = bound.psi.col(n);
    const double nrm = std::real(psi.dot(S * psi));
    if (nrm < 1e-12) continue;
    e += bound.occ[n] * std::real(psi.dot(H * psi)) / nrm;
  }
  return e;
}

double kinetic_energy(const SystemGeometry& g) {
  double e = 0.0;
  for (int a = 0; a < g.n_atoms(); ++a) e += 0.5 * g.mass(a) * g.v[a].squaredNorm();
  return e;
}

struct Engine {
  RunConfig cfg;
  RunOptions opts;
  BasisRoster roster;
  SinkSpec sink;
  int n_orb = 0;
  double dt_e = 0.0, dt_nuc = 0.0;
  long n_nuc = 0;
  bool pulse_active = false;
  StepControls controls;
  std::string ckpt_prefix = "event_";

  SystemGeometry g;
  ElectronState st;
  std::mt19937_64 rng;
  EventDetector det;
  IonizationLedger ledger;
  std::vector<int> labels;
  AdiabaticSnapshot snap;
  double t0 = 0.0;
  long step0 = 0;
  int next_event_index = 0;
  size_t next_manual = 0;
  std::string last_ckpt;

  TrajectoryRecord rec;
  std::optional<RecordWriter> writer;
  StepReport totals;

  explicit Engine(RunConfig c, RunOptions o)
      : cfg(std::move(c)),
        opts(std::move(o)),
        det(cfg.adiabatic.theta, cfg.branching.delta_pop) {
    roster = BasisRoster::build(cfg.geometry);
    n_orb = roster.n_orbitals();
    sink = resolve_sink(cfg, roster);
    dt_e = cfg.integrator.dt;
    dt_nuc = dt_e * cfg.integrator.substep_ratio;
    n_nuc = std::llround(cfg.integrator.t_end / dt_nuc);
    if (n_nuc < 1)
      throw ConfigError("config: integrator.t_end_au: shorter than one nuclear step");
    pulse_active = cfg.pulse.a0 > 0.0;
    controls.fixed_point_tol = cfg.tolerances.fixed_point;
    controls.fixed_point_iters = cfg.tolerances.fixed_point_iters;
    controls.reject_drift = cfg.tolerances.step_reject;
    controls.max_halvings = cfg.tolerances.max_halvings;
  }

  double t_at(long k) const { return t0 + k * dt_nuc; }
  bool pulse_over(double t) const { return pulse_active && cfg.pulse.is_over(t); }

  AdiabaticityOptions adiabaticity_options() const {
    AdiabaticityOptions o;
    o.model = cfg.adiabatic.model;
    o.theta = cfg.adiabatic.theta;
    o.eps_degenerate = cfg.tolerances.eps_degenerate;
    return o;
  }

  VectorXd to_label_order(const VectorXd& sorted) const {
    VectorXd out(sorted.size());
    for (int i = 0; i < sorted.size(); ++i) out[labels[i]] = sorted[i];
    return out;
  }

  VectorXd forces_at(double t) const {
    return ehrenfest_forces(g, roster, bound_part(st, n_orb), cfg.pulse.a_bar(t),
                            cfg.pulse.e_bar(t), cfg.coupling, cfg.repulsion);
  }

  // Matrices along one nuclear segment: positions extrapolated linearly from
  // the segment origin with the half-kicked velocities, field evaluated at
  // the requested interior time. The origin is captured by value so interior
  // calls stay consistent however the live geometry moves.
  MatrixProvider segment_provider(double t_seg) const {
    MatrixProvider p;
    const bool extrapolate = cfg.geometry.mobile;
    p.at = [this, t_seg, base = g, extrapolate](double s) {
      SystemGeometry gs = base;
      if (extrapolate)
        for (size_t a = 0; a < gs.x.size(); ++a)
          gs.x[a] = base.x[a] + (s - t_seg) * base.v[a];
      MatrixSet m =
          assemble(gs, roster, cfg.pulse.a_bar(s), cfg.pulse.e_bar(s), cfg.coupling);
      if (sink.enabled) extend_matrices(m, sink, cfg.pulse.a_bar(s).norm());
      return StepMatrices{std::move(m.S), std::move(m.H)};
    };
    return p;
  }

  void accumulate(const StepReport& r) {
    totals.solves += r.solves;
    totals.rejections += r.rejections;
    totals.max_drift = std::max(totals.max_drift, r.max_drift);
  }

  void nuclear_step(long k) {
    const double t_k = t_at(k);
    const double t_k1 = t_at(k + 1);
    if (cfg.geometry.mobile) {
      half_kick(g, forces_at(t_k), dt_nuc);
      const MatrixProvider prov = segment_provider(t_k);
      st.t = t_k;
      accumulate(propagate(st, prov, {t_k1, dt_e}, controls));
      drift(g, dt_nuc);
      half_kick(g, forces_at(t_k1), dt_nuc);
      check_atom_overlap(g, cfg.tolerances.atom_overlap);
    } else {
      const MatrixProvider prov = segment_provider(t_k);
      st.t = t_k;
      accumulate(propagate(st, prov, {t_k1, dt_e}, controls));
    }
    st.t = t_k1;
  }

  void absorb_now(double t) {
    if (sink.enabled) ledger.absorb(st, sink_row(sink, cfg.pulse.a_bar(t).norm()));
  }

  // Refresh snapshot, persistent labels, populations, and the adiabaticity
  // measure at the current geometry.
  struct AnalysisPoint {
    VectorXd pops_sorted;
    VectorXd pops_label;
    double rho_max = 0.0;
  };

  AnalysisPoint analysis_point() {
    AdiabaticSnapshot now = eigensolve_geometry(g, roster);
    if (snap.n_states() > 0) labels = match_labels(snap, now, labels);
    snap = std::move(now);
    if (labels.empty()) {
      labels.resize(snap.n_states());
      for (int i = 0; i < snap.n_states(); ++i) labels[i] = i;
    }
    AnalysisPoint ap;
    const MatrixXd rho = adiabaticity_matrix(g, roster, snap, adiabaticity_options());
    ap.rho_max = rho.size() > 0 ? rho.maxCoeff() : 0.0;
    ap.pops_sorted = adiabatic_populations(snap, bound_part(st, n_orb));
    ap.pops_label = to_label_order(ap.pops_sorted);
    return ap;
  }

  void handle_event(long step, double t, BranchReason reason) {
    absorb_now(t);

    BranchEvent ev;
    ev.t = t;
    ev.step = step;
    ev.reason = reason;
    ev.policy = cfg.branching.policy;
    ev.populations = adiabatic_populations(snap, bound_part(st, n_orb));
    for (const auto& [idx, weight] :
         enumerate_branches(ev.populations, cfg.branching.threshold))
      ev.eligible.push_back(idx);

    // The checkpoint captures the undisturbed superposition and the RNG
    // stream before the collapse draw, so every eligible branch can be
    // replayed from this file.
    const int idx = next_event_index++;
    if (!opts.no_files) {
      Checkpoint ck;
      ck.step = step;
      ck.t0 = t0;
      ck.state = st;
      ck.geometry_snapshot.x = g.x;
      ck.geometry_snapshot.v = g.v;
      ck.q_ion = ledger.q_ion;
      ck.channels = ledger.channels;
      ck.q_state = ledger.q_state;
      ck.rng_state = serialize_rng(rng);
      ck.event_index = idx;
      json evj = event_to_json(ev);
      evj["labels"] = labels;
      ck.event = std::move(evj);
      ck.config = config_to_json(cfg);
      const std::filesystem::path dir(cfg.output.checkpoint_dir);
      const std::string path =
          (dir / (ckpt_prefix + std::to_string(idx) + ".json")).string();
      save_checkpoint(ck, path);
      ev.checkpoint = path;
      last_ckpt = path;
    }

    if (cfg.branching.policy != CollapsePolicy::off) {
      ev.targets = choose_collapse_targets(snap, bound_part(st, n_orb),
                                           cfg.branching.policy, rng,
                                           cfg.branching.fixed_index);
      const MatrixSet m =
          assemble(g, roster, cfg.pulse.a_bar(t), cfg.pulse.e_bar(t), cfg.coupling);
      collapse_onto(st, snap, ev.targets, m.S);
      ev.chosen = ev.targets.empty() ? -1 : ev.targets[0];
    }
    ev.state_hash = hash_state(st.psi);
    rec.events.push_back(ev);
    if (writer) writer->event(ev);
  }

  void record_frame(long step, double t, const VectorXd& pops_label, double rho_max) {
    absorb_now(t);
    Frame f;
    f.step = step;
    f.t = t;
    for (int a = 0; a < g.n_atoms(); ++a)
      for (int ax = 0; ax < 3; ++ax) {
        f.x.push_back(g.x[a][ax]);
        f.v.push_back(g.v[a][ax]);
      }
    const MatrixSet m =
        assemble(g, roster, cfg.pulse.a_bar(t), cfg.pulse.e_bar(t), cfg.coupling);
    const ElectronState bs = bound_part(st, n_orb);
    const VectorXd norms = state_norms(bs, m.S);
    f.norms = to_std(norms);
    f.orbital_pop = to_std(orbital_populations(bs, m.S));
    f.adiabatic_pop = to_std(pops_label);
    f.energies = to_std(snap.energies);
    f.labels = labels;
    f.e_el = electronic_energy(bs, m.S, m.H);
    f.e_kin = kinetic_energy(g);
    f.e_rep = cfg.repulsion.energy(g);
    f.e_tot = f.e_el + f.e_kin + f.e_rep;
    f.a_norm = cfg.pulse.a_bar(t).norm();
    f.e_norm = cfg.pulse.e_bar(t).norm();
    f.rho_max =
        std::isfinite(rho_max) ? rho_max : std::numeric_limits<double>::max();
    f.q_ion = ledger.q_ion;
    for (int n = 0; n < norms.size(); ++n) {
      const double ionized =
          sink.enabled && n < ledger.q_state.size() ? ledger.q_state[n] : 0.0;
      const double dev = std::abs(norms[n] + ionized - 1.0);
      if (dev > cfg.tolerances.norm_warn)
        f.warnings.push_back("state " + std::to_string(n) + " norm deviates by " +
                             std::to_string(dev));
    }
    rec.frames.push_back(f);
    if (writer) writer->frame(f);
  }

  void open_writer(const std::string& path, const json& extra_header) {
    json header;
    header["format"] = "qdyn-trajectory";
    header["schema_version"] = kSchemaVersion;
    header["config"] = config_to_json(cfg);
    for (const auto& item : extra_header.items()) header[item.key()] = item.value();
    if (!opts.no_files) writer.emplace(path, cfg.output.binary, header);
    rec.header = std::move(header);
  }

  void drive() {
    try {
      for (long k = step0; k < n_nuc; ++k) {
        nuclear_step(k);
        const long step = k + 1;
        const double t_step = t_at(step);

        const bool is_sample = step % cfg.adiabatic.stride == 0;
        bool manual_due = false;
        while (next_manual < cfg.branching.manual_times.size() &&
               cfg.branching.manual_times[next_manual] <= t_step) {
          manual_due = true;
          ++next_manual;
        }
        const bool is_frame = step % cfg.output.stride == 0 || step == n_nuc;
        if (!(is_sample || is_frame || manual_due)) continue;

        AnalysisPoint ap = analysis_point();
        std::optional<BranchReason> reason;
        if (is_sample)
          reason = det.sample(t_step, ap.pops_label, ap.rho_max, pulse_over(t_step));
        if (!reason && manual_due) reason = BranchReason::manual;
        bool evented = false;
        if (reason) {
          handle_event(step, t_step, *reason);
          evented = true;
          ap.pops_sorted = adiabatic_populations(snap, bound_part(st, n_orb));
          ap.pops_label = to_label_order(ap.pops_sorted);
        }
        if (is_frame || evented) record_frame(step, t_step, ap.pops_label, ap.rho_max);
      }
    } catch (const NumericalError& e) {
      if (writer) writer->close();
      const std::string ref = last_ckpt.empty()
                                  ? "; no checkpoint available"
                                  : "; last checkpoint: " + last_ckpt;
      throw NumericalError(e.what() + ref);
    }

    RunSummary s;
    s.t_final = t_at(std::max(n_nuc, step0));
    s.absorbed_energy = rec.frames.back().e_tot - rec.frames.front().e_tot;
    s.q_ion = ledger.q_ion;
    s.final_adiabatic_pop = rec.frames.back().adiabatic_pop;
    s.final_norms = rec.frames.back().norms;
    s.steps = std::max<long>(n_nuc - step0, 0);
    s.solves = totals.solves;
    s.rejections = totals.rejections;
    s.max_step_drift = totals.max_drift;
    rec.summary = s;
    if (writer) {
      writer->summary(s);
      writer->close();
    }
  }
};

}  // namespace

TrajectoryRecord run(const RunConfig& config, const RunOptions& opts) {
  config.validate();
  Engine eng(config, opts);

  eng.g = eng.cfg.geometry;
  eng.t0 = 0.0;
  eng.step0 = 0;
  eng.snap = eigensolve_geometry(eng.g, eng.roster);
  eng.labels.resize(eng.snap.n_states());
  for (int i = 0; i < eng.snap.n_states(); ++i) eng.labels[i] = i;

  const auto& init = eng.cfg.initial_state;
  const int n_states = static_cast<int>(init.indices.size());
  MatrixXc psi(eng.n_orb, n_states);
  VectorXd occ(n_states);
  for (int j = 0; j < n_states; ++j) {
    psi.col(j) = eng.snap.states.col(init.indices[j]).cast<Complex>();
    occ[j] = init.occupations[j];
  }
  // A constant gauge offset shifts the canonical momentum; preparing the
  // matching site-phased initial state keeps the run physically identical to
  // its delta_a = 0 counterpart.
  if (eng.cfg.pulse.delta_a.norm() > 0.0)
    apply_gauge_shift(psi, eng.g, eng.roster, eng.cfg.pulse.delta_a);
  eng.st = ElectronState{std::move(psi), std::move(occ), 0.0};
  if (eng.sink.enabled) extend_state(eng.st);

  eng.rng = std::mt19937_64(eng.cfg.branching.seed);
  eng.ledger.reset(eng.n_orb);
  eng.next_manual = 0;
  while (eng.next_manual < eng.cfg.branching.manual_times.size() &&
         eng.cfg.branching.manual_times[eng.next_manual] <= 0.0)
    ++eng.next_manual;

  eng.open_writer(opts.record_path.empty() ? eng.cfg.output.record : opts.record_path,
                  json::object());

  Engine::AnalysisPoint ap0 = eng.analysis_point();
  // Prime the detector with the initial sample; no event can close here.
  (void)eng.det.sample(0.0, ap0.pops_label, ap0.rho_max, false);
  eng.record_frame(0, 0.0, ap0.pops_label, ap0.rho_max);

  eng.drive();
  return std::move(eng.rec);
}

TrajectoryRecord resume(const Checkpoint& ckpt, std::optional<int> branch_index,
                        const RunOptions& opts) {
  RunConfig cfg = parse_config(ckpt.config);
  Engine eng(cfg, opts);

  eng.g = eng.cfg.geometry;
  if (ckpt.geometry_snapshot.x.size() != eng.g.x.size() ||
      ckpt.geometry_snapshot.v.size() != eng.g.v.size())
    throw ConfigError("checkpoint: geometry snapshot does not match the config echo");
  eng.g.x = ckpt.geometry_snapshot.x;
  eng.g.v = ckpt.geometry_snapshot.v;
  eng.t0 = ckpt.t0;
  eng.step0 = ckpt.step;

  const int expected_rows = eng.n_orb + (eng.sink.enabled ? 1 : 0);
  if (ckpt.state.psi.rows() != expected_rows)
    throw ConfigError("checkpoint: state dimension does not match the config echo");
  eng.st = ckpt.state;

  eng.rng = deserialize_rng(ckpt.rng_state);
  eng.ledger.reset(eng.n_orb);
  eng.ledger.q_ion = ckpt.q_ion;
  if (ckpt.channels.size() == eng.n_orb) eng.ledger.channels = ckpt.channels;
  eng.ledger.q_state = ckpt.q_state;
  eng.next_event_index = ckpt.event_index + 1;

  if (ckpt.event.is_object() && ckpt.event.contains("labels"))
    eng.labels = ckpt.event["labels"].get<std::vector<int>>();
  eng.snap = eigensolve_geometry(eng.g, eng.roster);
  if (static_cast<int>(eng.labels.size()) != eng.snap.n_states()) {
    eng.labels.resize(eng.snap.n_states());
    for (int i = 0; i < eng.snap.n_states(); ++i) eng.labels[i] = i;
  }

  const double t_resume = eng.t_at(eng.step0);
  eng.next_manual = 0;
  while (eng.next_manual < eng.cfg.branching.manual_times.size() &&
         eng.cfg.branching.manual_times[eng.next_manual] <= t_resume)
    ++eng.next_manual;

  std::string suffix = ".resume" + std::to_string(eng.step0);
  if (branch_index) suffix += "_b" + std::to_string(*branch_index);
  eng.ckpt_prefix = "resume" + std::to_string(eng.step0) +
                    (branch_index ? "_b" + std::to_string(*branch_index) : "") +
                    "_event_";

  json extra;
  extra["resumed_from_step"] = eng.step0;
  if (branch_index) extra["branch_index"] = *branch_index;
  eng.open_writer(
      opts.record_path.empty() ? eng.cfg.output.record + suffix : opts.record_path,
      extra);

  if (branch_index) {
    BranchEvent stored = event_from_json(ckpt.event);
    if (*branch_index < 0 || *branch_index >= static_cast<int>(stored.eligible.size()))
      throw ConfigError("resume: branch index " + std::to_string(*branch_index) +
                        " outside the eligible list of " +
                        std::to_string(stored.eligible.size()) + " branches");
    const int target = stored.eligible[*branch_index];
    const std::vector<int> targets(eng.st.n_states(), target);
    const MatrixSet m = assemble(eng.g, eng.roster, eng.cfg.pulse.a_bar(t_resume),
                                 eng.cfg.pulse.e_bar(t_resume), eng.cfg.coupling);
    collapse_onto(eng.st, eng.snap, targets, m.S);

    BranchEvent ev = stored;
    ev.policy = CollapsePolicy::fixed;
    ev.targets = targets;
    ev.chosen = target;
    ev.state_hash = hash_state(eng.st.psi);
    ev.checkpoint.clear();
    eng.rec.events.push_back(ev);
    if (eng.writer) eng.writer->event(ev);
  }

  Engine::AnalysisPoint ap0 = eng.analysis_point();
  // Prime the detector; a pulse that already ended was reported before the
  // checkpoint, so a duplicate report here is swallowed.
  (void)eng.det.sample(t_resume, ap0.pops_label, ap0.rho_max,
                       eng.pulse_over(t_resume));
  eng.record_frame(eng.step0, t_resume, ap0.pops_label, ap0.rho_max);

  eng.drive();
  return std::move(eng.rec);
}

}  // namespace qdyn
