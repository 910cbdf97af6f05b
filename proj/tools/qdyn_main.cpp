#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "qdyn/analyze.hpp"
#include "qdyn/driver.hpp"
#include "qdyn/oracles/quadrature.hpp"
#include "qdyn/oracles/reference.hpp"
#include "qdyn/units.hpp"

namespace {

using namespace qdyn;

// Reference values from the independent oracles, for eyeballing against the
// simulator's own numbers. Each fixture prints a small TSV block.
void print_oracle(const std::string& fixture) {
  std::cout.precision(12);
  if (fixture == "overlap") {
    OrbitalShell s1{ShellKind::s, 0.8, -0.45};
    OrbitalShell s2{ShellKind::s, 0.8, -0.45};
    const auto r = oracles::quadrature_matrix_element(oracles::ElementKind::overlap,
                                                      s1, s2, {0.0, 0.0, 2.0});
    std::cout << "fixture\toverlap s(0.8)-s(0.8) at d=(0,0,2) bohr\n";
    std::cout << "value\t" << r.value[0].real() << "\n";
    std::cout << "quadrature_err\t" << r.err << "\n";
    std::cout << "evals\t" << r.evals << "\n";
  } else if (fixture == "dipole") {
    OrbitalShell s{ShellKind::s, 0.8, -0.45};
    OrbitalShell pz{ShellKind::pz, 0.7, -0.2};
    const auto r = oracles::quadrature_matrix_element(oracles::ElementKind::dipole, s,
                                                      pz, {0.0, 0.0, 0.0});
    std::cout << "fixture\ton-site dipole s(0.8)-pz(0.7)\n";
    std::cout << "mu_x\t" << r.value[0].real() << "\n";
    std::cout << "mu_y\t" << r.value[1].real() << "\n";
    std::cout << "mu_z\t" << r.value[2].real() << "\n";
    std::cout << "quadrature_err\t" << r.err << "\n";
  } else if (fixture == "momentum") {
    OrbitalShell a{ShellKind::s, 0.8, -0.45};
    OrbitalShell b{ShellKind::s, 1.1, -0.55};
    const auto r = oracles::quadrature_matrix_element(oracles::ElementKind::momentum,
                                                      a, b, {0.4, -0.3, 1.7});
    std::cout << "fixture\tmomentum s(0.8)-s(1.1) at d=(0.4,-0.3,1.7) bohr\n";
    for (int k = 0; k < 3; ++k)
      std::cout << "p_" << "xyz"[k] << "\t" << r.value[k].real() << " + "
                << r.value[k].imag() << "i\n";
    std::cout << "quadrature_err\t" << r.err << "\n";
  } else if (fixture == "rabi") {
    const double e0 = 0.01, mu = 1.2;
    const double omega = oracles::rabi_omega(e0, mu);
    std::cout << "fixture\tresonant Rabi flopping, E0=0.01 au, mu=1.2 au\n";
    std::cout << "rabi_omega\t" << omega << "\n";
    std::cout << "period_au\t" << 2.0 * M_PI / omega << "\n";
    std::cout << "pop_at_quarter_period\t"
              << oracles::rabi_population(0.5 * M_PI / omega, omega) << "\n";
  } else if (fixture == "lz") {
    const double V = 0.05, lambda = 0.02;
    std::cout << "fixture\tLandau-Zener, V=0.05, diabatic slope 0.02 au\n";
    std::cout << "velocity\tp_diabatic\n";
    for (double v : {0.5, 1.0, 2.0, 4.0})
      std::cout << v << "\t" << oracles::landau_zener_probability(V, lambda, v)
                << "\n";
  } else if (fixture == "two_level") {
    const auto e = oracles::two_level_eigenvalues(-0.5, -0.3, -0.15, 0.4);
    std::cout << "fixture\t2x2 generalized eigenproblem h=(-0.5,-0.3,-0.15) s=0.4\n";
    std::cout << "e_lo\t" << e.e_lo << "\n";
    std::cout << "e_hi\t" << e.e_hi << "\n";
  } else if (fixture == "free_phase") {
    const Complex ph = oracles::free_phase(-0.45, 50.0);
    std::cout << "fixture\tstationary phase E=-0.45 hartree, t=50 au\n";
    std::cout << "re\t" << ph.real() << "\n";
    std::cout << "im\t" << ph.imag() << "\n";
  } else {
    throw ConfigError(
        "oracle: unknown fixture '" + fixture +
        "' (available: overlap, dipole, momentum, rabi, lz, two_level, free_phase)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("QDYN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"coupled electron-nuclear dynamics under an EM pulse"};
  app.require_subcommand(1);

  std::string config_path, record_path, ckpt_path, fixture, out_override;
  int branch = 0;
  std::vector<std::string> queries;

  CLI::App* cmd_run = app.add_subcommand("run", "execute a run from a config file");
  cmd_run->add_option("config", config_path, "run configuration (JSON)")->required();
  cmd_run->add_option("--record", out_override, "override the record output path");

  CLI::App* cmd_analyze = app.add_subcommand("analyze", "query a trajectory record");
  cmd_analyze->add_option("record", record_path, "trajectory record file")->required();
  cmd_analyze->add_option("queries", queries,
                          "queries, e.g. summary populations gap:0:1 (default: summary)");

  CLI::App* cmd_branches =
      app.add_subcommand("branches", "print the branch manifest of a record");
  cmd_branches->add_option("record", record_path, "trajectory record file")->required();

  CLI::App* cmd_resume = app.add_subcommand("resume", "continue from a checkpoint");
  cmd_resume->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  CLI::Option* branch_opt = cmd_resume->add_option(
      "--branch", branch, "collapse onto this entry of the eligible-branch list");
  cmd_resume->add_option("--record", out_override, "override the record output path");

  CLI::App* cmd_oracle =
      app.add_subcommand("oracle", "print reference values from the test oracles");
  cmd_oracle->add_option("fixture", fixture, "fixture name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) {
      RunConfig cfg = load_config_file(config_path);
      RunOptions opts;
      opts.record_path = out_override;
      TrajectoryRecord rec = run(cfg, opts);
      std::cout << analyze_query(rec, "summary");
    } else if (cmd_analyze->parsed()) {
      const TrajectoryRecord rec = read_record(record_path);
      if (queries.empty()) queries.push_back("summary");
      for (size_t i = 0; i < queries.size(); ++i) {
        if (i) std::cout << "\n";
        std::cout << analyze_query(rec, queries[i]);
      }
    } else if (cmd_branches->parsed()) {
      std::cout << branch_manifest(read_record(record_path));
    } else if (cmd_resume->parsed()) {
      const Checkpoint ck = load_checkpoint(ckpt_path);
      std::optional<int> b;
      if (branch_opt->count() > 0) b = branch;
      RunOptions opts;
      opts.record_path = out_override;
      TrajectoryRecord rec = resume(ck, b, opts);
      std::cout << analyze_query(rec, "summary");
    } else if (cmd_oracle->parsed()) {
      print_oracle(fixture);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegeneratePair& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
