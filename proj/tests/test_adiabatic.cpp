#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "qdyn/adiabatic.hpp"
#include "qdyn/coupling.hpp"
#include "qdyn/oracles/reference.hpp"
#include "qdyn/units.hpp"

using namespace qdyn;

namespace {

// Heteronuclear trimer with a well-separated 4-level spectrum; reused for
// orthonormality, projection, and coupling-oracle checks.
SystemGeometry make_trimer() {
  SystemGeometry g;
  Species a;
  a.name = "A";
  a.mass = 6.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.8, -0.45}};
  Species b;
  b.name = "B";
  b.mass = 9.0 * units::m_e_per_amu;
  b.hueckel_k = 1.9;
  b.shells = {{ShellKind::s, 1.0, -0.5}, {ShellKind::pz, 0.7, -0.2}};
  g.species = {a, b};
  g.atom_species = {0, 1, 0};
  g.x = {Vec3(0.0, 0.0, 0.0), Vec3(2.4, 0.2, -0.3), Vec3(4.1, -0.6, 0.5)};
  g.v = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  return g;
}

// Two-species dimer whose antibonding s branch rises through a flat pz level
// as the bond shortens; the small tilt off the x axis switches on an s-pz
// coupling that turns the crossing into a narrow avoided one.
SystemGeometry make_scan_dimer(double r) {
  const double tilt = 0.15;
  SystemGeometry g;
  Species a;
  a.name = "A";
  a.mass = 12.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.35, -0.5}};
  Species b;
  b.name = "B";
  b.mass = 14.0 * units::m_e_per_amu;
  b.shells = {{ShellKind::s, 0.35, -0.45}, {ShellKind::pz, 0.8, -0.3}};
  g.species = {a, b};
  g.atom_species = {0, 1};
  const Vec3 u(std::cos(tilt), 0.0, std::sin(tilt));
  g.x = {Vec3::Zero(), r * u};
  g.v = {Vec3::Zero(), Vec3::Zero()};
  return g;
}

MatrixXd field_free_overlap(const SystemGeometry& g, const BasisRoster& roster) {
  CouplingOptions opt;
  opt.mode = CouplingMode::peierls_only;
  return assemble(g, roster, Vec3::Zero(), Vec3::Zero(), opt).S.real();
}

}  // namespace

TEST_CASE("single atom eigenvalues are the on-site energies exactly") {
  SystemGeometry g;
  Species a;
  a.name = "A";
  a.mass = 10.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.9, -0.6}, {ShellKind::pz, 0.7, -0.25}};
  g.species = {a};
  g.atom_species = {0};
  g.x = {Vec3::Zero()};
  g.v = {Vec3::Zero()};
  const BasisRoster roster = BasisRoster::build(g);
  const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  // On-site s/pz blocks are diagonal by parity, so the problem is trivial.
  CHECK(snap.energies[0] == doctest::Approx(-0.6).epsilon(1e-14));
  CHECK(snap.energies[1] == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK((snap.states - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dimer eigenvalues match the closed-form two-level solution") {
  SystemGeometry g;
  Species a;
  a.name = "A";
  a.mass = 12.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.8, -0.5}};
  Species b = a;
  b.name = "B";
  b.shells = {{ShellKind::s, 0.8, -0.38}};
  g.species = {a, b};
  g.atom_species = {0, 1};
  g.x = {Vec3::Zero(), Vec3(2.1, 0.0, 0.0)};
  g.v = {Vec3::Zero(), Vec3::Zero()};
  const BasisRoster roster = BasisRoster::build(g);

  CouplingOptions copt;
  copt.mode = CouplingMode::peierls_only;
  const MatrixSet m = assemble(g, roster, Vec3::Zero(), Vec3::Zero(), copt);
  const MatrixXd h0 = m.H.real(), s0 = m.S.real();

  const AdiabaticSnapshot snap = eigensolve(h0, s0);
  const auto ref = oracles::two_level_eigenvalues(h0(0, 0), h0(1, 1), h0(0, 1), s0(0, 1));
  CHECK(snap.energies[0] == doctest::Approx(ref.e_lo).epsilon(1e-12));
  CHECK(snap.energies[1] == doctest::Approx(ref.e_hi).epsilon(1e-12));

  SUBCASE("homonuclear limit agrees with the (eps +- h)/(1 +- s) form") {
    g.atom_species = {0, 0};
    const BasisRoster r2 = BasisRoster::build(g);
    const MatrixSet mh = assemble(g, r2, Vec3::Zero(), Vec3::Zero(), copt);
    const double eps = mh.H.real()(0, 0), h = mh.H.real()(0, 1), s = mh.S.real()(0, 1);
    const AdiabaticSnapshot sh = eigensolve(mh.H.real(), mh.S.real());
    const double e_bond = (eps + h) / (1.0 + s), e_anti = (eps - h) / (1.0 - s);
    CHECK(sh.energies[0] == doctest::Approx(std::min(e_bond, e_anti)).epsilon(1e-12));
    CHECK(sh.energies[1] == doctest::Approx(std::max(e_bond, e_anti)).epsilon(1e-12));
  }
}

TEST_CASE("eigenvectors are overlap-orthonormal, degenerate subspaces included") {
  SystemGeometry g = make_trimer();
  BasisRoster roster = BasisRoster::build(g);
  AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  MatrixXd gram = snap.states.transpose() * snap.s0 * snap.states;
  CHECK((gram - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);

  // Equilateral homonuclear triangle: doubly degenerate upper pair with a
  // genuinely nonorthogonal basis.
  SystemGeometry tri;
  Species a;
  a.name = "A";
  a.mass = 12.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.6, -0.4}};
  tri.species = {a};
  tri.atom_species = {0, 0, 0};
  const double side = 2.6;
  tri.x = {Vec3::Zero(), Vec3(side, 0.0, 0.0), Vec3(0.5 * side, side * std::sqrt(3.0) / 2.0, 0.0)};
  tri.v = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  BasisRoster rt = BasisRoster::build(tri);
  AdiabaticSnapshot st = eigensolve_geometry(tri, rt);
  CHECK(st.energies[2] - st.energies[1] < 1e-12);  // degenerate pair present
  MatrixXd gt = st.states.transpose() * st.s0 * st.states;
  CHECK((gt - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("projection onto the eigenbasis is complete and norm-preserving") {
  SystemGeometry g = make_trimer();
  BasisRoster roster = BasisRoster::build(g);
  AdiabaticSnapshot snap = eigensolve_geometry(g, roster);

  ElectronState st;
  st.psi = MatrixXc(4, 2);
  st.psi.col(0) << Complex(0.31, -0.44), Complex(-0.12, 0.05), Complex(0.66, 0.21),
      Complex(-0.09, 0.38);
  st.psi.col(1) << Complex(-0.55, 0.10), Complex(0.27, 0.61), Complex(0.04, -0.33),
      Complex(0.18, 0.22);
  // Normalize each column in the overlap metric.
  for (int n = 0; n < 2; ++n) {
    const double nn = std::real(st.psi.col(n).dot(snap.s0 * st.psi.col(n)));
    st.psi.col(n) /= std::sqrt(nn);
  }
  st.occ = VectorXd(2);
  st.occ << 2.0, 1.0;

  const MatrixXc c = project(snap, st.psi);
  for (int n = 0; n < 2; ++n)
    CHECK(c.col(n).cwiseAbs2().sum() == doctest::Approx(1.0).epsilon(1e-10));

  // Finite basis: resynthesis from the coefficients is exact.
  const MatrixXc back = snap.states * c;
  CHECK((back - st.psi).cwiseAbs().maxCoeff() < 1e-10);

  const VectorXd pop = adiabatic_populations(snap, st);
  CHECK(pop.sum() == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(pop.minCoeff() >= 0.0);
}

TEST_CASE("derivative coupling matches the finite-difference eigenvector oracle") {
  SystemGeometry g = make_trimer();
  const BasisRoster roster = BasisRoster::build(g);
  const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  const MatrixXd s0 = field_free_overlap(g, roster);
  const double delta = 1e-4;

  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const CouplingResult c = nonadiabatic_coupling(g, roster, snap, i, j);
      REQUIRE(std::abs(c.gap) > 1e-3);
      for (int a = 0; a < g.n_atoms(); ++a)
        for (int axis = 0; axis < 3; ++axis) {
          SystemGeometry gp = g, gm = g;
          gp.x[a][axis] += delta;
          gm.x[a][axis] -= delta;
          const AdiabaticSnapshot sp = eigensolve_geometry(gp, BasisRoster::build(gp));
          const AdiabaticSnapshot sm = eigensolve_geometry(gm, BasisRoster::build(gm));
          const VectorXd dpsi_j = (sp.states.col(j) - sm.states.col(j)) / (2.0 * delta);
          const double fd = snap.states.col(i).dot(s0 * dpsi_j);
          const double analytic = c.g[3 * a + axis] / c.gap;
          CHECK(std::abs(analytic - fd) < 1e-5);
        }
    }
}

TEST_CASE("coupling pairs obey the overlap-derivative antisymmetry identity") {
  SystemGeometry g = make_trimer();
  const BasisRoster roster = BasisRoster::build(g);
  const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  CouplingOptions copt;
  copt.mode = CouplingMode::peierls_only;
  SystemGeometry frozen = g;

  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const CouplingResult cij = nonadiabatic_coupling(g, roster, snap, i, j);
      const CouplingResult cji = nonadiabatic_coupling(g, roster, snap, j, i);
      for (int a = 0; a < g.n_atoms(); ++a)
        for (int axis = 0; axis < 3; ++axis) {
          const DerivativePair d =
              assemble_derivatives(frozen, roster, Vec3::Zero(), Vec3::Zero(), copt, a, axis);
          const double sderiv =
              snap.states.col(i).dot(d.dS.real() * snap.states.col(j));
          const double fij = cij.g[3 * a + axis] / cij.gap;
          const double fji = cji.g[3 * a + axis] / cji.gap;
          // d/dX (Psi_i^T S Psi_j) = 0 for orthonormal eigenvectors.
          CHECK(std::abs(fij + fji + sderiv) < 1e-12);
        }
    }
}

TEST_CASE("degenerate pairs throw on request and are flagged in the matrix") {
  SystemGeometry g;
  Species a;
  a.name = "A";
  a.mass = 10.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.8, -0.4}, {ShellKind::pz, 0.5, -0.4}};
  g.species = {a};
  g.atom_species = {0};
  g.x = {Vec3::Zero()};
  g.v = {Vec3::Zero()};
  const BasisRoster roster = BasisRoster::build(g);
  const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  REQUIRE(std::abs(snap.energies[1] - snap.energies[0]) < 1e-12);

  CHECK_THROWS_AS(nonadiabatic_coupling(g, roster, snap, 0, 1), DegeneratePair);
  try {
    nonadiabatic_coupling(g, roster, snap, 0, 1);
  } catch (const DegeneratePair& e) {
    CHECK(std::abs(e.gap) < 1e-12);
  }

  // Degeneracy dominates every other rule: flagged even for nuclei at rest.
  const MatrixXd rho = adiabaticity_matrix(g, roster, snap);
  CHECK(std::isinf(rho(0, 1)));
  CHECK(std::isinf(rho(1, 0)));
  const auto pairs = nonadiabatic_pairs(rho, 0.1);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<int, int>(0, 1));
}

TEST_CASE("closeness ratio follows |g| (hbar/P) / gap in both momentum models") {
  SystemGeometry g = make_trimer();
  const BasisRoster roster = BasisRoster::build(g);
  const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  const CouplingResult c = nonadiabatic_coupling(g, roster, snap, 1, 2);
  REQUIRE(c.g.norm() > 1e-6);

  SUBCASE("nuclei at rest count as adiabatic for every finite gap") {
    const MatrixXd rho = adiabaticity_matrix(g, roster, snap);
    CHECK(rho.maxCoeff() == 0.0);
    CHECK(nonadiabatic_pairs(rho, 0.1).empty());
  }

  SUBCASE("projected model contracts momentum along the coupling direction") {
    // Velocities proportional to the coupling direction give P = |sum M v.g|/|g|.
    const double scale = 4.0e-5;
    for (int a = 0; a < g.n_atoms(); ++a)
      for (int ax = 0; ax < 3; ++ax) g.v[a][ax] = scale * c.g[3 * a + ax] / g.mass(a);
    double p = 0.0;
    for (int a = 0; a < g.n_atoms(); ++a)
      for (int ax = 0; ax < 3; ++ax) p += g.mass(a) * g.v[a][ax] * c.g[3 * a + ax];
    p = std::abs(p) / c.g.norm();
    REQUIRE(p > 0.0);
    const double expected = c.g.norm() * (units::hbar / p) / std::abs(c.gap);
    CHECK(adiabaticity_rho(c, g) == doctest::Approx(expected).epsilon(1e-12));

    // Halving the speed doubles the ratio: slower nuclei have longer
    // de Broglie wavelengths and feel the crossing more strongly.
    SystemGeometry half = g;
    for (auto& v : half.v) v *= 0.5;
    CHECK(adiabaticity_rho(c, half) == doctest::Approx(2.0 * expected).epsilon(1e-12));
  }

  SUBCASE("motion orthogonal to the coupling direction is flagged, not excused") {
    // Build nuclear momenta orthogonal to g, then velocities from them. The
    // projected momentum vanishes, the nuclear wavelength along the coupling
    // direction is unbounded, and the ratio blows up conservatively.
    VectorXd w(3 * g.n_atoms());
    w << 0.3, -0.7, 0.2, 0.5, 0.1, -0.4, -0.2, 0.6, 0.35;
    w -= c.g * (c.g.dot(w) / c.g.squaredNorm());
    for (int a = 0; a < g.n_atoms(); ++a)
      for (int ax = 0; ax < 3; ++ax) g.v[a][ax] = 1e-4 * w[3 * a + ax] / g.mass(a);
    CHECK(adiabaticity_rho(c, g) > 1e6);

    // A momentum floor bounds it to the floor value instead.
    AdiabaticityOptions floored;
    floored.p_floor = 3.0;
    const double capped = c.g.norm() * (units::hbar / 3.0) / std::abs(c.gap);
    CHECK(adiabaticity_rho(c, g, floored) == doctest::Approx(capped).epsilon(1e-12));

    AdiabaticityOptions kin;
    kin.model = MomentumModel::kinetic;
    const double rho_kin = adiabaticity_rho(c, g, kin);
    CHECK(rho_kin > 0.0);  // direction-blind by design
    CHECK(std::isfinite(rho_kin));
  }

  SUBCASE("momentum floor applies when nuclei are at rest") {
    AdiabaticityOptions opt;
    opt.p_floor = 3.0;
    const double expected = c.g.norm() * (units::hbar / 3.0) / std::abs(c.gap);
    CHECK(adiabaticity_rho(c, g, opt) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("kinetic model uses the mean kinetic energy per atom") {
    for (auto& v : g.v) v = Vec3(2.0e-4, 0.0, 0.0);
    double e_kin = 0.0, m_sum = 0.0;
    for (int a = 0; a < g.n_atoms(); ++a) {
      e_kin += 0.5 * g.mass(a) * g.v[a].squaredNorm();
      m_sum += g.mass(a);
    }
    const double m_mean = m_sum / 3.0, e_mean = e_kin / 3.0;
    const double p = std::sqrt(2.0 * m_mean * e_mean);
    AdiabaticityOptions kin;
    kin.model = MomentumModel::kinetic;
    const double expected = c.g.norm() * (units::hbar / p) / std::abs(c.gap);
    CHECK(adiabaticity_rho(c, g, kin) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("widely gapped levels stay adiabatic at thermal speeds") {
  SystemGeometry g;
  Species a;
  a.name = "A";
  a.mass = 12.0 * units::m_e_per_amu;
  a.shells = {{ShellKind::s, 0.8, -5.2}};
  Species b = a;
  b.name = "B";
  b.shells = {{ShellKind::s, 0.8, 4.8}};
  g.species = {a, b};
  g.atom_species = {0, 1};
  g.x = {Vec3::Zero(), Vec3(3.2, 0.0, 0.0)};
  // Roughly 300 K speeds, head-on.
  g.v = {Vec3(3e-4, 0.0, 0.0), Vec3(-3e-4, 0.0, 0.0)};
  const BasisRoster roster = BasisRoster::build(g);
  const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
  REQUIRE(snap.energies[1] - snap.energies[0] > 9.0);

  for (const auto model : {MomentumModel::projected, MomentumModel::kinetic}) {
    AdiabaticityOptions opt;
    opt.model = model;
    const MatrixXd rho = adiabaticity_matrix(g, roster, snap, opt);
    CHECK(rho(0, 1) < 0.01);
    CHECK(nonadiabatic_pairs(rho, opt.theta).empty());
  }
}

TEST_CASE("bond scan: avoided crossing is flagged ahead of the closest approach") {
  // Closing velocity along the bond; scan from long to short bond.
  const Vec3 u(std::cos(0.15), 0.0, std::sin(0.15));
  auto rho12_at = [&](double r) {
    SystemGeometry g = make_scan_dimer(r);
    g.v[1] = -1e-4 * u;
    const BasisRoster roster = BasisRoster::build(g);
    const AdiabaticSnapshot snap = eigensolve_geometry(g, roster);
    const MatrixXd rho = adiabaticity_matrix(g, roster, snap);
    return std::make_pair(rho(1, 2), snap.energies[2] - snap.energies[1]);
  };

  // Locate the minimum gap on a fine grid.
  double gap_min = 1e9, r_min = 0.0;
  for (double r = 2.0; r <= 3.6 + 1e-9; r += 0.02) {
    const double gap = rho12_at(r).second;
    if (gap < gap_min) {
      gap_min = gap;
      r_min = r;
    }
  }
  CHECK(gap_min < 0.03);
  CHECK(r_min > 2.3);
  CHECK(r_min < 2.8);

  // Far out the pair is comfortably adiabatic; well before the closest
  // approach the ratio already exceeds the threshold, and near the crossing
  // it is far past it.
  const double theta = 0.1;
  CHECK(rho12_at(3.6).first < theta);
  CHECK(rho12_at(3.0).first > theta);    // flagged ~0.5 bohr before r_min
  CHECK(rho12_at(r_min).first > 10.0 * theta);
}

TEST_CASE("label matching follows state character through the crossing") {
  std::vector<double> grid;
  for (double r = 3.7; r >= 1.95 - 1e-9; r -= 0.25) grid.push_back(r);

  std::vector<AdiabaticSnapshot> snaps;
  for (const double r : grid) {
    SystemGeometry g = make_scan_dimer(r);
    snaps.push_back(eigensolve_geometry(g, BasisRoster::build(g)));
  }

  std::vector<int> labels = {0, 1, 2};
  std::vector<std::vector<int>> history = {labels};
  int swaps = 0;
  for (size_t k = 1; k < snaps.size(); ++k) {
    const std::vector<int> next = match_labels(snaps[k - 1], snaps[k], labels);

    // Valid permutation of {0,1,2} at every step.
    std::vector<bool> seen(3, false);
    for (const int l : next) {
      REQUIRE(l >= 0);
      REQUIRE(l < 3);
      REQUIRE(!seen[l]);
      seen[l] = true;
    }
    if (next != labels) ++swaps;

    // Tracked energies move by at most the index-matched motion plus the
    // local gap: character tracking never tears a curve apart.
    double max_index_move = 0.0;
    for (int i = 0; i < 3; ++i)
      max_index_move =
          std::max(max_index_move, std::abs(snaps[k].energies[i] - snaps[k - 1].energies[i]));
    const double gap_now = snaps[k].energies[2] - snaps[k].energies[1];
    const double gap_prev = snaps[k - 1].energies[2] - snaps[k - 1].energies[1];
    for (int label = 0; label < 3; ++label) {
      int i_prev = -1, i_now = -1;
      for (int i = 0; i < 3; ++i) {
        if (labels[i] == label) i_prev = i;
        if (next[i] == label) i_now = i;
      }
      const double move = std::abs(snaps[k].energies[i_now] - snaps[k - 1].energies[i_prev]);
      CHECK(move < max_index_move + 1.5 * std::max(gap_now, gap_prev));
    }

    labels = next;
    history.push_back(labels);
  }

  // Exactly one character swap, between the two upper states, and the scan
  // ends with the labels transposed relative to the energy ordering.
  CHECK(swaps == 1);
  std::vector<int> expected = {0, 2, 1};
  CHECK(labels == expected);

  // Matching identical snapshots is the identity.
  const std::vector<int> same = match_labels(snaps[0], snaps[0], {0, 1, 2});
  CHECK(same == std::vector<int>{0, 1, 2});
}

TEST_CASE("eigensolve rejects overlap matrices that are not positive definite") {
  MatrixXd h(2, 2), s(2, 2);
  h << -0.5, 0.1, 0.1, -0.4;
  s << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(eigensolve(h, s), NumericalError);

  s << 1.0, 1.0 - 1e-14, 1.0 - 1e-14, 1.0;  // numerically singular
  CHECK_THROWS_AS(eigensolve(h, s), NumericalError);
}
