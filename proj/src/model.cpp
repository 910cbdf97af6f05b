#include <limits>
#include <set>

#include "qdyn/geometry.hpp"
#include "qdyn/orbital.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

std::string to_string(ShellKind k) {
  switch (k) {
    case ShellKind::s:  return "s";
    case ShellKind::px: return "px";
    case ShellKind::py: return "py";
    case ShellKind::pz: return "pz";
  }
  return "?";
}

ShellKind shell_kind_from_string(const std::string& s) {
  if (s == "s") return ShellKind::s;
  if (s == "px" || s == "p_x") return ShellKind::px;
  if (s == "py" || s == "p_y") return ShellKind::py;
  if (s == "pz" || s == "p_z") return ShellKind::pz;
  throw ConfigError("unknown shell kind '" + s + "' (expected s, px, py, pz)");
}

void Species::validate() const {
  if (name.empty()) throw ConfigError("species with empty name");
  if (mass <= 0.0) throw ConfigError("species '" + name + "': mass must be positive");
  if (hueckel_k <= 0.0)
    throw ConfigError("species '" + name + "': hueckel_k must be positive");
  if (shells.empty()) throw ConfigError("species '" + name + "' has no shells");
  std::set<ShellKind> seen;
  for (const auto& sh : shells) {
    if (sh.alpha <= 0.0)
      throw ConfigError("species '" + name + "': shell exponent must be positive");
    // One shell per kind keeps same-atom blocks exactly orthonormal, which
    // the on-site S = I and H = diag(eps) structure relies on.
    if (!seen.insert(sh.kind).second)
      throw ConfigError("species '" + name + "': duplicate " + to_string(sh.kind) +
                        " shell (one shell per kind)");
  }
}

double SystemGeometry::max_pair_distance() const {
  double m = 0.0;
  for (size_t a = 0; a < x.size(); ++a)
    for (size_t b = a + 1; b < x.size(); ++b) m = std::max(m, (x[a] - x[b]).norm());
  return m;
}

double SystemGeometry::min_pair_distance() const {
  double m = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < x.size(); ++a)
    for (size_t b = a + 1; b < x.size(); ++b) m = std::min(m, (x[a] - x[b]).norm());
  return m;
}

void SystemGeometry::validate() const {
  if (x.empty()) throw ConfigError("geometry has no atoms");
  if (x.size() != v.size() || x.size() != atom_species.size())
    throw ConfigError("geometry arrays have inconsistent lengths");
  for (int s : atom_species)
    if (s < 0 || s >= static_cast<int>(species.size()))
      throw ConfigError("atom references an unknown species index");
  for (const auto& sp : species) sp.validate();
}

BasisRoster BasisRoster::build(const SystemGeometry& g) {
  BasisRoster r;
  for (int a = 0; a < g.n_atoms(); ++a)
    for (int s = 0; s < static_cast<int>(g.spec(a).shells.size()); ++s)
      r.entries.push_back({a, s});
  return r;
}

}  // namespace qdyn
