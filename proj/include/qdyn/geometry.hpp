#pragma once

#include <string>
#include <vector>

#include "qdyn/orbital.hpp"
#include "qdyn/types.hpp"

namespace qdyn {

// Classical nuclei plus the species table they index into. Positions and
// velocities are in au (bohr, bohr per au time).
struct SystemGeometry {
  std::vector<Species> species;
  std::vector<int> atom_species;
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  bool mobile = true;

  int n_atoms() const { return static_cast<int>(x.size()); }
  const Species& spec(int a) const { return species[atom_species[a]]; }
  double mass(int a) const { return spec(a).mass; }

  double max_pair_distance() const;
  double min_pair_distance() const;
  void validate() const;
};

// Flattened orbital list: one entry per (atom, shell) in atom-major order.
// This ordering defines the row/column indexing of every matrix in the code.
struct BasisRoster {
  struct Entry {
    int atom;
    int shell;  // index into the atom's species shell list
  };
  std::vector<Entry> entries;

  [[nodiscard]] static BasisRoster build(const SystemGeometry& g);

  int n_orbitals() const { return static_cast<int>(entries.size()); }
  const OrbitalShell& shell(const SystemGeometry& g, int l) const {
    return g.spec(entries[l].atom).shells[entries[l].shell];
  }
  int atom(int l) const { return entries[l].atom; }
};

}  // namespace qdyn
