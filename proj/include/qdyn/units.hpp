#pragma once

// Hartree atomic units throughout: hbar = m_e = e = 1, energies in hartree,
// lengths in bohr, times in au (1 fs = 41.3414 au).

namespace qdyn::units {

inline constexpr double hbar = 1.0;
inline constexpr double electron_mass = 1.0;
// Electron charge q = -e used in all field couplings.
inline constexpr double q_electron = -1.0;
inline constexpr double speed_of_light = 137.035999;

inline constexpr double au_time_per_fs = 41.341373335182;
inline constexpr double au_time_per_as = 0.041341373335182;
inline constexpr double ev_per_hartree = 27.211386245988;
inline constexpr double bohr_per_angstrom = 1.8897261246258;
inline constexpr double m_e_per_amu = 1822.888486209;

// Peak intensity in W/cm^2 that corresponds to a peak electric field of 1 au.
inline constexpr double wcm2_per_au_intensity = 3.50944758e16;

inline constexpr double fs_to_au(double t) { return t * au_time_per_fs; }
inline constexpr double au_to_fs(double t) { return t / au_time_per_fs; }
inline constexpr double as_to_au(double t) { return t * au_time_per_as; }
inline constexpr double ev_to_hartree(double e) { return e / ev_per_hartree; }
inline constexpr double hartree_to_ev(double e) { return e * ev_per_hartree; }
inline constexpr double angstrom_to_bohr(double x) { return x * bohr_per_angstrom; }
inline constexpr double amu_to_au(double m) { return m * m_e_per_amu; }

// Peak field amplitude (au) for a given peak intensity in W/cm^2.
double field_from_intensity(double i_wcm2);

}  // namespace qdyn::units
