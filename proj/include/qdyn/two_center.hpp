#pragma once

#include <algorithm>
#include <cmath>

#include "qdyn/orbital.hpp"
#include "qdyn/types.hpp"
#include "qdyn/units.hpp"

// Closed-form two-center integrals over Cartesian Gaussians via the Gaussian
// product theorem. Conventions used everywhere:
//   d = X_bra - X_ket  (bra center relative to the ket center),
//   u = r - X_ket      (ket-centered integration variable),
// so the bra factor is phi_b(u - d) and the ket factor phi_k(u).
// The dipole moment is taken about the ket center (operator u), which makes
// mu0 deliberately non-symmetric: mu0(b,k) - mu0(k,b) = q d S0.
// The momentum element is purely imaginary: p0 = i * momentum_p0_im(...),
// and equals -i hbar dS0/dd identically for this basis (off-site and on-site
// alike, the latter read as the single-sided derivative moving only the ket).

namespace qdyn {

namespace detail {

// 1D moment integral
//   s1(mb, mk, d, ab, ak) = int (u-d)^mb u^mk exp(-ab (u-d)^2 - ak u^2) du
// by shifting to the product-Gaussian center and summing even moments.
inline double s1(int mb, int mk, double d, double ab, double ak) {
  const double gamma = ab + ak;
  const double xi = ab * ak / gamma;
  const double pa = -(ak / gamma) * d;  // bra offset from product center
  const double pb = (ab / gamma) * d;   // ket offset from product center

  // Coefficients of (v+pa)^mb (v+pb)^mk, degree <= 8 is ample here.
  double ca[9] = {}, cb[9] = {}, c[9] = {};
  ca[0] = 1.0;
  for (int i = 0; i < mb; ++i) {
    for (int j = i + 1; j > 0; --j) ca[j] = ca[j - 1] + pa * ca[j];
    ca[0] *= pa;
  }
  cb[0] = 1.0;
  for (int i = 0; i < mk; ++i) {
    for (int j = i + 1; j > 0; --j) cb[j] = cb[j - 1] + pb * cb[j];
    cb[0] *= pb;
  }
  for (int i = 0; i <= mb; ++i)
    for (int j = 0; j <= mk; ++j) c[i + j] += ca[i] * cb[j];

  // Even central moments: int v^n e^{-gamma v^2} dv = sqrt(pi/gamma) (n-1)!!/(2 gamma)^{n/2}.
  const double m0 = std::sqrt(M_PI / gamma);
  double total = 0.0;
  double moment = m0;
  double dfact = 1.0;
  for (int n = 0; n <= mb + mk; n += 2) {
    if (n > 0) {
      dfact *= n - 1;
      moment = m0 * dfact / std::pow(2.0 * gamma, n / 2);
    }
    total += c[n] * moment;
  }
  return std::exp(-xi * d * d) * total;
}

// d/dd of s1 at fixed operator content: the displacement enters through the
// bra factor only, so differentiate (u-d)^mb exp(-ab (u-d)^2).
inline double s1_dd(int mb, int mk, double d, double ab, double ak) {
  double t = 2.0 * ab * s1(mb + 1, mk, d, ab, ak);
  if (mb > 0) t -= mb * s1(mb - 1, mk, d, ab, ak);
  return t;
}

struct AxisPowers {
  std::array<int, 3> nb, nk;
  Vec3 d;
  double ab, ak;

  double plain(int ax) const { return s1(nb[ax], nk[ax], d[ax], ab, ak); }
  double boosted(int ax) const { return s1(nb[ax], nk[ax] + 1, d[ax], ab, ak); }
  double dd(int ax) const { return s1_dd(nb[ax], nk[ax], d[ax], ab, ak); }
  double dd_boosted(int ax) const { return s1_dd(nb[ax], nk[ax] + 1, d[ax], ab, ak); }
};

inline AxisPowers axis_powers(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  return {b.powers(), k.powers(), d, b.alpha, k.alpha};
}

}  // namespace detail

// Pairwise interaction radius: beyond this every two-center element is
// truncated to exactly zero (the analytic value is below ~1e-21 there).
inline double pair_r_cut(const OrbitalShell& b, const OrbitalShell& k) {
  return 10.0 / std::sqrt(std::min(b.alpha, k.alpha));
}

inline double overlap_s0(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  if (d.norm() > pair_r_cut(b, k)) return 0.0;
  const auto ap = detail::axis_powers(b, k, d);
  return b.norm() * k.norm() * ap.plain(0) * ap.plain(1) * ap.plain(2);
}

// Gradient of S0 with respect to d (equivalently the bra center).
inline Vec3 overlap_ds0(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  if (d.norm() > pair_r_cut(b, k)) return Vec3::Zero();
  const auto ap = detail::axis_powers(b, k, d);
  const double nn = b.norm() * k.norm();
  const double f[3] = {ap.plain(0), ap.plain(1), ap.plain(2)};
  Vec3 g;
  for (int kk = 0; kk < 3; ++kk) {
    double t = nn * ap.dd(kk);
    for (int ax = 0; ax < 3; ++ax)
      if (ax != kk) t *= f[ax];
    g[kk] = t;
  }
  return g;
}

// Dipole moment about the ket center, electron charge included:
// mu0_j = q <b(u-d)| u_j |k(u)>.
inline Vec3 dipole_mu0(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  if (d.norm() > pair_r_cut(b, k)) return Vec3::Zero();
  const auto ap = detail::axis_powers(b, k, d);
  const double nn = units::q_electron * b.norm() * k.norm();
  const double f[3] = {ap.plain(0), ap.plain(1), ap.plain(2)};
  Vec3 mu;
  for (int j = 0; j < 3; ++j) {
    double t = nn * ap.boosted(j);
    for (int ax = 0; ax < 3; ++ax)
      if (ax != j) t *= f[ax];
    mu[j] = t;
  }
  return mu;
}

// J(j, kk) = d mu0_j / d d_kk.
inline Mat3 dipole_dmu0(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  if (d.norm() > pair_r_cut(b, k)) return Mat3::Zero();
  const auto ap = detail::axis_powers(b, k, d);
  const double nn = units::q_electron * b.norm() * k.norm();
  Mat3 jac;
  for (int j = 0; j < 3; ++j) {
    for (int kk = 0; kk < 3; ++kk) {
      double t = nn;
      for (int ax = 0; ax < 3; ++ax) {
        if (ax == j && ax == kk) t *= ap.dd_boosted(ax);
        else if (ax == j) t *= ap.boosted(ax);
        else if (ax == kk) t *= ap.dd(ax);
        else t *= ap.plain(ax);
      }
      jac(j, kk) = t;
    }
  }
  return jac;
}

// Momentum element p0 = -i hbar <b(u-d)| del_u |k(u)> = i * (this function).
// Identical to -hbar * dS0/dd, which is the discrete-basis form of
// p0 = i hbar dS0/dX_ket for distinct sites.
inline Vec3 momentum_p0_im(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  return -units::hbar * overlap_ds0(b, k, d);
}

// W(j, kk) = d (p0_im)_j / d d_kk; symmetric in (j, kk) since both are
// derivatives of S0.
inline Mat3 momentum_dp0_im(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d) {
  if (d.norm() > pair_r_cut(b, k)) return Mat3::Zero();
  const auto ap = detail::axis_powers(b, k, d);
  const double nn = -units::hbar * b.norm() * k.norm();
  Mat3 w;
  for (int j = 0; j < 3; ++j) {
    for (int kk = 0; kk <= j; ++kk) {
      double t = nn;
      if (j == kk) {
        // second derivative along one axis
        const int mb = ap.nb[j], mk = ap.nk[j];
        double s = 4.0 * ap.ab * ap.ab * detail::s1(mb + 2, mk, d[j], ap.ab, ap.ak) -
                   2.0 * ap.ab * (2 * mb + 1) * detail::s1(mb, mk, d[j], ap.ab, ap.ak);
        if (mb > 1) s += mb * (mb - 1) * detail::s1(mb - 2, mk, d[j], ap.ab, ap.ak);
        t *= s;
        for (int ax = 0; ax < 3; ++ax)
          if (ax != j) t *= ap.plain(ax);
      } else {
        for (int ax = 0; ax < 3; ++ax) {
          if (ax == j || ax == kk) t *= ap.dd(ax);
          else t *= ap.plain(ax);
        }
      }
      w(j, kk) = t;
      w(kk, j) = t;
    }
  }
  return w;
}

// Off-site extended-Hueckel Hamiltonian: k_eff * S0 * (eps_b + eps_k)/2.
// Same-atom elements are not formed here; the matrix assembly writes the
// diagonal eps directly.
inline double hamiltonian_h0(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d,
                             double k_eff) {
  return k_eff * 0.5 * (b.epsilon + k.epsilon) * overlap_s0(b, k, d);
}

inline Vec3 hamiltonian_dh0(const OrbitalShell& b, const OrbitalShell& k, const Vec3& d,
                            double k_eff) {
  return k_eff * 0.5 * (b.epsilon + k.epsilon) * overlap_ds0(b, k, d);
}

}  // namespace qdyn
