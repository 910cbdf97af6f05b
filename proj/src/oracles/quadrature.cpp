#include "qdyn/oracles/quadrature.hpp"

#include <cmath>
#include <map>
#include <vector>

#include "qdyn/units.hpp"

namespace qdyn::oracles {

namespace {

struct GLRule {
  std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Gauss-Legendre nodes by Newton iteration on P_n; cached per order.
const GLRule& gl_rule(int n) {
  static std::map<int, GLRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GLRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

struct Grid1D {
  std::vector<double> x, w;
};

// Two GL panels per axis, split at the Gaussian-product center.
Grid1D axis_grid(double center, double halfwidth, int order) {
  const GLRule& r = gl_rule(order);
  Grid1D g;
  g.x.reserve(2 * order);
  g.w.reserve(2 * order);
  for (int panel = 0; panel < 2; ++panel) {
    const double lo = center + (panel - 1) * halfwidth;
    const double hi = lo + halfwidth;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < order; ++i) {
      g.x.push_back(mid + half * r.x[i]);
      g.w.push_back(half * r.w[i]);
    }
  }
  return g;
}

// Five-point stencil gradient of the ket orbital, step scaled to its width.
Vec3 ket_gradient_fd(const OrbitalShell& ket, const Vec3& u, long& evals) {
  const double h = 1e-3 / std::sqrt(ket.alpha);
  Vec3 grad;
  for (int ax = 0; ax < 3; ++ax) {
    Vec3 e = Vec3::Zero();
    e[ax] = h;
    const double f1 = ket.evaluate(u + 2.0 * e);
    const double f2 = ket.evaluate(u + e);
    const double f3 = ket.evaluate(u - e);
    const double f4 = ket.evaluate(u - 2.0 * e);
    evals += 4;
    grad[ax] = (-f1 + 8.0 * f2 - 8.0 * f3 + f4) / (12.0 * h);
  }
  return grad;
}

Eigen::Vector3cd integrate(ElementKind kind, const OrbitalShell& bra, const OrbitalShell& ket,
                           const Vec3& d, int order, long& evals) {
  const double gamma = bra.alpha + ket.alpha;
  const double hw = 10.0 / std::sqrt(gamma);
  Grid1D gx = axis_grid(bra.alpha * d[0] / gamma, hw, order);
  Grid1D gy = axis_grid(bra.alpha * d[1] / gamma, hw, order);
  Grid1D gz = axis_grid(bra.alpha * d[2] / gamma, hw, order);

  Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
  for (size_t ix = 0; ix < gx.x.size(); ++ix) {
    for (size_t iy = 0; iy < gy.x.size(); ++iy) {
      for (size_t iz = 0; iz < gz.x.size(); ++iz) {
        const Vec3 u(gx.x[ix], gy.x[iy], gz.x[iz]);
        const double wgt = gx.w[ix] * gy.w[iy] * gz.w[iz];
        const double fb = bra.evaluate(u - d);
        evals += 1;
        switch (kind) {
          case ElementKind::overlap: {
            const double fk = ket.evaluate(u);
            evals += 1;
            acc[0] += wgt * fb * fk;
            break;
          }
          case ElementKind::dipole: {
            const double fk = ket.evaluate(u);
            evals += 1;
            const double base = wgt * fb * fk * units::q_electron;
            for (int j = 0; j < 3; ++j) acc[j] += base * u[j];
            break;
          }
          case ElementKind::momentum: {
            const Vec3 grad = ket_gradient_fd(ket, u, evals);
            for (int j = 0; j < 3; ++j)
              acc[j] += wgt * fb * (-iunit * units::hbar) * grad[j];
            break;
          }
        }
      }
    }
  }
  return acc;
}

}  // namespace

QuadratureResult quadrature_matrix_element(ElementKind kind, const OrbitalShell& bra,
                                           const OrbitalShell& ket, const Vec3& d, double tol) {
  static const int orders[] = {28, 40, 56, 72};
  QuadratureResult res;
  Eigen::Vector3cd prev = integrate(kind, bra, ket, d, orders[0], res.evals);
  for (size_t i = 1; i < std::size(orders); ++i) {
    const Eigen::Vector3cd next = integrate(kind, bra, ket, d, orders[i], res.evals);
    res.err = (next - prev).cwiseAbs().maxCoeff();
    res.value = next;
    const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
    if (res.err < tol * scale) return res;
    prev = next;
  }
  return res;
}

}  // namespace qdyn::oracles
