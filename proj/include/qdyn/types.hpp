#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qdyn {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VectorXd = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr Complex iunit{0.0, 1.0};

// Bad or inconsistent user input (config files, CLI arguments, fixtures).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runtime numerical failure: singular solve, non-positive-definite overlap,
// step-size collapse, NaN contamination.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Derivative coupling requested for an eigenpair closer than the degeneracy
// guard; the Hellmann-Feynman quotient is undefined there.
struct DegeneratePair : std::runtime_error {
  double gap;
  DegeneratePair(const std::string& what, double gap_in)
      : std::runtime_error(what), gap(gap_in) {}
};

}  // namespace qdyn
