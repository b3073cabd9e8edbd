#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qplas {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

/// 3x3 complex sample of a Green tensor (internal units: 1/length).
using Dyadic = Eigen::Matrix3cd;
using RealDyadic = Eigen::Matrix3d;

inline constexpr cplx kI{0.0, 1.0};

/// Malformed or inconsistent scene input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear solve that did not reach its residual target.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), achieved_(achieved_residual) {}
  double achieved_residual() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace qplas
