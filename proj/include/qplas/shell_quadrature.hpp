#pragma once

#include <vector>

#include "qplas/types.hpp"

namespace qplas {

/// Direction rule on the half sphere k_z >= 0. Weights sum to 2 pi; the
/// radial Jacobian omega^2/c^3 of the on-shell delta is applied by callers.
struct SphereQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int n_theta = 0;
  int n_phi = 0;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre in cos(theta) on [0, 1] times a uniform phi grid.
/// `frame` rotates the rule; rotated nodes that land in k_z < 0 are
/// reflected through the origin, which leaves every integrand that is even
/// in k (all sums over both parities are) unchanged.
SphereQuadrature make_shell_quadrature(int n_theta, int n_phi,
                                       const Eigen::Matrix3d& frame = Eigen::Matrix3d::Identity());

}  // namespace qplas
