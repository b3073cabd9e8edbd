#include "qplas/shell_quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qplas/gauss_legendre.hpp"

namespace qplas {

SphereQuadrature make_shell_quadrature(int n_theta, int n_phi, const Eigen::Matrix3d& frame) {
  if (n_theta < 2 || n_phi < 2)
    throw std::invalid_argument("shell quadrature needs n_theta >= 2 and n_phi >= 2");
  SphereQuadrature q;
  q.n_theta = n_theta;
  q.n_phi = n_phi;
  const auto mu = gauss_legendre(n_theta, 0.0, 1.0);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  q.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  q.weights.reserve(q.nodes.capacity());
  for (int i = 0; i < n_theta; ++i) {
    const double ct = mu.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * dphi;
      Vec3 k = frame * Vec3(st * std::cos(phi), st * std::sin(phi), ct);
      if (k.z() < 0.0) k = -k;
      q.nodes.push_back(k.normalized());
      q.weights.push_back(mu.weights[i] * dphi);
    }
  }
  return q;
}

}  // namespace qplas
