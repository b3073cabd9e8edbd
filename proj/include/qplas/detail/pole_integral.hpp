#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qplas/gauss_legendre.hpp"

namespace qplas {

template <class F>
cplx pole_integral(F&& f, double lambda, const PoleQuadrature& quad) {
  if (!(lambda > 0.0)) throw std::invalid_argument("pole location must be positive");
  if (quad.panels < 1 || quad.order < 1) throw std::invalid_argument("degenerate pole quadrature");
  if (!(quad.nu_max > lambda)) throw std::invalid_argument("quadrature does not bracket the pole");

  const auto ref = gauss_legendre(quad.order, 0.0, 1.0);
  auto composite = [&](double a, double b, auto&& g) {
    double sum = 0.0;
    const double width = (b - a) / quad.panels;
    for (int p = 0; p < quad.panels; ++p) {
      const double lo = a + p * width;
      for (std::size_t q = 0; q < ref.nodes.size(); ++q)
        sum += ref.weights[q] * width * g(lo + width * ref.nodes[q]);
    }
    return sum;
  };

  // 1/(nu^2 - lambda^2) = h(nu)/(nu - lambda) with h = f/(nu + lambda); the
  // symmetric interval [lambda - d, lambda + d] is folded onto (0, d].
  const bool finite_top = std::isfinite(quad.nu_max);
  const double d = finite_top ? std::min(lambda, quad.nu_max - lambda) : lambda;
  auto h = [&](double nu) { return f(nu) / (nu + lambda); };
  double pv = composite(0.0, d, [&](double t) { return (h(lambda + t) - h(lambda - t)) / t; });

  if (lambda - d > 0.0)
    pv += composite(0.0, lambda - d, [&](double nu) { return f(nu) / (nu * nu - lambda * lambda); });

  const double upper_start = lambda + d;
  if (finite_top) {
    if (quad.nu_max > upper_start)
      pv += composite(upper_start, quad.nu_max,
                      [&](double nu) { return f(nu) / (nu * nu - lambda * lambda); });
  } else {
    // nu = a/s maps [a, inf) onto (0, 1].
    const double a = upper_start;
    pv += composite(0.0, 1.0, [&](double s) {
      const double nu = a / s;
      return f(nu) * a / (a * a - lambda * lambda * s * s);
    });
  }
  const double half_residue = std::numbers::pi * f(lambda) / (2.0 * lambda);
  return {pv, half_residue};
}

}  // namespace qplas
