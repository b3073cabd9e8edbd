#include "qplas/permittivity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qplas {

void PermittivityModel::validate() const {
  for (const auto& p : poles) {
    if (!std::isfinite(p.omega0) || !std::isfinite(p.omegap) || !std::isfinite(p.gamma))
      throw std::invalid_argument("region " + std::to_string(region_id) + ": non-finite pole parameter");
    if (p.omegap < 0.0)
      throw std::invalid_argument("region " + std::to_string(region_id) + ": omegap must be >= 0");
    if (!(p.gamma > 0.0))
      throw std::invalid_argument("region " + std::to_string(region_id) + ": gamma must be > 0");
    if (p.omega0 < 0.0)
      throw std::invalid_argument("region " + std::to_string(region_id) + ": omega0 must be >= 0");
  }
}

bool PermittivityModel::is_vacuum() const {
  for (const auto& p : poles)
    if (p.omegap != 0.0) return false;
  return true;
}

PermittivityModel PermittivityModel::with_coupling_scale(double s) const {
  if (s < 0.0) throw std::invalid_argument("coupling scale must be >= 0");
  PermittivityModel out = *this;
  const double f = std::sqrt(s);
  for (auto& p : out.poles) p.omegap *= f;
  return out;
}

cplx eval_eps(const PermittivityModel& model, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("eval_eps: omega must be > 0");
  cplx eps{1.0, 0.0};
  for (const auto& p : model.poles)
    eps += p.omegap * p.omegap / cplx(p.omega0 * p.omega0 - omega * omega, -p.gamma * omega);
  return eps;
}

double coupling_alpha_tilde(const PermittivityModel& model, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("coupling_alpha_tilde: nu must be > 0");
  const double im = eval_eps(model, nu).imag();
  if (im < 0.0)
    throw std::domain_error("Im eps < 0 in region " + std::to_string(model.region_id) +
                            " (model violates passivity)");
  return std::sqrt(2.0 * nu * im / std::numbers::pi);
}

cplx kk_integral(const PermittivityModel& model, double lambda, const PoleQuadrature& quad) {
  auto alpha_sq = [&](double nu) {
    return nu > 0.0 ? 2.0 * nu * eval_eps(model, nu).imag() / std::numbers::pi : 0.0;
  };
  return pole_integral(alpha_sq, lambda, quad);
}

double kk_residual(const PermittivityModel& model, double lambda, const PoleQuadrature& quad) {
  if (!(lambda > 0.0)) throw std::invalid_argument("kk_residual: lambda must be > 0");
  return std::abs(kk_integral(model, lambda, quad) - (eval_eps(model, lambda) - 1.0));
}

}  // namespace qplas
