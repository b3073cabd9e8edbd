#pragma once

#include <limits>
#include <map>
#include <vector>

#include "qplas/types.hpp"

namespace qplas {

/// One damped oscillator term wp^2 / (w0^2 - w^2 - i g w). w0 = 0 is Drude.
struct LorentzPole {
  double omega0 = 0.0;
  double omegap = 0.0;
  double gamma = 0.0;
};

/// Dielectric function of one material region as a sum of Lorentz poles.
/// An empty pole list is vacuum.
struct PermittivityModel {
  int region_id = 0;
  std::vector<LorentzPole> poles;

  /// Throws std::invalid_argument if a pole has omegap < 0, gamma <= 0 or omega0 < 0.
  void validate() const;
  bool is_vacuum() const;
  /// Same material with (eps - 1) multiplied by s (each omegap scaled by sqrt(s)).
  PermittivityModel with_coupling_scale(double s) const;
};

using MaterialMap = std::map<int, PermittivityModel>;

cplx eval_eps(const PermittivityModel& model, double omega);

/// alpha~(nu) = sqrt(2 nu Im eps(nu) / pi).
double coupling_alpha_tilde(const PermittivityModel& model, double nu);

/// Composite Gauss-Legendre layout for the frequency integrals that carry
/// the -i0+ pole prescription.
struct PoleQuadrature {
  int panels = 256;
  int order = 10;
  double nu_max = std::numeric_limits<double>::infinity();
};

/// Integral over nu in (0, nu_max) of f(nu) / (nu^2 - lambda^2 - i0+),
/// principal value plus the analytic half residue i pi f(lambda) / (2 lambda).
/// `f` must be smooth near lambda.
template <class F>
cplx pole_integral(F&& f, double lambda, const PoleQuadrature& quad);

/// Same integral with f = alpha~^2 of `model`; equals eps(lambda) - 1 when the
/// quadrature is converged.
cplx kk_integral(const PermittivityModel& model, double lambda, const PoleQuadrature& quad);

/// |kk_integral - (eps(lambda) - 1)|.
double kk_residual(const PermittivityModel& model, double lambda, const PoleQuadrature& quad);

}  // namespace qplas

#include "qplas/detail/pole_integral.hpp"
