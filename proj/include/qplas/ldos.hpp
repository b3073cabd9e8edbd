#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "qplas/modes.hpp"
#include "qplas/shell_quadrature.hpp"

namespace qplas {

/// Two-level emitter: position, transition frequency, real dipole (internal units).
struct EmitterSpec {
  Vec3 r_a = Vec3::Zero();
  double omega_a = 0.0;
  Vec3 d = Vec3::UnitZ();

  void validate() const;
};

/// The 4 sub-modes (sigma x zeta) of every quadrature node on the shell |k| = omega.
std::vector<PlaneWaveMode> shell_modes(const SphereQuadrature& quad, double omega);

/// Im G(x, x) at the solver frequency.
RealDyadic im_green_at(const MediumSolver& medium, const Vec3& x);
RealDyadic im_green_at(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                       const Vec3& x, const SolverOptions& opts = {});

/// Both sides of the Green tensor LDOS identity at (x, y).
struct LdosIdentity {
  Dyadic im_green;        // Im G(x, y), entrywise
  Dyadic kappa_term;      // (pi / 2 w^3) int dk e(x) e*(y) delta(w - w_k)
  Dyadic absorption_term; // w^2 int eps_i G(x, z) G*(z, y)
  Dyadic m_term;          // (pi / 2 w^3) int dmu m(x) m*(y) delta(w - nu)
  bool has_m_form = true;

  Dyadic residual_absorption() const { return im_green - kappa_term - absorption_term; }
  Dyadic residual_m() const { return im_green - kappa_term - m_term; }
  double norm() const { return im_green.norm(); }
  double relative_absorption() const { return residual_absorption().norm() / norm(); }
  double relative_m() const { return residual_m().norm() / norm(); }
  /// Relative disagreement of the two forms of the medium term.
  double forms_difference() const { return (absorption_term - m_term).norm() / norm(); }
  double relative() const {
    return has_m_form ? std::max(relative_absorption(), relative_m()) : relative_absorption();
  }
  /// |d . R . d| / (d . Im G . d) for the m-form residual R.
  double contracted(const Vec3& d) const;
};

/// `m_form` = false skips the m-coefficient form (it needs 3N extra solves).
LdosIdentity ldos_identity(const MediumSolver& medium, const Vec3& x, const Vec3& y,
                           const SphereQuadrature& quad, bool m_form = true);
/// max of the two relative Frobenius residuals.
double ldos_identity_residual(const MediumSolver& medium, const Vec3& x, const Vec3& y,
                              const SphereQuadrature& quad);

struct DecayRates {
  double gamma_e = 0.0;         // photon-continuum channel
  double gamma_m = 0.0;         // medium channel, Im G route minus gamma_e
  double gamma_m_direct = 0.0;  // medium channel from the on-shell m coefficients
  double gamma_total = 0.0;     // gamma_e + gamma_m
  double gamma_via_imG = 0.0;   // 2 w^2 d . Im G . d
  double gamma0 = 0.0;          // vacuum rate w^3 |d|^2 / 3 pi

  /// |(gamma_e + gamma_m_direct) - gamma_via_imG| / gamma_via_imG.
  double compensation_error() const;
};

DecayRates gamma_decomposed(const MediumSolver& medium, const EmitterSpec& emitter,
                            const SphereQuadrature& quad);
DecayRates gamma_decomposed(const VoxelGrid& grid, const MaterialMap& materials,
                            const EmitterSpec& emitter, const SphereQuadrature& quad,
                            const SolverOptions& opts = {});

/// P = (6 pi c / w |d|^2) d . Im G(r_a, r_a) . d; exactly 1 in vacuum.
double purcell(const MediumSolver& medium, const EmitterSpec& emitter);
double purcell(const VoxelGrid& grid, const MaterialMap& materials, const EmitterSpec& emitter,
               const SolverOptions& opts = {});

struct PurcellRow {
  double omega = 0.0;
  double purcell = 0.0;
  double gamma_e = 0.0;
  double gamma_m = 0.0;
  double identity_residual = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

/// One independent row per frequency; per-row failures are recorded and the
/// sweep continues. `emitter.omega_a` is ignored.
std::vector<PurcellRow> purcell_sweep(const VoxelGrid& grid, const MaterialMap& materials,
                                      const EmitterSpec& emitter, const std::vector<double>& omegas,
                                      const SphereQuadrature& quad, const SolverOptions& opts = {},
                                      unsigned threads = 1);

}  // namespace qplas
