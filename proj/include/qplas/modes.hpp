#pragma once

#include <span>
#include <string>
#include <vector>

#include "qplas/green_free.hpp"
#include "qplas/permittivity.hpp"
#include "qplas/vie_solver.hpp"

namespace qplas {

/// Medium oscillator label mu = (x, nu, j); x is a voxel index of the grid.
struct MedModeIndex {
  std::size_t voxel = 0;
  double nu = 0.0;
  int j = 0;  // 0, 1, 2 for x, y, z
};

/// A field coefficient value with its operator prefactor sqrt(hbar / 2 eps0 w)
/// (internal units: 1/sqrt(2 w)).
struct FieldCoefficientSample {
  Vec3 location = Vec3::Zero();
  CVec3 value = CVec3::Zero();
  double prefactor = 0.0;
};

std::vector<FieldCoefficientSample> to_samples(std::span<const Vec3> points,
                                               const std::vector<CVec3>& values, double omega);

/// Fredholm: solve on V, then evaluate. Green: contract precomputed medium
/// Green columns with the free-field source. Both are exact discrete identities.
enum class Route { Fredholm, Green };

/// alpha~ at voxel `i` of the solver's medium.
double alpha_tilde_at(const MediumSolver& medium, std::size_t i);

/// e_k restricted to V (solve of (I - G0 beta) e = w Phi).
PolarizationField e_on_grid(const MediumSolver& medium, const PlaneWaveMode& mode);
/// Batched version: one column per mode, all modes on the solver's shell.
Eigen::MatrixXcd e_on_grid(const MediumSolver& medium, std::span<const PlaneWaveMode> modes);

/// e_k(r) at each point. The mode must lie on the solver's frequency shell.
std::vector<CVec3> e_coefficient(const MediumSolver& medium, const PlaneWaveMode& mode,
                                 std::span<const Vec3> points, Route route = Route::Fredholm);

/// m_mu(r) = -alpha~(x, nu) nu^2 G(r, x, nu) n_j. The solver runs at nu.
std::vector<CVec3> m_coefficient(const MediumSolver& medium, const MedModeIndex& mode,
                                 std::span<const Vec3> points, Route route = Route::Green);

/// m_mu restricted to V for every (voxel, j) at once: column 3 s + j is
/// m_{s,nu,j} on the grid (Fredholm route).
Eigen::MatrixXcd m_on_grid_all(const MediumSolver& medium);

/// -alpha~(x', nu') e_k(x') / (nu'^2 - w^2). Throws std::domain_error when
/// |nu'^2 - w^2| < rel_floor w^2.
CVec3 v_component_e(const MediumSolver& medium, const MaterialMap& materials,
                    const PlaneWaveMode& mode, std::size_t xp, double nup, double rel_floor = 1e-6);
CVec3 v_component_e(double alpha_tilde_p, const CVec3& e_at_xp, double omega, double nup,
                    double rel_floor = 1e-6);

/// int_V d^3r w' Phi_k'(r) . e^v_k(r) with e^v = -(eps - 1) e, as a voxel sum.
cplx u_numerator_e(const MediumSolver& medium, const PlaneWaveMode& mode, const PlaneWaveMode& probe);

/// v^m split into its symbolic delta part and the smooth remainder
/// -alpha~(x', nu') m_mu(x') / (nu'^2 - nu^2).
struct MediumVComponent {
  bool has_delta = false;  // delta(x - x') delta(nu - nu') n_j
  int delta_direction = 0;
  CVec3 smooth = CVec3::Zero();
};

MediumVComponent v_component_m(const MediumSolver& medium, const MaterialMap& materials,
                               const MedModeIndex& mode, std::size_t xp, double nup,
                               double rel_floor = 1e-6);

/// int_V d^3r w' Phi_k'(r) . m^v_mu(r) with m^v = alpha~ delta(r - x) n_j - (eps - 1) m.
cplx u_numerator_m(const MediumSolver& medium, const MedModeIndex& mode, const PlaneWaveMode& probe);

/// Amplitude of the noise current at (x, nu): -i nu sqrt(Im eps / pi) per
/// direction, with the pairing rule for the medium field.
struct NoiseCurrent {
  cplx amplitude = 0.0;
  std::string pairing;
};

NoiseCurrent noise_current_amplitude(const MediumSolver& medium, std::size_t x);

/// int dnu' alpha~(nu') v(nu') for a v of the form -alpha~(nu') c / (nu'^2 - lambda^2 - i0),
/// i.e. -(eps(lambda) - 1) c for a converged quadrature.
CVec3 smooth_v_integral(const PermittivityModel& model, const CVec3& c, double lambda,
                        const PoleQuadrature& quad);

}  // namespace qplas
