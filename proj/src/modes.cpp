#include "qplas/modes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qplas {

namespace {

constexpr double kPi = std::numbers::pi;

void require_on_shell(const MediumSolver& medium, const PlaneWaveMode& mode) {
  const double w = mode.omega();
  if (!(w > 0.0)) throw std::invalid_argument("plane-wave mode needs |k| > 0");
  if (std::abs(w - medium.omega()) > 1e-12 * medium.omega())
    throw std::invalid_argument("mode frequency c|k| does not match the solver frequency");
}

void require_voxel(const MediumSolver& medium, std::size_t i) {
  if (i >= medium.grid().size()) throw std::out_of_range("voxel index outside the grid");
}

void require_direction(int j) {
  if (j < 0 || j > 2) throw std::out_of_range("direction index must be 0, 1 or 2");
}

CVec3 omega_phi(const PlaneWaveMode& mode, const Vec3& r) {
  return (mode.omega() * phi_plane_wave(mode, r)).cast<cplx>();
}

const PermittivityModel& model_of(const MediumSolver& medium, const MaterialMap& materials,
                                  std::size_t i) {
  const int id = medium.grid().region[i];
  const auto it = materials.find(id);
  if (it == materials.end()) throw ConfigError("unknown region_id " + std::to_string(id));
  return it->second;
}

void check_pole_floor(double nup, double lambda, double rel_floor) {
  if (!(nup > 0.0)) throw std::invalid_argument("nu' must be > 0");
  if (std::abs(nup * nup - lambda * lambda) < rel_floor * lambda * lambda)
    throw std::domain_error("nu' is within the near-singular floor of the on-shell pole");
}

}  // namespace

std::vector<FieldCoefficientSample> to_samples(std::span<const Vec3> points,
                                               const std::vector<CVec3>& values, double omega) {
  if (points.size() != values.size()) throw std::invalid_argument("points/values size mismatch");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
  std::vector<FieldCoefficientSample> out;
  out.reserve(points.size());
  const double pref = std::sqrt(1.0 / (2.0 * omega));
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back({points[i], values[i], pref});
  return out;
}

double alpha_tilde_at(const MediumSolver& medium, std::size_t i) {
  require_voxel(medium, i);
  const double im = medium.medium().eps[i].imag();
  if (im < 0.0) throw std::domain_error("Im eps < 0: medium is not passive");
  return std::sqrt(2.0 * medium.omega() * im / kPi);
}

Eigen::MatrixXcd e_on_grid(const MediumSolver& medium, std::span<const PlaneWaveMode> modes) {
  const auto& op = medium.op();
  Eigen::MatrixXcd rhs(op.unknowns(), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t c = 0; c < modes.size(); ++c) {
    require_on_shell(medium, modes[c]);
    for (std::size_t i = 0; i < op.voxels(); ++i)
      rhs.block<3, 1>(3 * i, c) = omega_phi(modes[c], op.centers()[i]);
  }
  return medium.solver().solve(rhs);
}

PolarizationField e_on_grid(const MediumSolver& medium, const PlaneWaveMode& mode) {
  return e_on_grid(medium, std::span<const PlaneWaveMode>(&mode, 1)).col(0);
}

std::vector<CVec3> e_coefficient(const MediumSolver& medium, const PlaneWaveMode& mode,
                                 std::span<const Vec3> points, Route route) {
  require_on_shell(medium, mode);
  const auto& op = medium.op();
  std::vector<CVec3> out;
  out.reserve(points.size());

  if (route == Route::Fredholm) {
    const Eigen::MatrixXcd e = e_on_grid(medium, mode);
    for (const Vec3& r : points) {
      if (auto k = op.voxel_at(r)) {
        out.push_back(e.block<3, 1>(3 * *k, 0));
      } else {
        out.push_back(omega_phi(mode, r) + op.scatter_at(r, e).col(0));
      }
    }
    return out;
  }

  // e(r) = w Phi(r) + dV sum_i G(r, z_i) beta_i w Phi(z_i), G(r, z_i) = G(z_i, r)^T.
  for (const Vec3& r : points) {
    const Eigen::MatrixXcd f = medium.source_fields(r);
    CVec3 acc = CVec3::Zero();
    for (std::size_t i = 0; i < op.voxels(); ++i) {
      if (op.beta()[i] == 0.0) continue;
      acc += op.beta()[i] * (f.middleRows<3>(3 * i).transpose() * omega_phi(mode, op.centers()[i]));
    }
    out.push_back(omega_phi(mode, r) + op.voxel_volume() * acc);
  }
  return out;
}

std::vector<CVec3> m_coefficient(const MediumSolver& medium, const MedModeIndex& mode,
                                 std::span<const Vec3> points, Route route) {
  require_voxel(medium, mode.voxel);
  require_direction(mode.j);
  if (std::abs(mode.nu - medium.omega()) > 1e-12 * medium.omega())
    throw std::invalid_argument("medium mode frequency does not match the solver frequency");
  const auto& op = medium.op();
  const Vec3& xs = op.centers()[mode.voxel];
  const double nu = mode.nu;
  const double scale = -alpha_tilde_at(medium, mode.voxel) * nu * nu;

  std::vector<CVec3> out;
  out.reserve(points.size());
  if (scale == 0.0) {
    out.assign(points.size(), CVec3::Zero());
    return out;
  }

  if (route == Route::Fredholm) {
    const Eigen::MatrixXcd rhs = scale * op.free_column(xs).col(mode.j);
    const Eigen::MatrixXcd m = medium.solver().solve(rhs);
    for (const Vec3& r : points) {
      if (auto k = op.voxel_at(r)) {
        out.push_back(m.block<3, 1>(3 * *k, 0));
      } else {
        out.push_back(scale * op.free_green(r, xs).col(mode.j) + op.scatter_at(r, m).col(0));
      }
    }
    return out;
  }

  for (const Vec3& r : points) {
    const Eigen::MatrixXcd f = medium.source_fields(r);
    // G(r, x_s) n_j is row j of G(x_s, r).
    out.push_back(scale * f.block<3, 3>(3 * mode.voxel, 0).row(mode.j).transpose());
  }
  return out;
}

Eigen::MatrixXcd m_on_grid_all(const MediumSolver& medium) {
  const auto& op = medium.op();
  const std::size_t n = op.voxels();
  const double nu = medium.omega();
  Eigen::MatrixXcd rhs(op.unknowns(), op.unknowns());
  for (std::size_t s = 0; s < n; ++s) {
    const double scale = -alpha_tilde_at(medium, s) * nu * nu / op.voxel_volume();
    for (std::size_t i = 0; i < n; ++i)
      rhs.block<3, 3>(3 * i, 3 * s) = scale * op.kernel_block(i, s);
  }
  return medium.solver().solve(rhs);
}

CVec3 v_component_e(double alpha_tilde_p, const CVec3& e_at_xp, double omega, double nup,
                    double rel_floor) {
  check_pole_floor(nup, omega, rel_floor);
  return -alpha_tilde_p * e_at_xp / (nup * nup - omega * omega);
}

CVec3 v_component_e(const MediumSolver& medium, const MaterialMap& materials,
                    const PlaneWaveMode& mode, std::size_t xp, double nup, double rel_floor) {
  require_voxel(medium, xp);
  check_pole_floor(nup, mode.omega(), rel_floor);
  const double a = coupling_alpha_tilde(model_of(medium, materials, xp), nup);
  if (a == 0.0) return CVec3::Zero();
  const PolarizationField e = e_on_grid(medium, mode);
  return v_component_e(a, e.segment<3>(3 * xp), mode.omega(), nup, rel_floor);
}

cplx u_numerator_e(const MediumSolver& medium, const PlaneWaveMode& mode, const PlaneWaveMode& probe) {
  if (!(probe.omega() > 0.0)) throw std::invalid_argument("probe mode needs |k| > 0");
  const auto& op = medium.op();
  const PolarizationField e = e_on_grid(medium, mode);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < op.voxels(); ++i) {
    const cplx chi = medium.medium().eps[i] - 1.0;
    if (chi == 0.0) continue;
    const CVec3 ev = -chi * e.segment<3>(3 * i);
    acc += omega_phi(probe, op.centers()[i]).cwiseProduct(ev).sum();
  }
  return op.voxel_volume() * acc;
}

MediumVComponent v_component_m(const MediumSolver& medium, const MaterialMap& materials,
                               const MedModeIndex& mode, std::size_t xp, double nup,
                               double rel_floor) {
  require_voxel(medium, xp);
  check_pole_floor(nup, mode.nu, rel_floor);
  MediumVComponent out;
  out.has_delta = xp == mode.voxel;
  out.delta_direction = mode.j;
  const double a = coupling_alpha_tilde(model_of(medium, materials, xp), nup);
  if (a == 0.0) return out;
  const Vec3 x = medium.grid().centers[xp];
  const CVec3 m = m_coefficient(medium, mode, std::span<const Vec3>(&x, 1), Route::Fredholm)[0];
  out.smooth = -a * m / (nup * nup - mode.nu * mode.nu);
  return out;
}

cplx u_numerator_m(const MediumSolver& medium, const MedModeIndex& mode, const PlaneWaveMode& probe) {
  if (!(probe.omega() > 0.0)) throw std::invalid_argument("probe mode needs |k| > 0");
  const auto& op = medium.op();
  const double a = alpha_tilde_at(medium, mode.voxel);
  require_direction(mode.j);
  if (a == 0.0) return 0.0;
  const double nu = mode.nu;
  const Eigen::MatrixXcd rhs = (-a * nu * nu) * op.free_column(op.centers()[mode.voxel]).col(mode.j);
  const Eigen::MatrixXcd m = medium.solver().solve(rhs);

  // Delta part of m^v integrates to alpha~ w' Phi'_j(x_mu).
  cplx acc = a * omega_phi(probe, op.centers()[mode.voxel])(mode.j);
  cplx smooth = 0.0;
  for (std::size_t i = 0; i < op.voxels(); ++i) {
    const cplx chi = medium.medium().eps[i] - 1.0;
    if (chi == 0.0) continue;
    smooth += -chi * omega_phi(probe, op.centers()[i]).cwiseProduct(m.block<3, 1>(3 * i, 0)).sum();
  }
  return acc + op.voxel_volume() * smooth;
}

NoiseCurrent noise_current_amplitude(const MediumSolver& medium, std::size_t x) {
  require_voxel(medium, x);
  const double nu = medium.omega();
  const double im = medium.medium().eps[x].imag();
  if (im < 0.0) throw std::domain_error("Im eps < 0: medium is not passive");
  return {-kI * nu * std::sqrt(im / kPi),
          "E_m(r) = int dnu int d^3x [ i nu G(r, x, nu) . j(x, nu) + h.c. ], "
          "j_k(x, nu) = amplitude * f_k(x, nu)"};
}

CVec3 smooth_v_integral(const PermittivityModel& model, const CVec3& c, double lambda,
                        const PoleQuadrature& quad) {
  const cplx integral = pole_integral(
      [&](double nu) {
        const double a = coupling_alpha_tilde(model, nu);
        return a * a;
      },
      lambda, quad);
  return -integral * c;
}

}  // namespace qplas
