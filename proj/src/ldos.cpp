#include "qplas/ldos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qplas/parallel.hpp"

namespace qplas {

namespace {

constexpr double kPi = std::numbers::pi;

bool same_point(const Vec3& a, const Vec3& b) { return (a - b).squaredNorm() == 0.0; }

void require_frequency(const MediumSolver& medium, double omega) {
  if (std::abs(omega - medium.omega()) > 1e-12 * medium.omega())
    throw std::invalid_argument("emitter frequency does not match the solver frequency");
}

// e_k(x) for every column of the grid solution `e` (3 x modes).
Eigen::MatrixXcd e_at(const MediumSolver& medium, const Eigen::MatrixXcd& e,
                      const std::vector<PlaneWaveMode>& modes, const Vec3& x) {
  const auto& op = medium.op();
  if (auto k = op.voxel_at(x)) return e.middleRows<3>(3 * *k);
  Eigen::MatrixXcd out = op.scatter_at(x, e);
  for (std::size_t c = 0; c < modes.size(); ++c)
    out.col(c) += (modes[c].omega() * phi_plane_wave(modes[c], x)).cast<cplx>();
  return out;
}

// m_{s,j}(x) for every column of the all-modes grid solution (3 x 3N).
Eigen::MatrixXcd m_at(const MediumSolver& medium, const Eigen::MatrixXcd& m, const Vec3& x) {
  const auto& op = medium.op();
  if (auto k = op.voxel_at(x)) return m.middleRows<3>(3 * *k);
  Eigen::MatrixXcd out = op.scatter_at(x, m);
  const double nu = medium.omega();
  for (std::size_t s = 0; s < op.voxels(); ++s) {
    const double scale = -alpha_tilde_at(medium, s) * nu * nu;
    if (scale != 0.0) out.middleCols<3>(3 * s) += scale * op.free_green(x, op.centers()[s]);
  }
  return out;
}

std::vector<double> mode_weights(const SphereQuadrature& quad) {
  std::vector<double> w;
  w.reserve(4 * quad.size());
  for (double wn : quad.weights)
    for (int s = 0; s < 4; ++s) w.push_back(wn);
  return w;
}

RealDyadic im_green_from_fields(const MediumSolver& medium, const Vec3& x,
                                const Eigen::MatrixXcd& fields_x) {
  RealDyadic out = (medium.omega() / (6.0 * kPi)) * RealDyadic::Identity();
  if (!medium.grid().empty()) out += Dyadic(medium.op().scatter_at(x, fields_x)).imag();
  return out;
}

}  // namespace

void EmitterSpec::validate() const {
  if (!(omega_a > 0.0)) throw std::invalid_argument("emitter omega_a must be > 0");
  if (!(d.norm() > 0.0)) throw std::invalid_argument("emitter dipole must be nonzero");
  if (!r_a.allFinite() || !d.allFinite()) throw std::invalid_argument("emitter is not finite");
}

std::vector<PlaneWaveMode> shell_modes(const SphereQuadrature& quad, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
  std::vector<PlaneWaveMode> modes;
  modes.reserve(4 * quad.size());
  for (const Vec3& khat : quad.nodes)
    for (auto sigma : {Polarization::Plus, Polarization::Minus})
      for (auto zeta : {Parity::Cos, Parity::Sin}) modes.push_back({omega * khat, sigma, zeta});
  return modes;
}

RealDyadic im_green_at(const MediumSolver& medium, const Vec3& x) { return medium.im_green_at(x); }

RealDyadic im_green_at(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                       const Vec3& x, const SolverOptions& opts) {
  return MediumSolver(grid, materials, omega, opts).im_green_at(x);
}

double LdosIdentity::contracted(const Vec3& d) const {
  const CVec3 dc = d.cast<cplx>();
  const double num = std::abs((dc.transpose() * residual_m() * dc)(0, 0));
  const double den = std::abs((dc.transpose() * im_green * dc)(0, 0));
  return num / den;
}

LdosIdentity ldos_identity(const MediumSolver& medium, const Vec3& x, const Vec3& y,
                           const SphereQuadrature& quad, bool m_form) {
  if (quad.size() == 0) throw std::invalid_argument("empty shell quadrature");
  const auto& op = medium.op();
  const double w = medium.omega();
  const bool diag = same_point(x, y);
  LdosIdentity out;
  out.has_m_form = m_form;

  const Eigen::MatrixXcd fx = medium.source_fields(x);
  const Eigen::MatrixXcd fy = diag ? fx : medium.source_fields(y);
  if (diag) {
    out.im_green = im_green_from_fields(medium, x, fx).cast<cplx>();
  } else {
    out.im_green = Dyadic(medium.evaluate(x, y, fy).imag().cast<cplx>());
  }

  const auto modes = shell_modes(quad, w);
  const auto weights = mode_weights(quad);
  const Eigen::MatrixXcd e = e_on_grid(medium, modes);
  const Eigen::MatrixXcd ex = e_at(medium, e, modes, x);
  const Eigen::MatrixXcd ey = diag ? ex : e_at(medium, e, modes, y);
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(weights.data(), weights.size());
  out.kappa_term = (kPi / (2.0 * w)) * (ex * wv.cast<cplx>().asDiagonal() * ey.adjoint());

  out.absorption_term.setZero();
  for (std::size_t i = 0; i < op.voxels(); ++i) {
    const double im = medium.medium().eps[i].imag();
    if (im == 0.0) continue;
    out.absorption_term +=
        im * fx.middleRows<3>(3 * i).transpose() * fy.middleRows<3>(3 * i).conjugate();
  }
  out.absorption_term *= w * w * op.voxel_volume();

  out.m_term.setZero();
  if (m_form && op.voxels() > 0) {
    const Eigen::MatrixXcd m = m_on_grid_all(medium);
    const Eigen::MatrixXcd mx = m_at(medium, m, x);
    const Eigen::MatrixXcd my = diag ? mx : m_at(medium, m, y);
    out.m_term = (kPi / (2.0 * w * w * w)) * op.voxel_volume() * (mx * my.adjoint());
  }
  return out;
}

double ldos_identity_residual(const MediumSolver& medium, const Vec3& x, const Vec3& y,
                              const SphereQuadrature& quad) {
  return ldos_identity(medium, x, y, quad).relative();
}

double DecayRates::compensation_error() const {
  return std::abs(gamma_e + gamma_m_direct - gamma_via_imG) / gamma_via_imG;
}

DecayRates gamma_decomposed(const MediumSolver& medium, const EmitterSpec& emitter,
                            const SphereQuadrature& quad) {
  emitter.validate();
  require_frequency(medium, emitter.omega_a);
  if (quad.size() == 0) throw std::invalid_argument("empty shell quadrature");
  const auto& op = medium.op();
  const double w = medium.omega();
  const Vec3& d = emitter.d;
  const CVec3 dc = d.cast<cplx>();
  DecayRates out;

  const auto modes = shell_modes(quad, w);
  const auto weights = mode_weights(quad);
  const Eigen::MatrixXcd ex = e_at(medium, e_on_grid(medium, modes), modes, emitter.r_a);
  double acc = 0.0;
  for (std::size_t c = 0; c < modes.size(); ++c)
    acc += weights[c] * std::norm(dc.dot(ex.col(c)));
  out.gamma_e = kPi * w * acc;

  const Eigen::MatrixXcd f = medium.source_fields(emitter.r_a);
  const RealDyadic im_g = im_green_from_fields(medium, emitter.r_a, f);
  out.gamma_via_imG = 2.0 * w * w * d.dot(im_g * d);
  out.gamma_m = out.gamma_via_imG - out.gamma_e;

  double m_acc = 0.0;
  for (std::size_t s = 0; s < op.voxels(); ++s) {
    const double a = alpha_tilde_at(medium, s);
    if (a == 0.0) continue;
    m_acc += a * a * (f.middleRows<3>(3 * s) * dc).squaredNorm();
  }
  out.gamma_m_direct = (kPi / w) * op.voxel_volume() * w * w * w * w * m_acc;
  out.gamma_total = out.gamma_e + out.gamma_m;
  out.gamma0 = w * w * w * d.squaredNorm() / (3.0 * kPi);
  return out;
}

DecayRates gamma_decomposed(const VoxelGrid& grid, const MaterialMap& materials,
                            const EmitterSpec& emitter, const SphereQuadrature& quad,
                            const SolverOptions& opts) {
  emitter.validate();
  return gamma_decomposed(MediumSolver(grid, materials, emitter.omega_a, opts), emitter, quad);
}

double purcell(const MediumSolver& medium, const EmitterSpec& emitter) {
  emitter.validate();
  require_frequency(medium, emitter.omega_a);
  const Vec3& d = emitter.d;
  const RealDyadic im_g = medium.im_green_at(emitter.r_a);
  return 6.0 * kPi / (medium.omega() * d.squaredNorm()) * d.dot(im_g * d);
}

double purcell(const VoxelGrid& grid, const MaterialMap& materials, const EmitterSpec& emitter,
               const SolverOptions& opts) {
  emitter.validate();
  return purcell(MediumSolver(grid, materials, emitter.omega_a, opts), emitter);
}

std::vector<PurcellRow> purcell_sweep(const VoxelGrid& grid, const MaterialMap& materials,
                                      const EmitterSpec& emitter, const std::vector<double>& omegas,
                                      const SphereQuadrature& quad, const SolverOptions& opts,
                                      unsigned threads) {
  if (!std::is_sorted(omegas.begin(), omegas.end()))
    throw std::invalid_argument("purcell sweep frequencies must be sorted ascending");
  std::vector<PurcellRow> rows(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t i) {
    PurcellRow& row = rows[i];
    row.omega = omegas[i];
    try {
      EmitterSpec em = emitter;
      em.omega_a = omegas[i];
      em.validate();
      const MediumSolver medium(grid, materials, em.omega_a, opts);
      const DecayRates g = gamma_decomposed(medium, em, quad);
      row.purcell = g.gamma_via_imG / g.gamma0;
      row.gamma_e = g.gamma_e;
      row.gamma_m = g.gamma_m;
      row.identity_residual = ldos_identity(medium, em.r_a, em.r_a, quad, false).relative();
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });
  return rows;
}

}  // namespace qplas
