#include "qplas/green_free.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qplas {

namespace {

constexpr double kPi = std::numbers::pi;

double separation(const Vec3& r, const Vec3& rp) {
  const double dist = (r - rp).norm();
  if (!(dist > 0.0)) throw std::invalid_argument("Green tensor evaluated at coincident points");
  return dist;
}

void require_positive(double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
}

}  // namespace

cplx scalar_green(const Vec3& r, const Vec3& rp, double omega) {
  require_positive(omega);
  const double dist = separation(r, rp);
  return std::exp(kI * (omega * dist)) / (4.0 * kPi * dist);
}

Dyadic g0_closed(const Vec3& r, const Vec3& rp, double omega) {
  require_positive(omega);
  const double dist = separation(r, rp);
  const Vec3 u = (r - rp) / dist;
  const double kr = omega * dist;
  const cplx g = std::exp(kI * kr) / (4.0 * kPi * dist);
  const double inv = 1.0 / kr;
  const cplx c_rr = 3.0 * inv * inv - 3.0 * kI * inv - 1.0;
  const cplx c_id = 1.0 + kI * inv - inv * inv;
  Dyadic out = (c_rr * g) * (u * u.transpose()).cast<cplx>();
  out.diagonal().array() += c_id * g;
  return out;
}

RealDyadic g0_longitudinal(const Vec3& r, const Vec3& rp, double omega) {
  require_positive(omega);
  const double dist = separation(r, rp);
  const Vec3 u = (r - rp) / dist;
  const double pref = 1.0 / (omega * omega * 4.0 * kPi * dist * dist * dist);
  return pref * (3.0 * u * u.transpose() - RealDyadic::Identity());
}

cplx self_term_coefficient(double voxel_volume, double omega) {
  if (!(voxel_volume > 0.0)) throw std::invalid_argument("voxel volume must be > 0");
  require_positive(omega);
  const double a = std::cbrt(3.0 * voxel_volume / (4.0 * kPi));
  const double ka = omega * a;
  const double delta = -1.0 / (3.0 * omega * omega);
  if (ka < 1e-3) {
    // Series avoids cancellation in the bracket for small ka.
    const double a2 = a * a;
    return {delta + a2 / 3.0 - a2 * ka * ka / 12.0, 2.0 * ka * a2 / 9.0 - ka * ka * ka * a2 / 45.0};
  }
  return delta + 2.0 / (3.0 * omega * omega) * ((1.0 - kI * ka) * std::exp(kI * ka) - 1.0);
}

Dyadic self_term(double voxel_volume, double omega) {
  return self_term_coefficient(voxel_volume, omega) * Dyadic::Identity();
}

std::array<Vec3, 2> polarization_basis(const Vec3& k) {
  const double n = k.norm();
  if (!(n > 0.0)) throw std::invalid_argument("polarization basis needs |k| > 0");
  const Vec3 khat = k / n;
  Eigen::Index axis = 0;
  khat.cwiseAbs().minCoeff(&axis);
  const Vec3 ref = Vec3::Unit(axis);
  const Vec3 e_plus = khat.cross(ref).normalized();
  const Vec3 e_minus = khat.cross(e_plus);
  return {e_plus, e_minus};
}

Vec3 phi_plane_wave(const PlaneWaveMode& mode, const Vec3& r) {
  static const double norm = std::sqrt(2.0) * std::pow(2.0 * kPi, -1.5);
  const auto basis = polarization_basis(mode.k);
  const Vec3& e = mode.sigma == Polarization::Plus ? basis[0] : basis[1];
  const double phase = mode.k.dot(r);
  return norm * (mode.zeta == Parity::Cos ? std::cos(phase) : std::sin(phase)) * e;
}

RealDyadic im_g0_spectral(const Vec3& x, const Vec3& y, double omega, const SphereQuadrature& quad) {
  require_positive(omega);
  if (quad.size() == 0) throw std::invalid_argument("empty shell quadrature");
  // Sum over zeta of Phi(x) Phi(y)^T is 2(2pi)^-3 cos(k.(x-y)) e e^T; sum over
  // sigma gives I - khat khat^T.
  const double norm_sq = 2.0 * std::pow(2.0 * kPi, -3.0);
  const Vec3 d = x - y;
  RealDyadic acc = RealDyadic::Zero();
  for (std::size_t n = 0; n < quad.size(); ++n) {
    const Vec3& khat = quad.nodes[n];
    const double c = std::cos(omega * khat.dot(d));
    acc += (quad.weights[n] * c) * (RealDyadic::Identity() - khat * khat.transpose());
  }
  // (pi c^2 / 2 omega) * (omega^2 / c^3) with c = 1.
  return (kPi * omega / 2.0) * norm_sq * acc;
}

double default_fd_step(double omega) {
  require_positive(omega);
  return 1e-3 / omega;
}

CVec3 curl_fd(const VectorField& f, const Vec3& r, double h) {
  std::array<CVec3, 3> d;  // d[j] = dF/dx_j
  for (int j = 0; j < 3; ++j) {
    const Vec3 s = h * Vec3::Unit(j);
    d[j] = (f(r + s) - f(r - s)) / (2.0 * h);
  }
  return {d[1](2) - d[2](1), d[2](0) - d[0](2), d[0](1) - d[1](0)};
}

CVec3 curl_curl_fd(const VectorField& f, const Vec3& r, double h) {
  const CVec3 f0 = f(r);
  CVec3 grad_div = CVec3::Zero();
  CVec3 lap = CVec3::Zero();
  std::array<CVec3, 3> fp, fm;
  for (int j = 0; j < 3; ++j) {
    const Vec3 s = h * Vec3::Unit(j);
    fp[j] = f(r + s);
    fm[j] = f(r - s);
    lap += (fp[j] - 2.0 * f0 + fm[j]) / (h * h);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) {
        grad_div(i) += (fp[i](i) - 2.0 * f0(i) + fm[i](i)) / (h * h);
      } else {
        const Vec3 si = h * Vec3::Unit(i);
        const Vec3 sj = h * Vec3::Unit(j);
        const cplx mixed = (f(r + si + sj)(j) - f(r + si - sj)(j) - f(r - si + sj)(j) +
                            f(r - si - sj)(j)) / (4.0 * h * h);
        grad_div(i) += mixed;
      }
    }
  }
  return grad_div - lap;
}

Dyadic curl_fd(const DyadicField& g, const Vec3& r, double h) {
  Dyadic out;
  for (int col = 0; col < 3; ++col)
    out.col(col) = curl_fd(VectorField([&](const Vec3& p) -> CVec3 { return g(p).col(col); }), r, h);
  return out;
}

Dyadic curl_curl_fd(const DyadicField& g, const Vec3& r, double h) {
  Dyadic out;
  for (int col = 0; col < 3; ++col)
    out.col(col) =
        curl_curl_fd(VectorField([&](const Vec3& p) -> CVec3 { return g(p).col(col); }), r, h);
  return out;
}

double sommerfeld_residual(const DyadicField& green, const Vec3& far_point, double omega, double h) {
  require_positive(omega);
  if (!(h > 0.0) || h >= 0.05 / omega)
    throw std::invalid_argument("finite-difference step must satisfy 0 < h < 0.05 c/omega");
  const double dist = far_point.norm();
  if (!(dist > 0.0)) throw std::invalid_argument("far point must not be the origin");
  const Vec3 rhat = far_point / dist;
  const Dyadic g = green(far_point);
  const Dyadic curl = curl_fd(green, far_point, h);
  Dyadic cross;
  // Eigen's complex cross() conjugates its result, so spell it out.
  for (int col = 0; col < 3; ++col) {
    const CVec3 v = g.col(col);
    cross.col(col) << rhat.y() * v.z() - rhat.z() * v.y(), rhat.z() * v.x() - rhat.x() * v.z(),
        rhat.x() * v.y() - rhat.y() * v.x();
  }
  return dist * (curl - kI * omega * cross).norm();
}

double sommerfeld_residual(const Vec3& far_point, const Vec3& src, double omega, double h) {
  return sommerfeld_residual(DyadicField([&](const Vec3& p) { return g0_closed(p, src, omega); }),
                             far_point, omega, h);
}

}  // namespace qplas
