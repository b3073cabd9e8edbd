#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "qplas/gauss_legendre.hpp"
#include "qplas/green_free.hpp"
#include "qplas/permittivity.hpp"
#include "qplas/shell_quadrature.hpp"

using namespace qplas;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent re-implementation of the closed form, written from G0 = (I + grad grad / k^2) g.
Dyadic g0_reference(const Vec3& r, const Vec3& rp, double k) {
  const Vec3 d = r - rp;
  const double R = d.norm();
  const cplx g = std::exp(cplx(0, k * R)) / (4 * kPi * R);
  const cplx ikR(0, k * R);
  // grad grad g = g [ (3 - 3ikR - k^2R^2) RR/R^4 + (ikR - 1) I / R^2 ]
  Dyadic out = Dyadic::Identity() * g;
  const Dyadic rr = (d * d.transpose()).cast<cplx>() / (R * R);
  out += (g / (k * k * R * R)) * ((3.0 - 3.0 * ikR - k * k * R * R) * rr + (ikR - 1.0) * Dyadic::Identity());
  return out;
}
}  // namespace

TEST_CASE("scalar Green function") {
  const Vec3 a(0.1, -0.2, 0.3), b(1.0, 0.5, -0.4);
  const double R = (a - b).norm();
  // e^{ikR} - 1 ~ ikR as k -> 0.
  CHECK_THAT(std::abs(scalar_green(a, b, 1e-9) - 1.0 / (4 * kPi * R)), WithinRel(1e-9 / (4 * kPi), 1e-6));
  const cplx g = scalar_green(a, b, 2 * kPi / R);
  CHECK_THAT(g.real(), WithinRel(1.0 / (4 * kPi * R), 1e-13));
  CHECK_THAT(g.imag(), WithinAbs(0.0, 1e-14));
  const double k = 1.7;
  const cplx ref = std::polar(1.0 / (4 * kPi * R), k * R);
  CHECK(std::abs(scalar_green(a, b, k) - ref) < 1e-15);
  CHECK_THROWS_AS(scalar_green(a, a, 1.0), std::invalid_argument);
}

TEST_CASE("closed form matches an independent evaluation") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vec3 r = test::random_point(rng, -2, 2), rp = test::random_point(rng, -2, 2);
    const double k = 0.2 + 0.1 * i;
    const Dyadic g = g0_closed(r, rp, k);
    CHECK((g - g0_reference(r, rp, k)).norm() <= 1e-12 * g.norm());
  }
}

TEST_CASE("closed form is symmetric") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec3 r = test::random_point(rng, -2, 2), rp = test::random_point(rng, -2, 2);
    const Dyadic g = g0_closed(r, rp, 1.3);
    CHECK((g - g.transpose()).norm() == 0.0);
    CHECK((g - g0_closed(rp, r, 1.3).transpose()).norm() == 0.0);
  }
  CHECK_THROWS_AS(g0_closed(Vec3::Zero(), Vec3::Zero(), 1.0), std::invalid_argument);
}

TEST_CASE("action on the separation direction") {
  const Vec3 r(0.4, 0.9, -0.3), rp(-0.2, 0.1, 0.5);
  const double k = 1.1;
  const double R = (r - rp).norm();
  const Vec3 u = (r - rp) / R;
  const cplx g = scalar_green(r, rp, k);
  const cplx coeff = (2.0 / (k * k * R * R) - cplx(0, 2.0 / (k * R))) * g;
  const CVec3 lhs = g0_closed(r, rp, k) * u.cast<cplx>();
  CHECK((lhs - coeff * u.cast<cplx>()).norm() < 1e-14 * std::abs(coeff));
}

TEST_CASE("far-zone closed form is the transverse projector times g") {
  const Vec3 u = Vec3(1, 2, -2).normalized();
  const double k = 1.0;
  for (double kR : {100.0, 1000.0}) {
    const Vec3 r = kR * u;
    const cplx g = scalar_green(r, Vec3::Zero(), k);
    const Dyadic far = (RealDyadic::Identity() - u * u.transpose()).cast<cplx>() * g;
    // Leading correction is i (I - 3 u u) g / kR, of Frobenius norm sqrt(6) |g| / kR.
    const double rel = (g0_closed(r, Vec3::Zero(), k) - far).norm() / std::abs(g);
    CHECK_THAT(rel * kR, WithinRel(std::sqrt(6.0), 2.0 / kR));
  }
}

TEST_CASE("Helmholtz residual off-source at random pairs") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const Vec3 src = test::random_point(rng, -1, 1);
    const Vec3 r = src + (0.8 + 0.1 * i) * test::random_unit(rng);
    const double k = 1.0;
    const double h = default_fd_step(k);
    const DyadicField g = [&](const Vec3& p) { return g0_closed(p, src, k); };
    const double r1 = (curl_curl_fd(g, r, h) - k * k * g(r)).norm();
    const double r2 = (curl_curl_fd(g, r, h / 2) - k * k * g(r)).norm();
    // Second-order stencil: small, and a quarter per step halving.
    CHECK(r1 < 1e-4 * std::max(1.0, g0_longitudinal(r, src, k).norm()));
    CHECK_THAT(r1 / r2, WithinRel(4.0, 0.1));
  }
}

TEST_CASE("longitudinal part") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 10; ++i) {
    const Vec3 src = test::random_point(rng, -1, 1);
    const Vec3 r = src + 1.2 * test::random_unit(rng);
    const RealDyadic gl = g0_longitudinal(r, src, 0.9);
    CHECK(std::abs(gl.trace()) < 1e-14 * gl.norm());
    const DyadicField f = [&](const Vec3& p) { return Dyadic(g0_longitudinal(p, src, 0.9).cast<cplx>()); };
    const double h = default_fd_step(0.9);
    const double c1 = curl_fd(f, r, h).norm(), c2 = curl_fd(f, r, h / 2).norm();
    CHECK(c1 < 1e-5 * gl.norm());
    CHECK_THAT(c1 / c2, WithinRel(4.0, 0.1));
  }
}

TEST_CASE("transverse part from a Hilbert reconstruction of the spectral Im G0") {
  // G_perp(w) = (2/pi) int dk k Im G0(k) / (k^2 - w^2 - i0), with Im G0 from the
  // shell representation. Separation along z keeps the phi integral trivial.
  const Vec3 x(0.1, -0.2, 0.35), y(0.1, -0.2, -0.15);
  const double R = (x - y).norm();
  const double w = 1.0;
  const auto quad = make_shell_quadrature(48, 8);
  // Truncate where cos(k_max R) = 0 so the leading oscillatory tail vanishes.
  const double k_max = 40.5 * kPi / R;
  Dyadic recon;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      recon(a, b) = pole_integral(
          [&](double k) { return (2.0 / kPi) * k * im_g0_spectral(x, y, k, quad)(a, b); }, w,
          PoleQuadrature{512, 10, k_max});
  const Dyadic transverse = g0_closed(x, y, w) - g0_longitudinal(x, y, w).cast<cplx>();
  const double rel = (recon - transverse).norm() / transverse.norm();
  INFO("relative error " << rel);
  CHECK(rel < 1e-2);
}

TEST_CASE("plane-wave modes") {
  std::mt19937_64 rng(23);
  const PlaneWaveMode s{Vec3(0.3, 0.4, 0.5), Polarization::Plus, Parity::Sin};
  CHECK(phi_plane_wave(s, Vec3::Zero()).norm() == 0.0);
  for (int i = 0; i < 50; ++i) {
    Vec3 k = (0.5 + i * 0.1) * test::random_unit(rng);
    k.z() = std::abs(k.z());
    for (auto sig : {Polarization::Plus, Polarization::Minus})
      for (auto z : {Parity::Cos, Parity::Sin}) {
        const Vec3 r = test::random_point(rng, -3, 3);
        CHECK(std::abs(k.dot(phi_plane_wave({k, sig, z}, r))) < 1e-15 * k.norm());
      }
    const auto basis = polarization_basis(k);
    CHECK_THAT(basis[0].dot(basis[1]), WithinAbs(0.0, 1e-15));
    CHECK_THAT(basis[0].norm(), WithinRel(1.0, 1e-15));
    CHECK_THAT(basis[1].norm(), WithinRel(1.0, 1e-15));
  }
  CHECK_THROWS_AS(polarization_basis(Vec3::Zero()), std::invalid_argument);
}

TEST_CASE("discrete orthonormality on a periodic box") {
  // Box of side L = 2 pi with lattice wavevectors: int Phi.Phi' = delta_{kk'} L^3 / (2 pi)^3.
  const int n = 16;
  const double L = 2 * kPi, dx = L / n;
  const std::vector<PlaneWaveMode> modes = {
      {Vec3(1, 0, 1), Polarization::Plus, Parity::Cos},  {Vec3(1, 0, 1), Polarization::Minus, Parity::Cos},
      {Vec3(1, 0, 1), Polarization::Plus, Parity::Sin},  {Vec3(0, 2, 1), Polarization::Plus, Parity::Cos},
      {Vec3(-1, 1, 2), Polarization::Minus, Parity::Sin}};
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(modes.size(), modes.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Vec3 r((i + 0.5) * dx, (j + 0.5) * dx, (l + 0.5) * dx);
        for (std::size_t a = 0; a < modes.size(); ++a)
          for (std::size_t b = 0; b < modes.size(); ++b)
            gram(a, b) += phi_plane_wave(modes[a], r).dot(phi_plane_wave(modes[b], r)) * dx * dx * dx;
      }
  const double expected = std::pow(L / (2 * kPi), 3);
  CHECK((gram - expected * Eigen::MatrixXd::Identity(modes.size(), modes.size())).norm() < 1e-12);
}

TEST_CASE("spectral Im G0 at coincidence") {
  for (double w : {0.5, 1.0, 2.0}) {
    const RealDyadic s = im_g0_spectral(Vec3(0.2, 0.1, -0.3), Vec3(0.2, 0.1, -0.3), w, make_shell_quadrature(8, 16));
    const RealDyadic ref = (w / (6 * kPi)) * RealDyadic::Identity();
    CHECK((s - ref).norm() < 1e-3 * ref.norm());
  }
}

TEST_CASE("spectral Im G0 matches the closed form at a generic separation") {
  const Vec3 x(0.3, -0.4, 0.2), y(-0.2, 0.3, -0.4);
  const RealDyadic ref = g0_closed(x, y, 1.0).imag();
  const RealDyadic s = im_g0_spectral(x, y, 1.0, make_shell_quadrature(8, 16));
  CHECK((s - ref).norm() < 1e-3 * ref.norm());
  CHECK((s - s.transpose()).norm() < 1e-15);
}

TEST_CASE("spectral Im G0 is unchanged under a rotated quadrature frame") {
  const Vec3 x(0.3, -0.4, 0.2), y(-0.2, 0.3, -0.4);
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const RealDyadic a = im_g0_spectral(x, y, 1.0, make_shell_quadrature(12, 24));
  const RealDyadic b = im_g0_spectral(x, y, 1.0, make_shell_quadrature(12, 24, rot));
  CHECK((a - b).norm() < 1e-6 * a.norm());
}

TEST_CASE("spectral Im G0 error drops under quadrature refinement") {
  const Vec3 x(0.9, -1.1, 0.7), y(-0.6, 0.8, -0.9);
  const RealDyadic ref = g0_closed(x, y, 1.5).imag();
  double prev = INFINITY;
  for (auto [nt, np] : {std::pair{3, 6}, {6, 12}, {12, 24}}) {
    const double err = (im_g0_spectral(x, y, 1.5, make_shell_quadrature(nt, np)) - ref).norm();
    CHECK(err <= 0.5 * prev);
    prev = err;
  }
}

TEST_CASE("shell quadrature") {
  for (auto [nt, np] : {std::pair{2, 2}, {4, 8}, {8, 16}, {13, 7}}) {
    const auto q = make_shell_quadrature(nt, np);
    double sum = 0;
    RealDyadic proj = RealDyadic::Zero();
    for (std::size_t i = 0; i < q.size(); ++i) {
      sum += q.weights[i];
      CHECK(q.weights[i] > 0.0);
      CHECK(q.nodes[i].z() >= 0.0);
      CHECK_THAT(q.nodes[i].norm(), WithinRel(1.0, 1e-15));
      proj += q.weights[i] * (RealDyadic::Identity() - q.nodes[i] * q.nodes[i].transpose());
    }
    CHECK_THAT(sum, WithinRel(2 * kPi, 1e-12));
    if (nt >= 4 && np >= 8) CHECK((proj - 4 * kPi / 3 * RealDyadic::Identity()).norm() < 1e-12);
  }
  CHECK_THROWS_AS(make_shell_quadrature(1, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_shell_quadrature(4, 1), std::invalid_argument);
  CHECK_THROWS_AS(im_g0_spectral(Vec3::Zero(), Vec3::Zero(), 1.0, SphereQuadrature{}), std::invalid_argument);
}

TEST_CASE("self term") {
  const double w = 1.3;
  const double delta = -1.0 / (3 * w * w);
  // Taylor expansion for small a: the delta term plus a^2/3 + 2 i k a^3 / 9.
  for (double a : {1e-4, 1e-3, 1e-2, 5e-2}) {
    const double dv = 4 * kPi / 3 * a * a * a;
    const cplx m = self_term_coefficient(dv, w);
    const cplx taylor(delta + a * a / 3, 2 * w * a * a * a / 9);
    CHECK(std::abs(m - taylor) < w * w * std::pow(a, 4));
  }
  // Series and closed-form branches agree across the switch at ka = 1e-3.
  const double a_switch = 1e-3 / w;
  const double dv_lo = 4 * kPi / 3 * std::pow(a_switch * (1 - 1e-9), 3);
  const double dv_hi = 4 * kPi / 3 * std::pow(a_switch * (1 + 1e-9), 3);
  const cplx lo = self_term_coefficient(dv_lo, w) - delta, hi = self_term_coefficient(dv_hi, w) - delta;
  CHECK(std::abs(lo - hi) < 1e-6 * std::abs(lo));
  for (int i = 1; i <= 60; ++i) {
    const double a = 0.02 * i;
    CHECK(self_term_coefficient(4 * kPi / 3 * a * a * a, w).imag() > 0.0);
  }
  // Static limit: k^2 M -> -1/3 and the remainder tends to a^2/3.
  const double a = std::cbrt(3.0 / (4 * kPi));
  const double w0 = 1e-4;
  const cplx m0 = self_term_coefficient(1.0, w0);
  CHECK_THAT(w0 * w0 * m0.real(), WithinRel(-1.0 / 3.0, 1e-6));
  CHECK_THAT(m0.real() + 1.0 / (3 * w0 * w0), WithinRel(a * a / 3, 1e-6));
  CHECK(self_term(1.0, 1.0) == self_term_coefficient(1.0, 1.0) * Dyadic::Identity());
  CHECK_THROWS_AS(self_term_coefficient(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("self term is the sphere integral of the full distribution") {
  // Independent radial quadrature of the off-source closed form over the ball
  // r < a (its angular average is ((c_rr + 3 c_id)/3) g I), plus the delta term.
  const double w = 0.9, a = 0.4;
  const auto rule = gauss_legendre(64, 0.0, a);
  cplx pv = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double r = rule.nodes[q];
    const Dyadic g = g0_closed(Vec3(0, 0, r), Vec3::Zero(), w);
    pv += rule.weights[q] * 4 * kPi * r * r * g.trace() / 3.0;
  }
  const cplx expected = pv - 1.0 / (3 * w * w);
  const cplx m = self_term_coefficient(4 * kPi / 3 * a * a * a, w);
  CHECK(std::abs(m - expected) < 1e-12 * std::abs(expected));
}

TEST_CASE("Sommerfeld residual decays for the outgoing tensor") {
  const Vec3 src(0.2, -0.1, 0.3);
  const Vec3 dir = Vec3(0.3, 0.5, 0.8).normalized();
  const double w = 1.0, h = default_fd_step(w);
  const double r10 = sommerfeld_residual(Vec3(10.0 * dir), src, w, h);
  const double r40 = sommerfeld_residual(Vec3(40.0 * dir), src, w, h);
  CHECK(r40 * 4.0 <= r10);

  // Incoming wave: e^{-ikR} is the complex conjugate for real w.
  const DyadicField incoming = [&](const Vec3& p) { return Dyadic(g0_closed(p, src, w).conjugate()); };
  const double in10 = sommerfeld_residual(incoming, 10.0 * dir, w, h);
  const double in40 = sommerfeld_residual(incoming, 40.0 * dir, w, h);
  CHECK(in40 > 0.5 * in10);
  CHECK(in40 > 100.0 * r40);

  const DyadicField projected = [&](const Vec3& p) {
    const Vec3 u = (p - src).normalized();
    return Dyadic((RealDyadic::Identity() - u * u.transpose()).cast<cplx>() * g0_closed(p, src, w));
  };
  CHECK(4.0 * sommerfeld_residual(projected, 40.0 * dir, w, h) <= sommerfeld_residual(projected, 10.0 * dir, w, h));
  CHECK_THROWS_AS(sommerfeld_residual(Vec3(10.0 * dir), src, w, 0.06), std::invalid_argument);
}
