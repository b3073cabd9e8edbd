#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "qplas/permittivity.hpp"

using namespace qplas;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("vacuum permittivity") {
  const PermittivityModel vac{1, {}};
  CHECK(eval_eps(vac, 1.3) == cplx(1.0, 0.0));
  CHECK(coupling_alpha_tilde(vac, 0.7) == 0.0);
  CHECK(kk_residual(vac, 1.0, {}) == 0.0);
  CHECK(vac.is_vacuum());
}

TEST_CASE("high-frequency limit tends to 1") {
  const auto m = test::two_pole();
  const cplx e = eval_eps(m, 1e6 * 2.5);
  CHECK(std::abs(e - 1.0) < 1e-10);
}

TEST_CASE("single pole at resonance") {
  const double w0 = 1.4, wp = 0.9, g = 0.15;
  const PermittivityModel m{1, {{w0, wp, g}}};
  const cplx e = eval_eps(m, w0);
  CHECK_THAT(e.real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(e.imag(), WithinRel(wp * wp / (g * w0), 1e-14));
}

TEST_CASE("alpha tilde inverts to Im eps") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  const auto m = test::two_pole();
  for (int i = 0; i < 100; ++i) {
    const double nu = u(rng);
    const double a = coupling_alpha_tilde(m, nu);
    CHECK_THAT(a * a * std::numbers::pi / (2.0 * nu), WithinRel(eval_eps(m, nu).imag(), 1e-13));
  }
}

TEST_CASE("Drude alpha tilde against the symbolic Im eps") {
  const double wp = 2.0, g = 0.3;
  const auto m = test::drude(1, wp, g);
  for (double nu : {0.1, 0.5, 1.0, 3.0}) {
    const double im = wp * wp * g * nu / (nu * nu * nu * nu + g * g * nu * nu);
    const double a = coupling_alpha_tilde(m, nu);
    CHECK_THAT(a * a, WithinRel(2.0 * nu / std::numbers::pi * im, 1e-13));
  }
}

TEST_CASE("reflection symmetry and passivity of the Lorentz form") {
  const auto m = test::two_pole();
  for (double w : {0.2, 0.8, 1.1, 2.5, 7.0}) {
    // eps(-w) from the closed form with -w substituted.
    cplx reflected{1.0, 0.0};
    for (const auto& p : m.poles)
      reflected += p.omegap * p.omegap / cplx(p.omega0 * p.omega0 - w * w, p.gamma * w);
    const cplx e = eval_eps(m, w);
    CHECK(e.imag() > 0.0);
    CHECK_THAT(reflected.real(), WithinRel(e.real(), 1e-14));
    CHECK_THAT(reflected.imag(), WithinRel(-e.imag(), 1e-14));
  }
}

TEST_CASE("Kramers-Kronig residual for a single Lorentz pole") {
  const PermittivityModel m{1, {{1.2, 1.0, 0.25}}};
  for (double lam : {0.4, 1.0, 1.2, 2.0}) {
    const double rel = kk_residual(m, lam, {}) / std::abs(eval_eps(m, lam) - 1.0);
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("Kramers-Kronig residual decreases under refinement") {
  const auto m = test::two_pole();
  const double lam = 0.9;
  const double r1 = kk_residual(m, lam, {8, 4});
  const double r2 = kk_residual(m, lam, {16, 4});
  const double r4 = kk_residual(m, lam, {32, 4});
  CHECK(r2 < r1);
  CHECK(r4 < r2);
  CHECK(kk_residual(m, lam, {}) / std::abs(eval_eps(m, lam) - 1.0) < 1e-6);
}

TEST_CASE("Kramers-Kronig with a finite top that brackets the pole") {
  const auto m = test::drude();
  CHECK_THROWS_AS(kk_residual(m, 2.0, {64, 8, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(kk_residual(m, -1.0, {}), std::invalid_argument);
}

TEST_CASE("permittivity errors") {
  const auto m = test::drude();
  CHECK_THROWS_AS(eval_eps(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(coupling_alpha_tilde(m, -1.0), std::invalid_argument);
  // A gain pole (negative damping) violates passivity.
  const PermittivityModel gain{3, {{1.0, 1.0, -0.1}}};
  CHECK_THROWS_AS(coupling_alpha_tilde(gain, 1.0), std::domain_error);
  CHECK_THROWS_AS(gain.validate(), std::invalid_argument);
  CHECK_THROWS_AS((PermittivityModel{1, {{-1.0, 1.0, 0.1}}}.validate()), std::invalid_argument);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("coupling scale multiplies eps - 1") {
  const auto m = test::two_pole();
  const auto half = m.with_coupling_scale(0.5);
  for (double w : {0.5, 1.0, 3.0}) {
    const cplx a = eval_eps(m, w) - 1.0, b = eval_eps(half, w) - 1.0;
    CHECK(std::abs(b - 0.5 * a) < 1e-14 * std::abs(a));
  }
}
