#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "qplas/geometry.hpp"

using namespace qplas;
using Catch::Matchers::WithinRel;

namespace {
Mask mask_from(const std::string& text) {
  std::istringstream in(text);
  return parse_mask(in);
}
}  // namespace

TEST_CASE("box of edge 4h tiles into 64 voxels") {
  const double h = 0.3;
  const auto g = build_grid(Box{Vec3(1, 2, 3), Vec3(1 + 4 * h, 2 + 4 * h, 3 + 4 * h)}, h);
  CHECK(g.size() == 64);
  CHECK_THAT(g.total_volume(), WithinRel(std::pow(4 * h, 3), 1e-12));
  CHECK(test::cube64().size() == 64);
}

TEST_CASE("sphere volume converges") {
  const double r = 1.0;
  const double exact = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  const auto g = build_grid(Sphere{Vec3::Zero(), r}, r / 8);
  CHECK(std::abs(g.total_volume() - exact) < 0.05 * exact);
  CHECK(test::sphere257().size() == 257);
  CHECK(std::abs(test::sphere257().total_volume() - exact) < 0.05 * exact);
}

TEST_CASE("grid invariants") {
  const Sphere s{Vec3(0.1, -0.2, 0.05), 0.9};
  const auto g = build_grid(s, 0.2);
  std::set<std::tuple<double, double, double>> seen;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& c = g.centers[i];
    CHECK((c - s.center).norm() <= s.radius);
    CHECK(seen.insert({c.x(), c.y(), c.z()}).second);
    if (i > 0) {
      const Vec3& p = g.centers[i - 1];
      CHECK(std::tie(p.z(), p.y(), p.x()) < std::tie(c.z(), c.y(), c.x()));
    }
  }
  CHECK(g.total_volume() <= std::pow(2 * s.radius, 3));
  const auto again = build_grid(s, 0.2);
  CHECK(again.centers == g.centers);
  CHECK(g.find_center(g.centers[7]) == std::optional<std::size_t>(7));
  CHECK_FALSE(g.find_center(g.centers[7] + Vec3(0.01, 0, 0)).has_value());
}

TEST_CASE("single-voxel mask") {
  const auto m = mask_from("1 1 1 0.5  0.25 -1.0 3.0\n4\n");
  const auto g = build_grid(m, 0.0);
  REQUIRE(g.size() == 1);
  CHECK(g.centers[0] == Vec3(0.25, -1.0, 3.0));
  CHECK(g.region[0] == 4);
  CHECK(g.voxel_edge == 0.5);
}

TEST_CASE("mask ordering is z-major with x fastest") {
  const auto m = mask_from("2 1 2 1.0 0 0 0\n1 2\n0 3\n");
  const auto g = build_grid(m, 0.0);
  REQUIRE(g.size() == 3);
  CHECK(g.centers[0] == Vec3(0, 0, 0));
  CHECK(g.region[0] == 1);
  CHECK(g.centers[1] == Vec3(1, 0, 0));
  CHECK(g.region[1] == 2);
  CHECK(g.centers[2] == Vec3(1, 0, 1));
  CHECK(g.region[2] == 3);
}

TEST_CASE("mask file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "qplas_test_mask.txt";
  {
    std::ofstream out(path);
    out << "2 2 1 0.1 0 0 0\n1 1\n1 0\n";
  }
  const auto g = build_grid(read_mask(path), 0.0);
  CHECK(g.size() == 3);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_mask(path), ConfigError);
}

TEST_CASE("malformed masks") {
  CHECK_THROWS_AS(mask_from("2 2 1 0.1 0 0\n"), ConfigError);
  CHECK_THROWS_AS(mask_from("0 2 1 0.1 0 0 0\n"), ConfigError);
  CHECK_THROWS_AS(mask_from("1 1 1 -0.1 0 0 0\n1\n"), ConfigError);
  CHECK_THROWS_AS(mask_from("2 1 1 0.1 0 0 0\n1\n"), ConfigError);
  CHECK_THROWS_AS(mask_from("1 1 1 0.1 0 0 0\n1 1\n"), ConfigError);
  CHECK_THROWS_AS(mask_from("1 1 1 0.1 0 0 0\n-1\n"), ConfigError);
  CHECK_THROWS_AS(build_grid(mask_from("1 1 1 0.1 0 0 0\n0\n"), 0.0), std::invalid_argument);
}

TEST_CASE("build_grid errors") {
  CHECK_THROWS_AS(build_grid(Sphere{Vec3::Zero(), 1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Sphere{Vec3::Zero(), 1.0}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Sphere{Vec3::Zero(), -1.0}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Box{Vec3::Zero(), Vec3(1, 0, 1)}, 0.1), std::invalid_argument);
  // Centers are offset from a thin slab, so none lands inside.
  CHECK_THROWS_AS(build_grid(std::vector<ShapeRegion>{{Box{Vec3::Zero(), Vec3(1, 1, 0.2)}, 1}}, 0.25,
                             Vec3(0.125, 0.125, 0.225)),
                  std::invalid_argument);
  const std::vector<ShapeRegion> mixed = {{Sphere{Vec3::Zero(), 1.0}, 1},
                                          {mask_from("1 1 1 0.1 0 0 0\n1\n"), 1}};
  CHECK_THROWS_AS(build_grid(mixed, 0.25), ConfigError);
}

TEST_CASE("eps on grid") {
  // Sphere of region 2 inside a box of region 1; later shapes overwrite.
  const std::vector<ShapeRegion> shapes = {{Box{Vec3::Constant(-1), Vec3::Constant(1)}, 1},
                                           {Sphere{Vec3::Zero(), 0.6}, 2}};
  const auto g = build_grid(shapes, 0.25, Vec3::Constant(0.125));
  MaterialMap mats{{1, test::drude(1)}, {2, test::two_pole(2)}};
  const double w = 0.9;
  const auto m = eps_on_grid(g, mats, w);
  REQUIRE(m.eps.size() == g.size());
  int n2 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool inner = g.centers[i].norm() <= 0.6;
    CHECK(g.region[i] == (inner ? 2 : 1));
    n2 += inner;
    CHECK(m.eps[i] == eval_eps(mats.at(g.region[i]), w));
    CHECK(m.beta[i] == w * w * (m.eps[i] - 1.0));
    CHECK(m.beta[i].imag() > 0.0);
  }
  CHECK(n2 > 0);

  const auto vac = eps_on_grid(g, {{1, PermittivityModel{1, {}}}, {2, PermittivityModel{2, {}}}}, w);
  for (auto b : vac.beta) CHECK(b == cplx(0.0));

  CHECK_THROWS_AS(eps_on_grid(g, {{1, test::drude(1)}}, w), ConfigError);
  CHECK_THROWS_AS(eps_on_grid(g, mats, 0.0), std::invalid_argument);
}

TEST_CASE("rotated grid keeps distances") {
  const auto g = test::cube64();
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(0.4, Vec3(0, 1, 1).normalized()).toRotationMatrix();
  const auto r = rotated(g, rot);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK((r.centers[i] - rot * g.centers[i]).norm() < 1e-15);
  CHECK(r.region == g.region);
}
