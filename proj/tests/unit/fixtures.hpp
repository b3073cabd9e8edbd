#pragma once

#include <random>

#include "qplas/geometry.hpp"
#include "qplas/permittivity.hpp"

namespace qplas::test {

inline PermittivityModel drude(int region = 1, double wp = 2.0, double gamma = 0.3) {
  return {region, {{0.0, wp, gamma}}};
}

inline PermittivityModel two_pole(int region = 1) {
  return {region, {{0.8, 1.2, 0.2}, {2.5, 1.5, 0.5}}};
}

inline MaterialMap materials(const PermittivityModel& m) { return {{m.region_id, m}}; }

// 4x4x4 voxels, edge 0.25, centered on the origin.
inline VoxelGrid cube64() { return build_grid(Box{Vec3::Constant(-0.5), Vec3::Constant(0.5)}, 0.25); }

// Radius 1, edge 0.25: 257 voxels.
inline VoxelGrid sphere257() { return build_grid(Sphere{Vec3::Zero(), 1.0}, 0.25); }

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Vec3 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace qplas::test
