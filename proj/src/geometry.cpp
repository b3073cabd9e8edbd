#include "qplas/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace qplas {

namespace {

bool contains(const Sphere& s, const Vec3& p) {
  return (p - s.center).squaredNorm() <= s.radius * s.radius * (1.0 + 1e-12);
}

bool contains(const Box& b, const Vec3& p) {
  const double tol = 1e-12 * (b.max_corner - b.min_corner).norm();
  return (p.array() >= b.min_corner.array() - tol).all() &&
         (p.array() <= b.max_corner.array() + tol).all();
}

std::pair<Vec3, Vec3> bounds(const Sphere& s) {
  const Vec3 r = Vec3::Constant(s.radius);
  return {s.center - r, s.center + r};
}

std::pair<Vec3, Vec3> bounds(const Box& b) { return {b.min_corner, b.max_corner}; }

void check_shape(const Sphere& s) {
  if (!(s.radius > 0.0) || !s.center.allFinite())
    throw std::invalid_argument("sphere needs a finite center and radius > 0");
}

void check_shape(const Box& b) {
  if (!b.min_corner.allFinite() || !b.max_corner.allFinite() ||
      !(b.max_corner.array() > b.min_corner.array()).all())
    throw std::invalid_argument("box needs max_corner > min_corner on every axis");
}

double diameter(const Sphere& s) { return 2.0 * s.radius; }
double diameter(const Box& b) { return (b.max_corner - b.min_corner).norm(); }

Vec3 default_anchor(const Sphere& s, double) { return s.center; }
Vec3 default_anchor(const Box& b, double edge) {
  return b.min_corner + Vec3::Constant(0.5 * edge);
}

VoxelGrid sort_grid(VoxelGrid g) {
  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Vec3& p = g.centers[a];
    const Vec3& q = g.centers[b];
    return std::tie(p.z(), p.y(), p.x()) < std::tie(q.z(), q.y(), q.x());
  });
  VoxelGrid out;
  out.voxel_edge = g.voxel_edge;
  out.centers.reserve(order.size());
  out.region.reserve(order.size());
  for (auto i : order) {
    out.centers.push_back(g.centers[i]);
    out.region.push_back(g.region[i]);
  }
  return out;
}

VoxelGrid grid_from_mask(const Mask& m) {
  VoxelGrid g;
  g.voxel_edge = m.voxel_edge;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        const int id = m.ids[(static_cast<std::size_t>(k) * m.ny + j) * m.nx + i];
        if (id == 0) continue;
        g.centers.push_back(m.origin + m.voxel_edge * Vec3(i, j, k));
        g.region.push_back(id);
      }
  return g;
}

}  // namespace

Mask parse_mask(std::istream& in) {
  Mask m;
  if (!(in >> m.nx >> m.ny >> m.nz >> m.voxel_edge >> m.origin.x() >> m.origin.y() >> m.origin.z()))
    throw ConfigError("mask: malformed header (expected nx ny nz voxel_edge ox oy oz)");
  if (m.nx <= 0 || m.ny <= 0 || m.nz <= 0) throw ConfigError("mask: dimensions must be positive");
  if (!(m.voxel_edge > 0.0)) throw ConfigError("mask: voxel_edge must be > 0");
  const std::size_t n = static_cast<std::size_t>(m.nx) * m.ny * m.nz;
  m.ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> m.ids[i]))
      throw ConfigError("mask: expected " + std::to_string(n) + " region ids, got " + std::to_string(i));
    if (m.ids[i] < 0) throw ConfigError("mask: negative region id");
  }
  std::string extra;
  if (in >> extra) throw ConfigError("mask: trailing data after " + std::to_string(n) + " ids");
  return m;
}

Mask read_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mask file '" + path.string() + "'");
  return parse_mask(in);
}

std::optional<std::size_t> VoxelGrid::find_center(const Vec3& p) const {
  const double tol2 = 1e-18 * voxel_edge * voxel_edge;
  for (std::size_t i = 0; i < centers.size(); ++i)
    if ((centers[i] - p).squaredNorm() <= tol2) return i;
  return std::nullopt;
}

double VoxelGrid::bounding_radius() const {
  double r = 0.0;
  for (const auto& c : centers) r = std::max(r, c.norm());
  return r;
}

Vec3 VoxelGrid::bbox_min() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const auto& c : centers) lo = lo.cwiseMin(c);
  return lo - Vec3::Constant(0.5 * voxel_edge);
}

Vec3 VoxelGrid::bbox_max() const {
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& c : centers) hi = hi.cwiseMax(c);
  return hi + Vec3::Constant(0.5 * voxel_edge);
}

VoxelGrid build_grid(const Shape& shape, double voxel_edge, int region_id) {
  const ShapeRegion one{shape, region_id};
  return build_grid(std::span<const ShapeRegion>(&one, 1), voxel_edge);
}

VoxelGrid build_grid(std::span<const ShapeRegion> shapes, double voxel_edge,
                     std::optional<Vec3> anchor) {
  if (shapes.empty()) throw std::invalid_argument("build_grid: no shapes");
  for (const auto& s : shapes)
    if (std::holds_alternative<Mask>(s.shape)) {
      if (shapes.size() != 1) throw ConfigError("a mask cannot be combined with other shapes");
      auto g = grid_from_mask(std::get<Mask>(s.shape));
      if (g.empty()) throw std::invalid_argument("build_grid: mask has no voxels");
      return sort_grid(std::move(g));
    }
  if (!(voxel_edge > 0.0)) throw std::invalid_argument("build_grid: voxel_edge must be > 0");

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& s : shapes) {
    std::visit(
        [&](const auto& sh) {
          using T = std::decay_t<decltype(sh)>;
          if constexpr (!std::is_same_v<T, Mask>) {
            check_shape(sh);
            if (voxel_edge > diameter(sh))
              throw std::invalid_argument("build_grid: voxel_edge exceeds shape diameter");
            auto [a, b] = bounds(sh);
            lo = lo.cwiseMin(a);
            hi = hi.cwiseMax(b);
          }
        },
        s.shape);
  }
  const Vec3 base = anchor ? *anchor : std::visit(
      [&](const auto& sh) -> Vec3 {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, Mask>) return Vec3::Zero();
        else return default_anchor(sh, voxel_edge);
      },
      shapes.front().shape);

  std::array<long, 3> i0{}, i1{};
  for (int a = 0; a < 3; ++a) {
    i0[a] = static_cast<long>(std::floor((lo(a) - base(a)) / voxel_edge)) - 1;
    i1[a] = static_cast<long>(std::ceil((hi(a) - base(a)) / voxel_edge)) + 1;
  }
  VoxelGrid g;
  g.voxel_edge = voxel_edge;
  for (long k = i0[2]; k <= i1[2]; ++k)
    for (long j = i0[1]; j <= i1[1]; ++j)
      for (long i = i0[0]; i <= i1[0]; ++i) {
        const Vec3 p = base + voxel_edge * Vec3(double(i), double(j), double(k));
        int region = 0;
        for (const auto& s : shapes) {
          const bool in = std::visit(
              [&](const auto& sh) {
                using T = std::decay_t<decltype(sh)>;
                if constexpr (std::is_same_v<T, Mask>) return false;
                else return contains(sh, p);
              },
              s.shape);
          if (in) region = s.region_id;
        }
        if (region == 0) continue;
        g.centers.push_back(p);
        g.region.push_back(region);
      }
  if (g.empty()) throw std::invalid_argument("build_grid: no voxel center lies inside the shape");
  return g;  // loop order already (z, y, x)
}

VoxelGrid rotated(const VoxelGrid& grid, const Eigen::Matrix3d& rotation) {
  VoxelGrid out = grid;
  for (auto& c : out.centers) c = rotation * c;
  return out;
}

GridMedium eps_on_grid(const VoxelGrid& grid, const MaterialMap& materials, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("eps_on_grid: omega must be > 0");
  GridMedium m;
  m.omega = omega;
  m.eps.reserve(grid.size());
  m.beta.reserve(grid.size());
  std::map<int, cplx> cache;
  for (int id : grid.region) {
    auto it = cache.find(id);
    if (it == cache.end()) {
      auto mat = materials.find(id);
      if (mat == materials.end()) throw ConfigError("unknown region_id " + std::to_string(id));
      it = cache.emplace(id, eval_eps(mat->second, omega)).first;
    }
    m.eps.push_back(it->second);
    m.beta.push_back(omega * omega * (it->second - 1.0));
  }
  return m;
}

}  // namespace qplas
