#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qplas/permittivity.hpp"
#include "qplas/types.hpp"

namespace qplas {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct Box {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();
};

/// Voxel mask: nx*ny*nz region ids in z-major order (x fastest), 0 = absent.
/// `origin` is the center of voxel (0, 0, 0).
struct Mask {
  int nx = 0, ny = 0, nz = 0;
  double voxel_edge = 0.0;
  Vec3 origin = Vec3::Zero();
  std::vector<int> ids;
};

using Shape = std::variant<Sphere, Box, Mask>;

/// A sphere or box tagged with the material region it is made of. Masks
/// carry their own region ids and ignore `region_id`.
struct ShapeRegion {
  Shape shape;
  int region_id = 1;
};

Mask parse_mask(std::istream& in);
Mask read_mask(const std::filesystem::path& path);

/// Voxelized body: cubic cells of edge `voxel_edge` whose centers lie in V.
struct VoxelGrid {
  std::vector<Vec3> centers;
  std::vector<int> region;  // material region id per voxel
  double voxel_edge = 0.0;

  std::size_t size() const { return centers.size(); }
  bool empty() const { return centers.empty(); }
  double voxel_volume() const { return voxel_edge * voxel_edge * voxel_edge; }
  double total_volume() const { return voxel_volume() * static_cast<double>(size()); }
  /// Index of the voxel whose center is within 1e-9 edges of `p`.
  std::optional<std::size_t> find_center(const Vec3& p) const;
  /// Radius of the smallest origin-centered ball containing all voxel centers.
  double bounding_radius() const;
  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
};

/// Center-in-shape voxelization on an axis-aligned lattice, ordered
/// lexicographically by (z, y, x). Throws if no center falls in the shape.
VoxelGrid build_grid(const Shape& shape, double voxel_edge, int region_id = 1);

/// Union of several shapes; later shapes overwrite the region of earlier
/// ones. `anchor`, if given, is a lattice point; otherwise the first shape
/// fixes it (sphere centers on a lattice point, boxes cell-centered).
VoxelGrid build_grid(std::span<const ShapeRegion> shapes, double voxel_edge,
                     std::optional<Vec3> anchor = std::nullopt);

/// Rigidly rotated copy (voxel edges stay axis-aligned in the discrete model).
VoxelGrid rotated(const VoxelGrid& grid, const Eigen::Matrix3d& rotation);

/// Per-voxel eps(x_i, omega) and beta_i = (omega^2/c^2)(eps_i - 1).
struct GridMedium {
  double omega = 0.0;
  std::vector<cplx> eps;
  std::vector<cplx> beta;
};

/// Throws ConfigError for a voxel region missing from `materials`.
GridMedium eps_on_grid(const VoxelGrid& grid, const MaterialMap& materials, double omega);

}  // namespace qplas
