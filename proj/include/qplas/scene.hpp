#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qplas/constants.hpp"
#include "qplas/geometry.hpp"
#include "qplas/permittivity.hpp"
#include "qplas/shell_quadrature.hpp"
#include "qplas/vie_solver.hpp"

namespace qplas {

inline constexpr int kSchemaVersion = 1;

/// All problems found in a scene file, reported together.
class SceneError : public ConfigError {
 public:
  explicit SceneError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

using Triple = std::array<double, 3>;

/// Scene file contents in the units the file declares. Every optional block
/// has its defaults filled in by load_scene.
struct SceneConfig {
  int schema_version = kSchemaVersion;

  struct Units {
    UnitMode mode = UnitMode::Natural;
    double L0 = 1.0;  // meters in SI mode
  } units;

  std::vector<PermittivityModel> materials;

  struct ShapeEntry {
    std::string type;  // sphere | box | mask
    Triple center{0, 0, 0};
    double radius = 0.0;
    Triple min{0, 0, 0};
    Triple max{0, 0, 0};
    std::string file;  // mask path as written
    int region_id = 1;
  };
  std::vector<ShapeEntry> shapes;

  struct Grid {
    double voxel_edge = 0.25;
    std::optional<Triple> anchor;
  } grid;

  struct Solver {
    std::string method = "auto";
    double tol = 1e-10;
    std::size_t dense_limit = 3000;
    int max_iterations = 2000;
    int restart = 80;
  } solver;

  struct Quadrature {
    int n_theta = 8;
    int n_phi = 16;
  } quadrature;

  struct Kk {
    int panels = 256;
    int order = 10;
  } kk;

  struct Greens {
    double omega = 1.0;
    Triple src{0, 0, 2};
    Triple eval{0.5, 0.3, 2.5};
  } greens;

  struct Modes {
    double omega = 1.0;
    Triple kdir{0, 0, 1};
    std::string sigma = "+";
    std::string zeta = "c";
    std::vector<Triple> eval{{0, 0, 2}};
  } modes;

  struct Purcell {
    Triple emitter{0, 0, 2};
    Triple dipole{0, 0, 1};
    double omega_start = 0.5;
    double omega_stop = 1.5;
    int count = 11;
  } purcell;

  struct Validate {
    double omega = 1.0;
    Triple x{0, 0, 2};
    Triple y{0.4, -0.3, 2.5};
    Triple emitter{0, 0, 2};
    Triple dipole{0, 0, 1};
    std::vector<double> kk_frequencies{0.5, 0.8, 1.0, 1.3, 2.0};
  } validate;

  /// Directory mask paths are resolved against.
  std::filesystem::path base_dir;
};

SceneConfig load_scene(const std::filesystem::path& path);
/// Parses and validates JSON text; `origin` names the source in messages.
SceneConfig parse_scene(const std::string& text, const std::filesystem::path& base_dir = {},
                        const std::string& origin = "<scene>");

/// Canonical form: every field present, keys sorted.
nlohmann::json to_json(const SceneConfig& config);
std::string serialize(const SceneConfig& config);
/// FNV-1a 64 of the compact canonical form, as 16 hex digits.
std::string config_hash(const SceneConfig& config);
std::uint64_t fnv1a64(const std::string& bytes);

/// Scene converted to internal units.
struct ResolvedScene {
  UnitSystem units;
  MaterialMap materials;
  VoxelGrid grid;
  SolverOptions solver;
  PoleQuadrature kk;
  int n_theta = 8;
  int n_phi = 16;
};

ResolvedScene resolve(const SceneConfig& config);

/// Conversions for user-unit triples and frequencies.
Vec3 to_internal_point(const UnitSystem& units, const Triple& p);
Vec3 to_internal_dipole(const UnitSystem& units, const Triple& d);
double to_internal_frequency(const UnitSystem& units, double omega);

}  // namespace qplas
