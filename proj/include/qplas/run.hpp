#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qplas/scene.hpp"

namespace qplas {

enum ExitCode : int {
  kExitPass = 0,
  kExitValidationFailure = 2,
  kExitSolverFailure = 3,
  kExitConfigError = 4,
};

/// Command-line overrides. Geometry and frequencies are in scene units.
struct RunFlags {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  std::optional<double> tol;
  std::optional<std::pair<int, int>> quad;  // n_theta, n_phi
  bool timings = false;

  std::optional<double> omega;
  std::optional<Triple> src, eval, kdir, emitter, dipole, x, y;
  std::optional<std::string> sigma, zeta;
  std::optional<std::filesystem::path> eval_csv;
  std::optional<std::tuple<double, double, int>> omega_range;
  std::optional<std::filesystem::path> out_csv;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunReport {
  int exit_code = kExitPass;
  nlohmann::json report;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> outputs;
};

/// Runs one subcommand (greens, modes, purcell, ldos-check, validate) and
/// writes its outputs plus report.json into flags.out_dir. Solver and
/// configuration failures are reported through the exit code, not thrown.
RunReport run(const SceneConfig& config, const std::string& subcommand, const RunFlags& flags);

/// Scene with the command-line overrides applied; this is what gets hashed.
SceneConfig apply_overrides(SceneConfig config, const std::string& subcommand, const RunFlags& flags);

/// "x,y,z" per line; blank lines and lines starting with '#' are skipped, as
/// is a leading header row that does not parse as numbers.
std::vector<Triple> read_points_csv(const std::filesystem::path& path);

Triple parse_triple(const std::string& text);
/// "a:b:n" with n >= 1.
std::tuple<double, double, int> parse_range(const std::string& text);
/// "NTxNP", e.g. "8x16".
std::pair<int, int> parse_quad(const std::string& text);

/// One line per check: "PASS name value <= threshold".
std::string format_check(const Check& check);

/// Shortest round-trip decimal form, used in every CSV cell.
std::string format_number(double v);

}  // namespace qplas
