#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>

#include "qplas/geometry.hpp"
#include "qplas/types.hpp"

namespace qplas {

/// Complex 3-vector per voxel, stacked as [x_0 y_0 z_0 x_1 ...].
using PolarizationField = Eigen::VectorXcd;

struct SolverOptions {
  enum class Method { Auto, Dense, Iterative };
  Method method = Method::Auto;
  double tol = 1e-10;
  /// Auto uses dense LU while 3N is at or below this.
  std::size_t dense_limit = 3000;
  /// Above this many unknowns the kernel is never stored; matvecs
  /// recompute blocks on the fly.
  std::size_t max_dense_unknowns = 12000;
  int max_iterations = 2000;
  int restart = 80;
};

SolverOptions::Method parse_solver_method(const std::string& name);
std::string to_string(SolverOptions::Method m);

/// Collocation discretization of p - int_V G0 beta p.
///
/// The kernel K holds dV G0(z_i, z_j) off the diagonal and M(a) I on it, so
/// K is symmetric as a 3N x 3N matrix; the operator is I - K diag(beta).
class InteractionOperator {
 public:
  InteractionOperator(const VoxelGrid& grid, std::vector<cplx> beta, double omega,
                      std::size_t max_dense_unknowns = SolverOptions{}.max_dense_unknowns,
                      std::optional<cplx> self_override = std::nullopt);

  std::size_t voxels() const { return centers_.size(); }
  std::size_t unknowns() const { return 3 * centers_.size(); }
  double omega() const { return omega_; }
  double voxel_volume() const { return dv_; }
  cplx self_coefficient() const { return self_; }
  const std::vector<Vec3>& centers() const { return centers_; }
  const std::vector<cplx>& beta() const { return beta_; }
  bool is_dense() const { return dense_.has_value(); }

  Dyadic kernel_block(std::size_t i, std::size_t j) const;
  /// Stored kernel K; throws std::logic_error in matvec-only mode.
  const Eigen::MatrixXcd& kernel() const;
  /// I - K diag(beta) as a dense matrix.
  Eigen::MatrixXcd matrix() const;

  PolarizationField apply(const PolarizationField& p) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& p) const;

  /// Free Green tensor G0(z_i, x) for every voxel, stacked 3N x 3. When x is
  /// a voxel center its own block is the self term M/dV I.
  Eigen::MatrixXcd free_column(const Vec3& x) const;
  /// G0 between arbitrary points with the same voxel-center convention.
  Dyadic free_green(const Vec3& x, const Vec3& y) const;
  /// dV sum_i G0(r, z_i) beta_i p_i for each column of p (3N x m) -> 3 x m.
  Eigen::MatrixXcd scatter_at(const Vec3& r, const Eigen::MatrixXcd& p) const;

  std::optional<std::size_t> voxel_at(const Vec3& p) const;

 private:
  Eigen::MatrixXcd apply_kernel(const Eigen::MatrixXcd& q) const;

  std::vector<Vec3> centers_;
  std::vector<cplx> beta_;
  double omega_;
  double edge_;
  double dv_;
  cplx self_;
  std::optional<Eigen::MatrixXcd> dense_;
};

InteractionOperator assemble(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                             const SolverOptions& opts = {});

struct SolveReport {
  std::string method;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Dense LU or restarted GMRES on an InteractionOperator.
class FredholmSolver {
 public:
  FredholmSolver(std::shared_ptr<const InteractionOperator> op, SolverOptions opts = {});

  const InteractionOperator& op() const { return *op_; }
  const SolverOptions& options() const { return opts_; }
  bool uses_dense() const { return lu_ != nullptr; }

  /// Solves for every column; throws SolverError if any column misses
  /// ||A x - b|| <= tol ||b||.
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs, SolveReport* report = nullptr) const;
  PolarizationField solve(const PolarizationField& rhs, SolveReport* report = nullptr) const;

  Eigen::MatrixXcd solve_dense(const Eigen::MatrixXcd& rhs, SolveReport* report = nullptr) const;
  Eigen::MatrixXcd solve_iterative(const Eigen::MatrixXcd& rhs, SolveReport* report = nullptr) const;

 private:
  struct Lu;
  std::shared_ptr<const InteractionOperator> op_;
  SolverOptions opts_;
  std::shared_ptr<const Lu> lu_;
};

PolarizationField solve_system(const InteractionOperator& op, const PolarizationField& rhs,
                               double tol, const SolverOptions& opts = {});

/// Discrete medium Green tensor at one frequency. Holds the factorized
/// operator; every evaluation reuses it.
class MediumSolver {
 public:
  MediumSolver(const VoxelGrid& grid, const MaterialMap& materials, double omega,
               const SolverOptions& opts = {});
  MediumSolver(const VoxelGrid& grid, GridMedium medium, const SolverOptions& opts = {},
               std::optional<cplx> self_override = std::nullopt);

  double omega() const { return medium_.omega; }
  const VoxelGrid& grid() const { return grid_; }
  const GridMedium& medium() const { return medium_; }
  const InteractionOperator& op() const { return solver_.op(); }
  const FredholmSolver& solver() const { return solver_; }

  /// Grid values G(z_i, y) of the three source columns (3N x 3).
  Eigen::MatrixXcd source_fields(const Vec3& y) const;
  /// G(x, y) = G0(x, y) + dV sum_i G0(x, z_i) beta_i G(z_i, y).
  Dyadic evaluate(const Vec3& x, const Vec3& y, const Eigen::MatrixXcd& fields_y) const;
  /// Throws std::invalid_argument for x == y off the grid (use im_green_at).
  Dyadic green(const Vec3& x, const Vec3& y) const;
  /// Scattered part G - G0 at (x, y).
  Dyadic scattered(const Vec3& x, const Vec3& y, const Eigen::MatrixXcd& fields_y) const;
  /// Im G(x, x): (omega/6 pi c) I plus the imaginary part of the scattered field.
  RealDyadic im_green_at(const Vec3& x) const;

 private:
  VoxelGrid grid_;
  GridMedium medium_;
  FredholmSolver solver_;
};

Dyadic green_medium(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                    const Vec3& x, const Vec3& y, const SolverOptions& opts = {});

struct DysonResidual {
  double via_g0_g = 0.0;  // ||(G - G0) - int beta G0 G||_F
  double via_g_g0 = 0.0;  // ||(G - G0) - int beta G G0||_F
  double green_norm = 0.0;

  double absolute() const { return std::max(via_g0_g, via_g_g0); }
  double relative() const { return green_norm > 0.0 ? absolute() / green_norm : absolute(); }
};

DysonResidual dyson_residual(const MediumSolver& medium, const Vec3& x, const Vec3& y);
DysonResidual dyson_residual(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                             const Vec3& x, const Vec3& y, const SolverOptions& opts = {});

}  // namespace qplas
