#include "qplas/vie_solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qplas/green_free.hpp"

namespace qplas {

SolverOptions::Method parse_solver_method(const std::string& name) {
  if (name == "auto") return SolverOptions::Method::Auto;
  if (name == "dense") return SolverOptions::Method::Dense;
  if (name == "iterative") return SolverOptions::Method::Iterative;
  throw ConfigError("unknown solver method '" + name + "' (auto|dense|iterative)");
}

std::string to_string(SolverOptions::Method m) {
  switch (m) {
    case SolverOptions::Method::Auto: return "auto";
    case SolverOptions::Method::Dense: return "dense";
    case SolverOptions::Method::Iterative: return "iterative";
  }
  return "auto";
}

// ---------------------------------------------------------------------------
// InteractionOperator

InteractionOperator::InteractionOperator(const VoxelGrid& grid, std::vector<cplx> beta,
                                         double omega, std::size_t max_dense_unknowns,
                                         std::optional<cplx> self_override)
    : centers_(grid.centers),
      beta_(std::move(beta)),
      omega_(omega),
      edge_(grid.voxel_edge),
      dv_(grid.voxel_volume()),
      self_(0.0) {
  if (!(omega > 0.0)) throw std::invalid_argument("assemble: omega must be > 0");
  if (beta_.size() != centers_.size())
    throw std::invalid_argument("assemble: beta length does not match voxel count");
  if (!centers_.empty()) self_ = self_override ? *self_override : self_term_coefficient(dv_, omega);

  const std::size_t n = unknowns();
  if (n == 0 || n > max_dense_unknowns) return;
  Eigen::MatrixXcd k(n, n);
  for (std::size_t j = 0; j < voxels(); ++j) {
    k.block<3, 3>(3 * j, 3 * j) = self_ * Dyadic::Identity();
    for (std::size_t i = j + 1; i < voxels(); ++i) {
      const Dyadic b = dv_ * g0_closed(centers_[i], centers_[j], omega_);
      k.block<3, 3>(3 * i, 3 * j) = b;
      k.block<3, 3>(3 * j, 3 * i) = b.transpose();
    }
  }
  dense_ = std::move(k);
}

Dyadic InteractionOperator::kernel_block(std::size_t i, std::size_t j) const {
  if (dense_) return dense_->block<3, 3>(3 * i, 3 * j);
  if (i == j) return self_ * Dyadic::Identity();
  return dv_ * g0_closed(centers_[i], centers_[j], omega_);
}

const Eigen::MatrixXcd& InteractionOperator::kernel() const {
  if (!dense_) throw std::logic_error("interaction operator is matvec-only");
  return *dense_;
}

Eigen::MatrixXcd InteractionOperator::matrix() const {
  const std::size_t n = unknowns();
  Eigen::MatrixXcd a(n, n);
  for (std::size_t j = 0; j < voxels(); ++j)
    for (std::size_t i = 0; i < voxels(); ++i)
      a.block<3, 3>(3 * i, 3 * j) = -kernel_block(i, j) * beta_[j];
  a.diagonal().array() += 1.0;
  return a;
}

Eigen::MatrixXcd InteractionOperator::apply_kernel(const Eigen::MatrixXcd& q) const {
  if (dense_) return (*dense_) * q;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(q.rows(), q.cols());
  for (std::size_t i = 0; i < voxels(); ++i)
    for (std::size_t j = 0; j < voxels(); ++j)
      out.middleRows<3>(3 * i) += kernel_block(i, j) * q.middleRows<3>(3 * j);
  return out;
}

Eigen::MatrixXcd InteractionOperator::apply(const Eigen::MatrixXcd& p) const {
  Eigen::MatrixXcd bp = p;
  for (std::size_t j = 0; j < voxels(); ++j) bp.middleRows<3>(3 * j) *= beta_[j];
  return p - apply_kernel(bp);
}

PolarizationField InteractionOperator::apply(const PolarizationField& p) const {
  return apply(Eigen::MatrixXcd(p)).col(0);
}

std::optional<std::size_t> InteractionOperator::voxel_at(const Vec3& p) const {
  const double tol2 = 1e-18 * edge_ * edge_;
  for (std::size_t i = 0; i < centers_.size(); ++i)
    if ((centers_[i] - p).squaredNorm() <= tol2) return i;
  return std::nullopt;
}

Dyadic InteractionOperator::free_green(const Vec3& x, const Vec3& y) const {
  if ((x - y).squaredNorm() <= 1e-18 * edge_ * edge_) {
    if (voxel_at(x)) return (self_ / dv_) * Dyadic::Identity();
    throw std::invalid_argument(
        "coincident evaluation and source points off the grid; use im_green_at for x == y");
  }
  return g0_closed(x, y, omega_);
}

Eigen::MatrixXcd InteractionOperator::free_column(const Vec3& x) const {
  Eigen::MatrixXcd col(unknowns(), 3);
  for (std::size_t i = 0; i < voxels(); ++i) col.middleRows<3>(3 * i) = free_green(centers_[i], x);
  return col;
}

Eigen::MatrixXcd InteractionOperator::scatter_at(const Vec3& r, const Eigen::MatrixXcd& p) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(3, p.cols());
  for (std::size_t i = 0; i < voxels(); ++i) {
    if (beta_[i] == 0.0) continue;
    out += (dv_ * beta_[i]) * free_green(r, centers_[i]) * p.middleRows<3>(3 * i);
  }
  return out;
}

InteractionOperator assemble(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                             const SolverOptions& opts) {
  auto medium = eps_on_grid(grid, materials, omega);
  return InteractionOperator(grid, std::move(medium.beta), omega, opts.max_dense_unknowns);
}

// ---------------------------------------------------------------------------
// FredholmSolver

struct FredholmSolver::Lu {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
};

FredholmSolver::FredholmSolver(std::shared_ptr<const InteractionOperator> op, SolverOptions opts)
    : op_(std::move(op)), opts_(opts) {
  if (!op_) throw std::invalid_argument("FredholmSolver: null operator");
  if (!(opts_.tol > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
  const std::size_t n = op_->unknowns();
  bool dense = false;
  switch (opts_.method) {
    case SolverOptions::Method::Dense: dense = true; break;
    case SolverOptions::Method::Iterative: dense = false; break;
    case SolverOptions::Method::Auto: dense = n <= opts_.dense_limit; break;
  }
  if (dense && n > 0) {
    if (!op_->is_dense())
      throw std::runtime_error("dense solve requested above max_dense_unknowns (" +
                               std::to_string(opts_.max_dense_unknowns) + ")");
    auto lu = std::make_shared<Lu>();
    lu->lu.compute(op_->matrix());
    if (!(lu->lu.rcond() > 1e-15))
      throw SolverError(
          "interaction operator is numerically singular (real, resonant beta: model violates Im eps > 0)",
          std::numeric_limits<double>::infinity());
    lu_ = std::move(lu);
  }
}

Eigen::MatrixXcd FredholmSolver::solve(const Eigen::MatrixXcd& rhs, SolveReport* report) const {
  return lu_ ? solve_dense(rhs, report) : solve_iterative(rhs, report);
}

PolarizationField FredholmSolver::solve(const PolarizationField& rhs, SolveReport* report) const {
  return solve(Eigen::MatrixXcd(rhs), report).col(0);
}

namespace {

double worst_relative_residual(const InteractionOperator& op, const Eigen::MatrixXcd& x,
                               const Eigen::MatrixXcd& b) {
  const Eigen::MatrixXcd r = b - op.apply(x);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    const double nb = b.col(c).norm();
    const double nr = r.col(c).norm();
    worst = std::max(worst, nb > 0.0 ? nr / nb : nr);
  }
  return worst;
}

}  // namespace

Eigen::MatrixXcd FredholmSolver::solve_dense(const Eigen::MatrixXcd& rhs, SolveReport* report) const {
  if (rhs.rows() != static_cast<Eigen::Index>(op_->unknowns()))
    throw std::invalid_argument("rhs length does not match operator size");
  if (!rhs.allFinite()) throw std::invalid_argument("rhs is not finite");
  if (op_->unknowns() == 0) return rhs;
  if (!lu_) throw std::logic_error("dense factorization not available");
  Eigen::MatrixXcd x = lu_->lu.solve(rhs);
  double res = worst_relative_residual(*op_, x, rhs);
  int refinements = 0;
  while (res > opts_.tol && refinements < 3) {
    x += lu_->lu.solve(rhs - op_->apply(x));
    res = worst_relative_residual(*op_, x, rhs);
    ++refinements;
  }
  if (report) *report = {"dense-lu", refinements, res};
  if (res > opts_.tol) throw SolverError("dense solve missed the residual target", res);
  return x;
}

Eigen::MatrixXcd FredholmSolver::solve_iterative(const Eigen::MatrixXcd& rhs, SolveReport* report) const {
  const auto n = static_cast<Eigen::Index>(op_->unknowns());
  if (rhs.rows() != n) throw std::invalid_argument("rhs length does not match operator size");
  if (!rhs.allFinite()) throw std::invalid_argument("rhs is not finite");
  if (n == 0) return rhs;

  // Right Jacobi preconditioner: the operator diagonal is 1 - M beta_i.
  Eigen::VectorXcd inv_diag(n);
  for (std::size_t i = 0; i < op_->voxels(); ++i)
    inv_diag.segment<3>(3 * i).setConstant(1.0 / (1.0 - op_->self_coefficient() * op_->beta()[i]));

  const int m = std::max(2, std::min<int>(opts_.restart, static_cast<int>(n)));
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, rhs.cols());
  int total_iterations = 0;
  double worst = 0.0;

  for (Eigen::Index col = 0; col < rhs.cols(); ++col) {
    const Eigen::VectorXcd b = rhs.col(col);
    const double bnorm = b.norm();
    if (bnorm == 0.0) continue;
    const double target = opts_.tol * bnorm;
    Eigen::VectorXcd xc = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXcd r = b;
    double rnorm = bnorm;
    int it = 0;
    Eigen::MatrixXcd v(n, m + 1);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<double> cs(m);
    std::vector<cplx> sn(m);
    Eigen::VectorXcd g(m + 1);

    while (rnorm > target && it < opts_.max_iterations) {
      v.col(0) = r / rnorm;
      g.setZero();
      g(0) = rnorm;
      h.setZero();
      int j = 0;
      for (; j < m && it < opts_.max_iterations; ++j, ++it) {
        Eigen::VectorXcd w = op_->apply(PolarizationField(inv_diag.cwiseProduct(v.col(j))));
        // Modified Gram-Schmidt with one re-orthogonalization pass.
        for (int pass = 0; pass < 2; ++pass)
          for (int i = 0; i <= j; ++i) {
            const cplx hij = v.col(i).dot(w);
            h(i, j) += hij;
            w -= hij * v.col(i);
          }
        const double wn = w.norm();
        h(j + 1, j) = wn;
        if (wn > 0.0) v.col(j + 1) = w / wn;
        for (int i = 0; i < j; ++i) {
          const cplx a = h(i, j), bb = h(i + 1, j);
          h(i, j) = cs[i] * a + sn[i] * bb;
          h(i + 1, j) = -std::conj(sn[i]) * a + cs[i] * bb;
        }
        const cplx a = h(j, j), bb = h(j + 1, j);
        const double t = std::sqrt(std::norm(a) + std::norm(bb));
        if (std::abs(a) == 0.0) {
          cs[j] = 0.0;
          sn[j] = 1.0;
          h(j, j) = bb;
        } else {
          const cplx phase = a / std::abs(a);
          cs[j] = std::abs(a) / t;
          sn[j] = phase * std::conj(bb) / t;
          h(j, j) = phase * t;
        }
        h(j + 1, j) = 0.0;
        g(j + 1) = -std::conj(sn[j]) * g(j);
        g(j) = cs[j] * g(j);
        if (std::abs(g(j + 1)) <= 0.5 * target || wn == 0.0) {
          ++j;
          ++it;
          break;
        }
      }
      const Eigen::VectorXcd y =
          h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
      xc += inv_diag.cwiseProduct(v.leftCols(j) * y);
      r = b - op_->apply(xc);
      rnorm = r.norm();
    }
    total_iterations += it;
    worst = std::max(worst, rnorm / bnorm);
    x.col(col) = xc;
    if (rnorm > target) {
      if (report) *report = {"gmres", total_iterations, worst};
      throw SolverError("GMRES did not converge in " + std::to_string(opts_.max_iterations) +
                            " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")",
                        rnorm / bnorm);
    }
  }
  if (report) *report = {"gmres", total_iterations, worst};
  return x;
}

PolarizationField solve_system(const InteractionOperator& op, const PolarizationField& rhs,
                               double tol, const SolverOptions& opts) {
  SolverOptions o = opts;
  o.tol = tol;
  // Non-owning alias: the solver does not outlive this call.
  std::shared_ptr<const InteractionOperator> alias(std::shared_ptr<void>(), &op);
  return FredholmSolver(alias, o).solve(rhs);
}

// ---------------------------------------------------------------------------
// MediumSolver

MediumSolver::MediumSolver(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                           const SolverOptions& opts)
    : MediumSolver(grid, eps_on_grid(grid, materials, omega), opts) {}

MediumSolver::MediumSolver(const VoxelGrid& grid, GridMedium medium, const SolverOptions& opts,
                           std::optional<cplx> self_override)
    : grid_(grid),
      medium_(std::move(medium)),
      solver_(std::make_shared<const InteractionOperator>(grid_, medium_.beta, medium_.omega,
                                                          opts.max_dense_unknowns, self_override),
              opts) {}

Eigen::MatrixXcd MediumSolver::source_fields(const Vec3& y) const {
  return solver_.solve(op().free_column(y));
}

Dyadic MediumSolver::scattered(const Vec3& x, const Vec3&, const Eigen::MatrixXcd& fields_y) const {
  return op().scatter_at(x, fields_y);
}

Dyadic MediumSolver::evaluate(const Vec3& x, const Vec3& y, const Eigen::MatrixXcd& fields_y) const {
  return op().free_green(x, y) + op().scatter_at(x, fields_y);
}

Dyadic MediumSolver::green(const Vec3& x, const Vec3& y) const {
  return evaluate(x, y, source_fields(y));
}

RealDyadic MediumSolver::im_green_at(const Vec3& x) const {
  RealDyadic out = (omega() / (6.0 * std::numbers::pi)) * RealDyadic::Identity();
  if (grid_.empty()) return out;
  const Dyadic s = op().scatter_at(x, source_fields(x));
  out += s.imag();
  return out;
}

Dyadic green_medium(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                    const Vec3& x, const Vec3& y, const SolverOptions& opts) {
  return MediumSolver(grid, materials, omega, opts).green(x, y);
}

DysonResidual dyson_residual(const MediumSolver& medium, const Vec3& x, const Vec3& y) {
  const auto& op = medium.op();
  const Eigen::MatrixXcd fy = medium.source_fields(y);
  const Eigen::MatrixXcd fx = medium.source_fields(x);
  const Dyadic g = medium.evaluate(x, y, fy);
  const Dyadic diff = g - op.free_green(x, y);

  // int beta G0(x, z) G(z, y) with G(z, y) the solved grid field.
  Dyadic g0_g = Dyadic::Zero();
  // int beta G(x, z) G0(z, y) with G(x, z) = G(z, x)^T from the source-x solve.
  Dyadic g_g0 = Dyadic::Zero();
  const double dv = op.voxel_volume();
  for (std::size_t i = 0; i < op.voxels(); ++i) {
    const cplx w = dv * op.beta()[i];
    if (w == 0.0) continue;
    const Vec3& z = op.centers()[i];
    g0_g += w * op.free_green(x, z) * fy.middleRows<3>(3 * i);
    g_g0 += w * fx.middleRows<3>(3 * i).transpose() * op.free_green(z, y);
  }
  return {(diff - g0_g).norm(), (diff - g_g0).norm(), g.norm()};
}

DysonResidual dyson_residual(const VoxelGrid& grid, const MaterialMap& materials, double omega,
                             const Vec3& x, const Vec3& y, const SolverOptions& opts) {
  return dyson_residual(MediumSolver(grid, materials, omega, opts), x, y);
}

}  // namespace qplas
