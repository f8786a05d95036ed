#pragma once

// Coupled Poisson / boundary-integral solver.
//
// Unknowns: u_p on the Chebyshev grid (U) and the single-layer density on the
// contour (m). The block system
//
//   [ A   B ] [U]   [q/k at interior rows, 0 at boundary rows]
//   [ C   D ] [m] = [(gamma/k) u0 1                          ]
//
// has A = -Laplacian at interior rows and the outward normal derivative at
// boundary rows, B the boundary flux of u_h, C = (gamma/k) P and
// D = I + (gamma/k)(K1 + K2). A depends on the grid only and is singular
// (constants), so it is factored once per grid as A + (1/N^2) 1 1^T and the
// coupled system is reduced to an (M+1) x (M+1) Schur complement per contour.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coolshape/errors.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/potential.hpp"
#include "coolshape/spectral.hpp"

namespace coolshape {

/// A scalar field on the domain: a closed-form function, or samples on a grid.
struct FieldSpec {
  std::function<double(double, double)> function;
  std::optional<GridField> samples;  // lexicographic samples for a specific N
  std::string name;

  static FieldSpec constant(double c) {
    return {[c](double, double) { return c; }, std::nullopt, "constant"};
  }

  GridField sample(const ChebGrid& g) const {
    if (samples) {
      if (samples->size() != g.size())
        throw ArgumentError("FieldSpec '" + name + "': gridded samples do not match N=" + std::to_string(g.N));
      return *samples;
    }
    if (!function) throw ArgumentError("FieldSpec '" + name + "' is empty");
    return g.sample(function);
  }

  /// Values at arbitrary points; gridded samples are interpolated spectrally.
  VectorXd at(const ChebGrid& g, std::span<const Vector2d> points) const {
    if (samples) return interpolate_spectral(g, sample(g), points);
    if (!function) throw ArgumentError("FieldSpec '" + name + "' is empty");
    VectorXd out(static_cast<Index>(points.size()));
    for (std::size_t r = 0; r < points.size(); ++r) out[static_cast<Index>(r)] = function(points[r].x(), points[r].y());
    return out;
  }
};

struct PhysicsConfig {
  double k = 1.0;      // conductivity
  double gamma = 1.0;  // heat-transfer coefficient
  double u0 = 10.0;    // reference temperature of the cooling contour
  FieldSpec q = FieldSpec::constant(0.0);
  FieldSpec target = FieldSpec::constant(10.0);
  Rect region_A = Rect::domain();

  void validate() const {
    if (!(k > 0.0)) throw ArgumentError("PhysicsConfig: k must be positive");
    if (!(gamma > 0.0)) throw ArgumentError("PhysicsConfig: gamma must be positive");
    if (!region_A.inside(Rect::domain())) throw ArgumentError("PhysicsConfig: region_A must lie inside the domain");
  }
};

/// Grid-only part of the coupled system, factored once per N.
class GridSolver {
 public:
  explicit GridSolver(Index N) : grid_(build_grid(N)) {
    const Index n2 = grid_.size();
    detail::fill_neumann_laplacian(grid_, storage_, -1.0);
    storage_.array() += 1.0 / static_cast<double>(n2);
    lu_ = std::make_unique<Eigen::PartialPivLU<Eigen::Ref<MatrixXd>>>(storage_);
    condition_ = 1.0 / lu_->rcond();
    const Index nb = static_cast<Index>(grid_.boundary_index.size());
    MatrixXd E = MatrixXd::Zero(n2, nb);
    for (Index r = 0; r < nb; ++r) E(grid_.boundary_index[static_cast<std::size_t>(r)], r) = 1.0;
    Z_ = lu_->solve(E);
  }

  GridSolver(const GridSolver&) = delete;
  GridSolver& operator=(const GridSolver&) = delete;

  /// Process-wide cache; the factorization is immutable and shared read-only.
  static std::shared_ptr<const GridSolver> shared(Index N) {
    static std::mutex mutex;
    static std::map<Index, std::shared_ptr<const GridSolver>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[N];
    if (!slot) slot = std::make_shared<const GridSolver>(N);
    return slot;
  }

  const ChebGrid& grid() const { return grid_; }
  double condition_estimate() const { return condition_; }

  /// (A + (1/N^2) 1 1^T)^{-1} rhs
  GridField solve(const GridField& rhs) const { return lu_->solve(rhs); }

  /// Columns of the regularized inverse at the boundary nodes.
  const MatrixXd& boundary_columns() const { return Z_; }

  /// A U: -Laplacian at interior rows, outward normal derivative at boundary rows.
  GridField apply(const GridField& U) const {
    GridField out = apply_neumann_laplacian(grid_, U);
    for (Index i = 1; i + 1 < grid_.N; ++i)
      for (Index j = 1; j + 1 < grid_.N; ++j) out[grid_.index(i, j)] *= -1.0;
    return out;
  }

 private:
  ChebGrid grid_;
  MatrixXd storage_;
  std::unique_ptr<Eigen::PartialPivLU<Eigen::Ref<MatrixXd>>> lu_;
  MatrixXd Z_;
  double condition_ = 0.0;
};

struct CoupledSolution {
  GridField up;            // u_p at grid nodes
  ContourFunction mu;      // single-layer density
  GridField u;             // u_p + u_h at grid nodes
  ContourFunction u_on_C;  // continuous trace on the contour
  ContourFunction dn_up;   // normal derivative of u_p on the contour
  ContourFunction dn_u1;   // interior-side normal derivative of u
  ContourFunction dn_u2;   // exterior-side normal derivative of u
  double residual = 0.0;   // ||A z - b||_inf / ||b||_inf of the block system
  double condition_estimate = 0.0;
};

/// Coupled operator for one contour: Nystrom blocks, interpolation and the
/// factored Schur complement. Shared by the direct and adjoint solves.
class CoupledSystem {
 public:
  CoupledSystem(double k, double gamma, const Contour& contour, std::shared_ptr<const GridSolver> grid_solver)
      : k_(k), gamma_(gamma), contour_(contour), gs_(std::move(grid_solver)) {
    if (!(k > 0.0) || !(gamma > 0.0)) throw ArgumentError("CoupledSystem: k and gamma must be positive");
    const ChebGrid& g = gs_->grid();
    const Index M = contour_.size();
    ops_ = build_nystrom(contour_, g);
    std::vector<Vector2d> pts(static_cast<std::size_t>(M));
    for (Index l = 0; l < M; ++l) pts[static_cast<std::size_t>(l)] = contour_.point(l);
    P_ = interp_matrix(g, pts);
    K_ = ops_.K();
    normals_ = normals(contour_);

    const double r = gamma_ / k_;
    GB_ = gs_->boundary_columns() * ops_.B_boundary;  // N^2 x M
    MatrixXd S = MatrixXd::Zero(M + 1, M + 1);
    S.topLeftCorner(M, M) = MatrixXd::Identity(M, M) + r * K_ - r * (P_ * GB_);
    S.topRightCorner(M, 1) = r * P_.rowwise().sum();
    S.bottomLeftCorner(1, M) = GB_.colwise().mean();
    schur_.compute(S);
    condition_ = std::max(1.0 / schur_.rcond(), gs_->condition_estimate());
    if (!std::isfinite(condition_) || condition_ > 1e12) {
      std::ostringstream os;
      os << "coupled system is singular or ill-conditioned (condition estimate " << condition_ << ", N=" << g.N
         << ", M=" << M << ")";
      throw NumericalError(os.str(), condition_);
    }
  }

  const Contour& contour() const { return contour_; }
  const ChebGrid& grid() const { return gs_->grid(); }
  const NystromOperators& nystrom() const { return ops_; }
  const MatrixXd& interpolation() const { return P_; }
  double k() const { return k_; }
  double gamma() const { return gamma_; }
  double condition_estimate() const { return condition_; }

  struct Raw {
    GridField U;
    VectorXd m;
    double residual = 0.0;
  };

 private:
  Raw eliminate(const GridField& f1, const VectorXd& f2) const {
    const Index M = contour_.size();
    const double r = gamma_ / k_;
    const GridField g1 = gs_->solve(f1);
    VectorXd rhs(M + 1);
    rhs.head(M) = f2 - r * (P_ * g1);
    rhs[M] = g1.mean();
    const VectorXd z = schur_.solve(rhs);
    Raw out;
    out.m = z.head(M);
    out.U = g1 - GB_ * out.m;
    out.U.array() += z[M];
    return out;
  }

 public:
  /// Solves the block system for an arbitrary right-hand side.
  Raw solve(const GridField& f1, const VectorXd& f2) const {
    Raw out = eliminate(f1, f2);
    out.residual = residual(out.U, out.m, f1, f2);
    // one step of iterative refinement, kept only if it helps
    GridField r1;
    VectorXd r2;
    residual_vectors(out.U, out.m, f1, f2, r1, r2);
    const Raw corr = eliminate(r1, r2);
    Raw refined{out.U - corr.U, out.m - corr.m, 0.0};
    refined.residual = residual(refined.U, refined.m, f1, f2);
    return refined.residual < out.residual ? refined : out;
  }

  /// Max-norm residual of the full block system relative to the right-hand side.
  double residual(const GridField& U, const VectorXd& m, const GridField& f1, const VectorXd& f2) const {
    GridField r1;
    VectorXd r2;
    residual_vectors(U, m, f1, f2, r1, r2);
    const double bnorm = std::max(f1.cwiseAbs().maxCoeff(), f2.size() ? f2.cwiseAbs().maxCoeff() : 0.0);
    const double rnorm = std::max(r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff());
    return bnorm > 0.0 ? rnorm / bnorm : rnorm;
  }

  void residual_vectors(const GridField& U, const VectorXd& m, const GridField& f1, const VectorXd& f2,
                        GridField& r1, VectorXd& r2) const {
    const double r = gamma_ / k_;
    r1 = gs_->apply(U) - f1;
    const VectorXd Bm = ops_.B_boundary * m;
    for (std::size_t b = 0; b < ops_.boundary_index.size(); ++b) r1[ops_.boundary_index[b]] += Bm[static_cast<Index>(b)];
    r2 = r * (P_ * U) + m + r * (K_ * m) - f2;
  }

  /// Populates the full field and contour traces from (U, m).
  CoupledSolution assemble(const Raw& raw) const {
    const ChebGrid& g = grid();
    const double L = contour_.length();
    CoupledSolution s;
    s.up = raw.U;
    s.mu = {raw.m, L};
    std::vector<Vector2d> nodes(static_cast<std::size_t>(g.size()));
    for (Index f = 0; f < g.size(); ++f) nodes[static_cast<std::size_t>(f)] = {g.x(f), g.y(f)};
    s.u = raw.U + eval_single_layer(contour_, raw.m, nodes);
    s.u_on_C = {P_ * raw.U + K_ * raw.m, L};
    const auto [dx, dy] = grid_gradient(g, raw.U);
    s.dn_up = {(P_ * dx).cwiseProduct(normals_.col(0)) + (P_ * dy).cwiseProduct(normals_.col(1)), L};
    const NormalTraces h = trace_normal_derivatives(contour_, raw.m);
    s.dn_u1 = {s.dn_up.values + h.side1.values, L};
    s.dn_u2 = {s.dn_up.values + h.side2.values, L};
    s.residual = raw.residual;
    s.condition_estimate = condition_;
    return s;
  }

 private:
  double k_, gamma_;
  Contour contour_;
  std::shared_ptr<const GridSolver> gs_;
  NystromOperators ops_;
  MatrixXd P_, K_, GB_;
  Eigen::MatrixX2d normals_;
  Eigen::PartialPivLU<MatrixXd> schur_;
  double condition_ = 0.0;
};

/// Solves the direct problem: source q, Newton cooling towards u0 on the contour.
inline CoupledSolution solve_direct(const PhysicsConfig& cfg, const CoupledSystem& sys) {
  cfg.validate();
  const ChebGrid& g = sys.grid();
  GridField f1 = cfg.q.sample(g) / cfg.k;
  for (Index b : g.boundary_index) f1[b] = 0.0;
  const VectorXd f2 = VectorXd::Constant(sys.contour().size(), cfg.gamma / cfg.k * cfg.u0);
  return sys.assemble(sys.solve(f1, f2));
}

/// Solves the adjoint problem: same operator, source (u - ubar) on region A,
/// no forcing on the contour.
inline CoupledSolution solve_adjoint(const PhysicsConfig& cfg, const CoupledSystem& sys,
                                     const CoupledSolution& direct) {
  cfg.validate();
  const ChebGrid& g = sys.grid();
  if (direct.u.size() != g.size() || direct.mu.size() != sys.contour().size())
    throw ArgumentError("solve_adjoint: direct solution does not belong to this system");
  const GridField mask = region_mask(g, cfg.region_A);
  GridField f1 = (direct.u - cfg.target.sample(g)).cwiseProduct(mask) / cfg.k;
  for (Index b : g.boundary_index) f1[b] = 0.0;
  return sys.assemble(sys.solve(f1, VectorXd::Zero(sys.contour().size())));
}

/// Convenience: builds the system on the cached grid factorization and solves.
inline CoupledSolution solve_direct(const PhysicsConfig& cfg, const Contour& contour, Index N) {
  const CoupledSystem sys(cfg.k, cfg.gamma, contour, GridSolver::shared(N));
  return solve_direct(cfg, sys);
}

/// Pointwise residual k(dn_u2 - dn_u1) - gamma(u - u0) of the cooling condition.
inline VectorXd flux_jump_residual(const PhysicsConfig& cfg, const CoupledSolution& s) {
  return cfg.k * (s.dn_u2.values - s.dn_u1.values) - cfg.gamma * (s.u_on_C.values.array() - cfg.u0).matrix();
}

}  // namespace coolshape
