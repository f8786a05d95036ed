#pragma once

// Single-layer potential u_h(x) = -(1/2pi) \oint ln|x - x_C| mu ds on a closed
// contour, its Nystrom discretization with the logarithmic singularity split
// off and integrated exactly against trigonometric interpolants, and the
// one-sided normal derivatives on the contour.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coolshape/errors.hpp"
#include "coolshape/fourier.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/spectral.hpp"

namespace coolshape {

using LayerDensity = ContourFunction;

namespace detail {

inline void check_density(const Contour& c, const VectorXd& mu, const char* who) {
  if (mu.size() != c.size())
    throw ArgumentError(std::string(who) + ": density has " + std::to_string(mu.size()) + " samples, contour has " +
                        std::to_string(c.size()));
}

}  // namespace detail

namespace detail {

// Contour and density resampled on Mf points, with trapezoid weights ds.
struct FineContour {
  VectorXd x, y, w_mu;
};

inline FineContour refine(const Contour& c, const VectorXd& mu, Index factor) {
  const Index Mf = c.size() * factor;
  FineContour f;
  f.x = fourier::upsample(c.x(), Mf);
  f.y = fourier::upsample(c.y(), Mf);
  const VectorXd dx = fourier::upsample(c.dx(), Mf), dy = fourier::upsample(c.dy(), Mf);
  const double dt = 2.0 * std::numbers::pi / static_cast<double>(Mf);
  f.w_mu = (fourier::upsample(mu, Mf).array() * (dx.array().square() + dy.array().square()).sqrt() * dt).matrix();
  return f;
}

inline double segment_distance(const Vector2d& p, const Vector2d& a, const Vector2d& b) {
  const Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Upsampling factor that keeps the trapezoid rule accurate at point p: the
// error decays like exp(-2 pi d / h), so h is refined to about d / 6.
inline Index refinement_factor(const Contour& c, const Vector2d& p, Index max_factor) {
  const Index M = c.size();
  const double h = c.arc_step();
  double d = std::numeric_limits<double>::infinity();
  for (Index l = 0; l < M; ++l) d = std::min(d, segment_distance(p, c.point(l), c.point((l + 1) % M)));
  // chords cut inside the curve by at most h^2 kappa / 8
  d = std::max(0.5 * d, d - h * h);
  Index f = 1;
  while (f < max_factor && 6.0 * h / static_cast<double>(f) > d) f *= 2;
  return f;
}

constexpr Index kMaxRefinement = 1024;

// Runs kernel(point_index, fine_contour) for every point, grouping points by
// refinement level so each upsampled contour is built once.
template <typename Kernel>
void for_each_refined(const Contour& c, const VectorXd& mu, std::span<const Vector2d> points, Kernel&& kernel) {
  const Index max_factor = std::max<Index>(1, std::min<Index>(kMaxRefinement, (1 << 18) / c.size()));
  std::map<Index, std::vector<Index>> levels;
  for (Index r = 0; r < static_cast<Index>(points.size()); ++r)
    levels[refinement_factor(c, points[static_cast<std::size_t>(r)], max_factor)].push_back(r);
  for (const auto& [factor, idx] : levels) {
    const FineContour f = refine(c, mu, factor);
    for (Index r : idx) kernel(r, f);
  }
}

}  // namespace detail

/// Single-layer potential at points off the contour: trapezoid rule, with the
/// density and contour Fourier-upsampled for points close to the curve.
inline VectorXd eval_single_layer(const Contour& c, const VectorXd& mu, std::span<const Vector2d> points) {
  detail::check_density(c, mu, "eval_single_layer");
  VectorXd out(static_cast<Index>(points.size()));
  detail::for_each_refined(c, mu, points, [&](Index r, const detail::FineContour& f) {
    const Vector2d& p = points[static_cast<std::size_t>(r)];
    double acc = 0.0;
    for (Index l = 0; l < f.x.size(); ++l) {
      const double d2 = (p.x() - f.x[l]) * (p.x() - f.x[l]) + (p.y() - f.y[l]) * (p.y() - f.y[l]);
      if (d2 <= 1e-16)
        throw ArgumentError("eval_single_layer: point " + std::to_string(r) + " lies on the contour");
      acc += 0.5 * std::log(d2) * f.w_mu[l];
    }
    out[r] = -acc / (2.0 * std::numbers::pi);
  });
  return out;
}

/// Gradient of the single-layer potential at points off the contour (columns: d/dx, d/dy).
inline Eigen::MatrixX2d single_layer_gradient(const Contour& c, const VectorXd& mu,
                                              std::span<const Vector2d> points) {
  detail::check_density(c, mu, "single_layer_gradient");
  Eigen::MatrixX2d out(static_cast<Index>(points.size()), 2);
  detail::for_each_refined(c, mu, points, [&](Index r, const detail::FineContour& f) {
    const Vector2d& p = points[static_cast<std::size_t>(r)];
    Vector2d acc(0.0, 0.0);
    for (Index l = 0; l < f.x.size(); ++l) {
      const Vector2d d(p.x() - f.x[l], p.y() - f.y[l]);
      const double d2 = d.squaredNorm();
      if (d2 <= 1e-16)
        throw ArgumentError("single_layer_gradient: point " + std::to_string(r) + " lies on the contour");
      acc += (f.w_mu[l] / d2) * d;
    }
    out.row(r) = (-acc / (2.0 * std::numbers::pi)).transpose();
  });
  return out;
}

/// Weights R_j^M(t_i) for the exact integral of ln(4 sin^2((t-t')/2)) against the
/// trigonometric interpolant; depends on (i - j) mod M only, entry d holds the
/// value at t_i - t_j = 2*pi*d/M.
inline VectorXd log_sine_weights(Index M) {
  if (M % 2 != 0) throw ArgumentError("log_sine_weights: M must be even");
  VectorXd R(M);
  const double Md = static_cast<double>(M);
  for (Index d = 0; d < M; ++d) {
    const double tau = 2.0 * std::numbers::pi * static_cast<double>(d) / Md;
    double acc = 0.0;
    for (Index m = 1; m < M / 2; ++m) acc += std::cos(static_cast<double>(m) * tau) / static_cast<double>(m);
    // cos(M*tau/2) = (-1)^d on the grid
    acc += ((d % 2 == 0) ? 1.0 : -1.0) / Md;
    R[d] = -2.0 / Md * acc;
  }
  return R;
}

struct NystromOperators {
  MatrixXd K1;                       // regular part of the single-layer trace
  MatrixXd K2;                       // log-sine part, integrated exactly
  MatrixXd B_boundary;               // (4N-4) x M: normal flux of u_h at boundary nodes
  std::vector<Index> boundary_index; // grid rows of B_boundary
  Index grid_size = 0;               // N^2

  /// (K1 + K2) mu is the single-layer potential on the contour.
  MatrixXd K() const { return K1 + K2; }

  /// Full N^2 x M matrix B (zero rows at interior nodes).
  MatrixXd dense_B() const {
    MatrixXd B = MatrixXd::Zero(grid_size, B_boundary.cols());
    for (std::size_t r = 0; r < boundary_index.size(); ++r)
      B.row(boundary_index[r]) = B_boundary.row(static_cast<Index>(r));
    return B;
  }
};

/// Assembles K1, K2 and B for an arc-length-equispaced contour.
inline NystromOperators build_nystrom(const Contour& c, const ChebGrid& g) {
  if (!c.is_equispaced(kRemeshTol)) throw ArgumentError("build_nystrom: contour is not equispaced in arc length");
  if (!contains_in_domain(c, 1e-10)) throw GeometryError("build_nystrom: contour touches the domain boundary");
  const Index M = c.size();
  const double L = c.length();
  const double pi = std::numbers::pi;
  const double Md = static_cast<double>(M);

  NystromOperators ops;
  ops.grid_size = g.size();
  ops.boundary_index = g.boundary_index;

  ops.K1.resize(M, M);
  const double k1_scale = -L / (2.0 * pi * Md);
  for (Index i = 0; i < M; ++i) {
    for (Index j = 0; j < M; ++j) {
      if (i == j) {
        ops.K1(i, i) = k1_scale * std::log(L / (2.0 * pi));
        continue;
      }
      const double dist = std::hypot(c.x()[i] - c.x()[j], c.y()[i] - c.y()[j]);
      const double s = std::abs(2.0 * std::sin(0.5 * (c.parameter(i) - c.parameter(j))));
      ops.K1(i, j) = k1_scale * std::log(dist / s);
    }
  }

  // The log-sine part of -(1/2pi) \oint ln|x - x'| mu ds equals
  // -(L/4pi) sum_j R_j(t_i) mu_j.
  const VectorXd R = log_sine_weights(M);
  ops.K2.resize(M, M);
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < M; ++j) ops.K2(i, j) = -L / (4.0 * pi) * R[(i - j + M) % M];

  const Index nb = static_cast<Index>(g.boundary_index.size());
  ops.B_boundary.resize(nb, M);
  const double w = -c.arc_step() / (2.0 * pi);
  for (Index r = 0; r < nb; ++r) {
    const Index flat = g.boundary_index[static_cast<std::size_t>(r)];
    const Index i = flat / g.N, j = flat % g.N;
    const Vector2d b(g.nodes[i], g.nodes[j]);
    const Vector2d n = boundary_normal(g, i, j);
    for (Index l = 0; l < M; ++l) {
      const Vector2d d = b - c.point(l);
      ops.B_boundary(r, l) = w * d.dot(n) / d.squaredNorm();
    }
  }
  return ops;
}

/// One-sided normal derivatives of the single-layer potential on the contour.
/// Side 1 is the enclosed region, side 2 the exterior; the normal points from
/// side 1 into side 2.
struct NormalTraces {
  ContourFunction side1;
  ContourFunction side2;
};

inline NormalTraces trace_normal_derivatives(const Contour& c, const VectorXd& mu) {
  detail::check_density(c, mu, "trace_normal_derivatives");
  const Index M = c.size();
  const Eigen::MatrixX2d n = normals(c);
  const ContourFunction kappa = curvature(c);
  const double w = -c.arc_step() / (2.0 * std::numbers::pi);
  VectorXd avg(M);
  for (Index i = 0; i < M; ++i) {
    double acc = 0.5 * kappa[i] * mu[i];
    for (Index l = 0; l < M; ++l) {
      if (l == i) continue;
      const Vector2d d = c.point(i) - c.point(l);
      acc += (n(i, 0) * d.x() + n(i, 1) * d.y()) / d.squaredNorm() * mu[l];
    }
    avg[i] = w * acc;
  }
  // side1 - side2 = mu, (side1 + side2)/2 = avg
  return {{avg + 0.5 * mu, c.length()}, {avg - 0.5 * mu, c.length()}};
}

}  // namespace coolshape
