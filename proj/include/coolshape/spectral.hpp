#pragma once

// Chebyshev collocation on the square [-1,1]^2.
//
// Fields are stored lexicographically: entry i*N + j holds the value at
// (x_i, y_j), nodes ascending from -1 to 1 along each axis.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coolshape/errors.hpp"
#include "coolshape/geometry.hpp"

namespace coolshape {

using Eigen::MatrixXd;

/// N^2 samples in lexicographic order.
using GridField = Eigen::VectorXd;

/// Chebyshev-Gauss-Lobatto points, ascending: x_i = -cos(pi*i/(N-1)).
inline VectorXd chebyshev_nodes(Index N) {
  if (N < 2) throw ArgumentError("chebyshev_nodes: N >= 2 required");
  VectorXd x(N);
  const double n = static_cast<double>(N - 1);
  for (Index i = 0; i < N; ++i)
    x[i] = std::sin(std::numbers::pi * (2.0 * static_cast<double>(i) - n) / (2.0 * n));
  return x;
}

/// First-derivative collocation matrix on the ascending CGL points
/// (barycentric form, diagonal by negative row sum).
inline MatrixXd chebyshev_diff_matrix(Index N) {
  if (N < 2) throw ArgumentError("chebyshev_diff_matrix: N >= 2 required");
  const double n = static_cast<double>(N - 1);
  auto theta = [&](Index i) { return std::numbers::pi * static_cast<double>(i) / n; };
  VectorXd w(N);
  for (Index i = 0; i < N; ++i) w[i] = ((i % 2 == 0) ? 1.0 : -1.0) * ((i == 0 || i == N - 1) ? 0.5 : 1.0);
  MatrixXd D = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i) {
    double diag = 0.0;
    for (Index j = 0; j < N; ++j) {
      if (i == j) continue;
      // x_i - x_j for x = -cos(theta), computed without cancellation
      const double diff = 2.0 * std::sin(0.5 * (theta(i) + theta(j))) * std::sin(0.5 * (theta(i) - theta(j)));
      D(i, j) = (w[j] / w[i]) / diff;
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

/// Second-derivative collocation matrix on the ascending CGL points; rows sum
/// to zero so constants are annihilated to round-off.
inline MatrixXd chebyshev_second_diff_matrix(Index N) {
  const MatrixXd D = chebyshev_diff_matrix(N);
  const VectorXd x = chebyshev_nodes(N);
  MatrixXd D2 = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i) {
    double diag = 0.0;
    for (Index j = 0; j < N; ++j) {
      if (i == j) continue;
      D2(i, j) = 2.0 * D(i, j) * (D(i, i) - 1.0 / (x[i] - x[j]));
      diag -= D2(i, j);
    }
    D2(i, i) = diag;
  }
  return D2;
}

/// Clenshaw-Curtis weights for the CGL points on [-1,1].
inline VectorXd clenshaw_curtis_weights(Index N) {
  if (N < 2) throw ArgumentError("clenshaw_curtis_weights: N >= 2 required");
  const Index n = N - 1;
  VectorXd w = VectorXd::Zero(N);
  const double pi = std::numbers::pi;
  if (n == 1) {
    w.setConstant(1.0);
    return w;
  }
  for (Index i = 0; i <= n; ++i) {
    const double th = pi * static_cast<double>(i) / static_cast<double>(n);
    double v = 1.0;
    if (n % 2 == 0) {
      if (i == 0 || i == n) {
        w[i] = 1.0 / static_cast<double>(n * n - 1);
        continue;
      }
      for (Index k = 1; k < n / 2; ++k) v -= 2.0 * std::cos(2.0 * k * th) / static_cast<double>(4 * k * k - 1);
      v -= std::cos(static_cast<double>(n) * th) / static_cast<double>(n * n - 1);
    } else {
      if (i == 0 || i == n) {
        w[i] = 1.0 / static_cast<double>(n * n);
        continue;
      }
      for (Index k = 1; k <= (n - 1) / 2; ++k) v -= 2.0 * std::cos(2.0 * k * th) / static_cast<double>(4 * k * k - 1);
    }
    w[i] = 2.0 * v / static_cast<double>(n);
  }
  return w;
}

/// Natural cubic spline: matrix mapping nodal values to nodal second derivatives.
inline MatrixXd natural_spline_second_derivatives(const VectorXd& x) {
  const Index N = x.size();
  MatrixXd S = MatrixXd::Zero(N, N);
  if (N < 3) return S;
  const Index m = N - 2;
  MatrixXd A = MatrixXd::Zero(m, m);
  MatrixXd R = MatrixXd::Zero(m, N);
  for (Index k = 1; k <= m; ++k) {
    const double hl = x[k] - x[k - 1], hr = x[k + 1] - x[k];
    const Index r = k - 1;
    A(r, r) = (hl + hr) / 3.0;
    if (r > 0) A(r, r - 1) = hl / 6.0;
    if (r < m - 1) A(r, r + 1) = hr / 6.0;
    R(r, k - 1) = 1.0 / hl;
    R(r, k) = -1.0 / hl - 1.0 / hr;
    R(r, k + 1) = 1.0 / hr;
  }
  S.middleRows(1, m) = A.partialPivLu().solve(R);
  return S;
}

struct ChebGrid {
  Index N = 0;
  VectorXd nodes;            // ascending CGL points
  MatrixXd D1;               // first derivative
  MatrixXd D2;               // second derivative
  VectorXd cc_weights;       // Clenshaw-Curtis weights on [-1,1]
  MatrixXd spline_d2;        // natural-spline second-derivative operator
  std::vector<Index> boundary_index;  // the 4N-4 boundary nodes, ascending flat index

  Index size() const { return N * N; }
  Index index(Index i, Index j) const { return i * N + j; }
  bool on_boundary(Index i, Index j) const { return i == 0 || j == 0 || i == N - 1 || j == N - 1; }
  double x(Index flat) const { return nodes[flat / N]; }
  double y(Index flat) const { return nodes[flat % N]; }

  /// Samples f(x, y) at every grid node.
  template <typename F>
  GridField sample(F&& f) const {
    GridField g(size());
    for (Index i = 0; i < N; ++i)
      for (Index j = 0; j < N; ++j) g[index(i, j)] = f(nodes[i], nodes[j]);
    return g;
  }

  /// Cubic-spline interpolation weights along one axis at coordinate t in [-1,1].
  VectorXd spline_weights(double t) const {
    VectorXd w = VectorXd::Zero(N);
    const auto it = std::upper_bound(nodes.data(), nodes.data() + N, t);
    Index k = static_cast<Index>(it - nodes.data()) - 1;
    k = std::clamp<Index>(k, 0, N - 2);
    const double h = nodes[k + 1] - nodes[k];
    const double a = (nodes[k + 1] - t) / h;
    const double b = 1.0 - a;
    w[k] += a;
    w[k + 1] += b;
    const double h26 = h * h / 6.0;
    w += ((a * a * a - a) * h26) * spline_d2.row(k).transpose();
    w += ((b * b * b - b) * h26) * spline_d2.row(k + 1).transpose();
    return w;
  }
};

/// Tensor CGL grid on [-1,1]^2 with N points per axis (N >= 8).
inline ChebGrid build_grid(Index N) {
  if (N < 8) throw ArgumentError("build_grid: N >= 8 required, got " + std::to_string(N));
  ChebGrid g;
  g.N = N;
  g.nodes = chebyshev_nodes(N);
  g.D1 = chebyshev_diff_matrix(N);
  g.D2 = chebyshev_second_diff_matrix(N);
  g.cc_weights = clenshaw_curtis_weights(N);
  g.spline_d2 = natural_spline_second_derivatives(g.nodes);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j)
      if (g.on_boundary(i, j)) g.boundary_index.push_back(g.index(i, j));
  return g;
}

/// Outward normal of the square at a boundary node; corners use the
/// normalized average of the two face normals.
inline Vector2d boundary_normal(const ChebGrid& g, Index i, Index j) {
  Vector2d n(0.0, 0.0);
  if (i == 0) n.x() = -1.0;
  if (i == g.N - 1) n.x() = 1.0;
  if (j == 0) n.y() = -1.0;
  if (j == g.N - 1) n.y() = 1.0;
  return n.normalized();
}

namespace detail {

// Column-major view with V(j, i) = field[i*N + j].
inline Eigen::Map<const MatrixXd> as_matrix(const ChebGrid& g, const GridField& f) {
  return {f.data(), g.N, g.N};
}

inline void check_field(const ChebGrid& g, const GridField& f, const char* who) {
  if (f.size() != g.size())
    throw ArgumentError(std::string(who) + ": field has " + std::to_string(f.size()) + " entries, expected " +
                        std::to_string(g.size()));
}

}  // namespace detail

/// Spectral partial derivatives (d/dx, d/dy).
inline std::pair<GridField, GridField> grid_gradient(const ChebGrid& g, const GridField& f) {
  detail::check_field(g, f, "grid_gradient");
  const auto V = detail::as_matrix(g, f);
  MatrixXd dx = V * g.D1.transpose();
  MatrixXd dy = g.D1 * V;
  return {Eigen::Map<GridField>(dx.data(), g.size()), Eigen::Map<GridField>(dy.data(), g.size())};
}

/// Matrix-free application of the Neumann Laplacian: the collocation Laplacian
/// at interior nodes, the outward normal derivative at boundary nodes.
inline GridField apply_neumann_laplacian(const ChebGrid& g, const GridField& f) {
  detail::check_field(g, f, "apply_neumann_laplacian");
  const auto V = detail::as_matrix(g, f);
  const MatrixXd lap = V * g.D2.transpose() + g.D2 * V;
  const MatrixXd dx = V * g.D1.transpose();
  const MatrixXd dy = g.D1 * V;
  GridField out(g.size());
  for (Index i = 0; i < g.N; ++i)
    for (Index j = 0; j < g.N; ++j) {
      const Index k = g.index(i, j);
      if (!g.on_boundary(i, j)) {
        out[k] = lap(j, i);
      } else {
        const Vector2d n = boundary_normal(g, i, j);
        out[k] = n.x() * dx(j, i) + n.y() * dy(j, i);
      }
    }
  return out;
}

namespace detail {

// Writes the Neumann Laplacian into A, scaling interior rows by interior_sign.
inline void fill_neumann_laplacian(const ChebGrid& g, MatrixXd& A, double interior_sign) {
  const Index N = g.N;
  A.setZero(g.size(), g.size());
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) {
      const Index row = g.index(i, j);
      if (!g.on_boundary(i, j)) {
        for (Index k = 0; k < N; ++k) {
          A(row, g.index(k, j)) += interior_sign * g.D2(i, k);
          A(row, g.index(i, k)) += interior_sign * g.D2(j, k);
        }
      } else {
        const Vector2d n = boundary_normal(g, i, j);
        for (Index k = 0; k < N; ++k) {
          if (n.x() != 0.0) A(row, g.index(k, j)) += n.x() * g.D1(i, k);
          if (n.y() != 0.0) A(row, g.index(i, k)) += n.y() * g.D1(j, k);
        }
      }
    }
}

}  // namespace detail

/// Dense N^2 x N^2 Neumann Laplacian (interior: Laplacian; boundary: outward
/// normal derivative).
inline MatrixXd neumann_laplacian(const ChebGrid& g) {
  MatrixXd A;
  detail::fill_neumann_laplacian(g, A, 1.0);
  return A;
}

/// K x N^2 tensor-spline interpolation matrix onto points strictly inside the domain.
inline MatrixXd interp_matrix(const ChebGrid& g, std::span<const Vector2d> targets) {
  MatrixXd P(static_cast<Index>(targets.size()), g.size());
  for (Index r = 0; r < P.rows(); ++r) {
    const Vector2d& p = targets[static_cast<std::size_t>(r)];
    if (!(std::abs(p.x()) < 1.0 && std::abs(p.y()) < 1.0))
      throw ArgumentError("interp_matrix: target " + std::to_string(r) + " is not strictly inside the domain");
    const VectorXd wx = g.spline_weights(p.x());
    const VectorXd wy = g.spline_weights(p.y());
    for (Index i = 0; i < g.N; ++i) P.row(r).segment(i * g.N, g.N) = wx[i] * wy.transpose();
  }
  return P;
}

/// Spline interpolant of a grid field at arbitrary points of the closed domain.
inline VectorXd interpolate(const ChebGrid& g, const GridField& f, std::span<const Vector2d> points) {
  detail::check_field(g, f, "interpolate");
  const auto V = detail::as_matrix(g, f);
  VectorXd out(static_cast<Index>(points.size()));
  for (Index r = 0; r < out.size(); ++r) {
    const Vector2d& p = points[static_cast<std::size_t>(r)];
    out[r] = g.spline_weights(p.y()).dot(V * g.spline_weights(p.x()));
  }
  return out;
}

/// Barycentric Chebyshev interpolation weights at t in [-1,1]: the row that
/// maps nodal values to the polynomial interpolant at t.
inline VectorXd barycentric_weights(const ChebGrid& g, double t) {
  const Index N = g.N;
  VectorXd w(N);
  for (Index i = 0; i < N; ++i) {
    const double diff = t - g.nodes[i];
    if (diff == 0.0) {
      w.setZero();
      w[i] = 1.0;
      return w;
    }
    const double c = ((i % 2 == 0) ? 1.0 : -1.0) * ((i == 0 || i == N - 1) ? 0.5 : 1.0);
    w[i] = c / diff;
  }
  return w / w.sum();
}

/// Polynomial (spectral) interpolant of a grid field at arbitrary points of the domain.
inline VectorXd interpolate_spectral(const ChebGrid& g, const GridField& f, std::span<const Vector2d> points) {
  detail::check_field(g, f, "interpolate_spectral");
  const auto V = detail::as_matrix(g, f);
  VectorXd out(static_cast<Index>(points.size()));
  for (Index r = 0; r < out.size(); ++r) {
    const Vector2d& p = points[static_cast<std::size_t>(r)];
    out[r] = barycentric_weights(g, p.y()).dot(V * barycentric_weights(g, p.x()));
  }
  return out;
}

/// Clenshaw-Curtis tensor quadrature (N points per axis) over an axis-aligned
/// region of the spline interpolant of the field. Over the full domain this is
/// the nodal Clenshaw-Curtis rule.
inline double integrate_domain(const ChebGrid& g, const GridField& f, const Rect& region) {
  detail::check_field(g, f, "integrate_domain");
  if (!region.inside(Rect::domain())) throw ArgumentError("integrate_domain: region exceeds the domain");
  const Index N = g.N;
  const double hx = 0.5 * (region.xmax - region.xmin), cx = 0.5 * (region.xmax + region.xmin);
  const double hy = 0.5 * (region.ymax - region.ymin), cy = 0.5 * (region.ymax + region.ymin);
  MatrixXd WX(N, N), WY(N, N);
  for (Index a = 0; a < N; ++a) {
    WX.row(a) = g.spline_weights(cx + hx * g.nodes[a]).transpose();
    WY.row(a) = g.spline_weights(cy + hy * g.nodes[a]).transpose();
  }
  const VectorXd wx = WX.transpose() * (hx * g.cc_weights);
  const VectorXd wy = WY.transpose() * (hy * g.cc_weights);
  return wy.dot(detail::as_matrix(g, f) * wx);
}

/// 1 at nodes strictly inside the region, 0 elsewhere.
inline GridField region_mask(const ChebGrid& g, const Rect& region) {
  return g.sample([&](double x, double y) { return region.contains_strictly(x, y) ? 1.0 : 0.0; });
}

}  // namespace coolshape
