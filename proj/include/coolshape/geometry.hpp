#pragma once

// Closed contours sampled at M nodes of a uniform parameter t in [0, 2*pi).
// All differential quantities are spectral (trigonometric interpolation of the
// coordinate functions).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coolshape/errors.hpp"
#include "coolshape/fourier.hpp"

namespace coolshape {

using Eigen::Index;
using Eigen::Vector2d;
using Eigen::VectorXd;

/// Relative nodal-speed deviation allowed for freshly constructed contours.
inline constexpr double kEquispacedTol = 1e-6;
/// Looser bound for remeshed optimization iterates, whose near-Nyquist
/// content keeps the fixed-point resampler from reaching kEquispacedTol.
inline constexpr double kRemeshTol = 1e-4;

/// Scalar samples at the nodes of a contour.
struct ContourFunction {
  VectorXd values;
  double length = 0.0;  // length of the owning contour

  Index size() const { return values.size(); }
  double operator[](Index i) const { return values[i]; }
};

/// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
struct Rect {
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;

  static Rect domain() { return {}; }
  bool contains_strictly(double x, double y) const {
    return x > xmin && x < xmax && y > ymin && y < ymax;
  }
  bool inside(const Rect& outer) const {
    return xmin >= outer.xmin && xmax <= outer.xmax && ymin >= outer.ymin && ymax <= outer.ymax &&
           xmin < xmax && ymin < ymax;
  }
};

class Contour {
 public:
  enum class Orientation { normalize_ccw, keep };

  /// Builds a contour from node coordinates. Throws ArgumentError for an odd or
  /// too small node count and GeometryError for self-intersection or nodes
  /// outside the open square (-1,1)^2.
  Contour(VectorXd x, VectorXd y, Orientation orientation = Orientation::normalize_ccw)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw ArgumentError("Contour: coordinate arrays differ in length");
    const Index M = x_.size();
    if (M < 8) throw ArgumentError("Contour: at least 8 nodes required, got " + std::to_string(M));
    if (M % 2 != 0) throw ArgumentError("Contour: node count must be even, got " + std::to_string(M));
    for (Index i = 0; i < M; ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
        throw GeometryError("Contour: non-finite node coordinate");
      if (!(std::abs(x_[i]) < 1.0 && std::abs(y_[i]) < 1.0))
        throw GeometryError("Contour: node " + std::to_string(i) +
                            " lies outside the open domain (-1,1)^2");
    }
    if (orientation == Orientation::normalize_ccw && signed_area() < 0.0) reverse_nodes();
    if (self_intersects()) throw GeometryError("Contour: polyline is self-intersecting");
    compute_derivatives();
  }

  Index size() const { return x_.size(); }
  const VectorXd& x() const { return x_; }
  const VectorXd& y() const { return y_; }
  Vector2d point(Index i) const { return {x_[i], y_[i]}; }

  /// Uniform parameter values t_l = 2*pi*l/M.
  double parameter(Index l) const {
    return 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(size());
  }

  /// Contour length, trapezoid rule on the spectral speed (spectrally accurate).
  double length() const { return length_; }
  double arc_step() const { return length_ / static_cast<double>(size()); }

  /// |dx/dt| at the nodes.
  const VectorXd& speed() const { return speed_; }
  const VectorXd& dx() const { return dx_; }
  const VectorXd& dy() const { return dy_; }
  const VectorXd& ddx() const { return ddx_; }
  const VectorXd& ddy() const { return ddy_; }

  /// Shoelace area of the node polygon; positive for counter-clockwise order.
  double signed_area() const {
    const Index M = size();
    double a = 0.0;
    for (Index i = 0; i < M; ++i) {
      const Index j = (i + 1) % M;
      a += x_[i] * y_[j] - x_[j] * y_[i];
    }
    return 0.5 * a;
  }

  /// Relative deviation of the nodal speed from its mean; zero for a contour
  /// sampled uniformly in arc length.
  double speed_deviation() const {
    const double mean = speed_.mean();
    return (speed_.array() - mean).abs().maxCoeff() / mean;
  }

  bool is_equispaced(double tol = kEquispacedTol) const { return speed_deviation() < tol; }

  /// Same nodes in reverse order (node 0 kept first); orientation is not normalized.
  Contour reversed() const {
    Contour c = *this;
    c.reverse_nodes();
    c.compute_derivatives();
    return c;
  }

  /// Arc-length coordinate of each node, s_l = l * L / M (equispaced contours).
  VectorXd arc_coordinates() const {
    return VectorXd::LinSpaced(size(), 0.0, arc_step() * static_cast<double>(size() - 1));
  }

 private:
  void reverse_nodes() {
    const Index M = size();
    VectorXd xr(M), yr(M);
    for (Index i = 0; i < M; ++i) {
      const Index j = (M - i) % M;
      xr[i] = x_[j];
      yr[i] = y_[j];
    }
    x_ = std::move(xr);
    y_ = std::move(yr);
  }

  static double cross(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

  static bool segments_intersect(const Vector2d& p1, const Vector2d& p2, const Vector2d& q1,
                                 const Vector2d& q2) {
    const double d1 = cross(q2 - q1, p1 - q1);
    const double d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1);
    const double d4 = cross(p2 - p1, q2 - p1);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
      return true;
    auto on_segment = [](const Vector2d& a, const Vector2d& b, const Vector2d& p) {
      return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
             std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
    };
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
  }

  // O(M^2) pairwise test of non-adjacent polyline segments.
  bool self_intersects() const {
    const Index M = size();
    for (Index i = 0; i < M; ++i) {
      const Vector2d a = point(i), b = point((i + 1) % M);
      if ((b - a).squaredNorm() == 0.0) return true;  // repeated node
      for (Index j = i + 2; j < M; ++j) {
        if (i == 0 && j == M - 1) continue;  // adjacent through the seam
        if (segments_intersect(a, b, point(j), point((j + 1) % M))) return true;
      }
    }
    return false;
  }

  void compute_derivatives() {
    dx_ = fourier::derivative(x_, 1);
    dy_ = fourier::derivative(y_, 1);
    ddx_ = fourier::derivative(x_, 2);
    ddy_ = fourier::derivative(y_, 2);
    speed_ = (dx_.array().square() + dy_.array().square()).sqrt();
    length_ = 2.0 * std::numbers::pi * speed_.mean();
  }

  VectorXd x_, y_;
  VectorXd dx_, dy_, ddx_, ddy_, speed_;
  double length_ = 0.0;
};

/// Samples x(t), y(t) at t_l = 2*pi*l/M.
template <typename Fx, typename Fy>
Contour sample_parametric(Fx&& fx, Fy&& fy, Index M) {
  VectorXd x(M), y(M);
  for (Index l = 0; l < M; ++l) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(M);
    x[l] = fx(t);
    y[l] = fy(t);
  }
  return Contour(std::move(x), std::move(y));
}

/// Signed curvature (x'y'' - y'x'')/|x'|^3; positive on a counter-clockwise circle.
inline ContourFunction curvature(const Contour& c) {
  VectorXd k = (c.dx().array() * c.ddy().array() - c.dy().array() * c.ddx().array()) /
               c.speed().array().cube();
  return {std::move(k), c.length()};
}

/// Unit tangents (columns: x, y) in the direction of increasing parameter.
inline Eigen::MatrixX2d tangents(const Contour& c) {
  Eigen::MatrixX2d t(c.size(), 2);
  t.col(0) = c.dx().array() / c.speed().array();
  t.col(1) = c.dy().array() / c.speed().array();
  return t;
}

/// Unit normals: the tangent rotated clockwise, i.e. outward for a
/// counter-clockwise contour (pointing from the enclosed region outward).
inline Eigen::MatrixX2d normals(const Contour& c) {
  Eigen::MatrixX2d n(c.size(), 2);
  n.col(0) = c.dy().array() / c.speed().array();
  n.col(1) = -c.dx().array() / c.speed().array();
  return n;
}

/// True iff every node lies in [-1+margin, 1-margin]^2.
inline bool contains_in_domain(const Contour& c, double margin) {
  const double bound = 1.0 - margin;
  return c.x().cwiseAbs().maxCoeff() <= bound && c.y().cwiseAbs().maxCoeff() <= bound;
}

namespace detail {

struct ArcLengthMap {
  fourier::TrigSeries speed;
  double length;

  explicit ArcLengthMap(const Contour& c)
      : speed(c.speed()), length(2.0 * std::numbers::pi * speed.mean()) {}

  double s(double t) const { return speed.integral(t); }

  // Solves s(t) = target by safeguarded Newton; s is increasing on [lo, hi].
  double invert(double target, double t0, double lo, double hi) const {
    double t = std::clamp(t0, lo, hi);
    for (int it = 0; it < 50; ++it) {
      const double f = s(t) - target;
      if (std::abs(f) <= 1e-12 * length) return t;
      if (f > 0) hi = t; else lo = t;
      const double d = speed.eval(t);
      double next = d > 0 ? t - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * (1.0 + std::abs(t))) return next;
      t = next;
    }
    return t;
  }
};

inline Contour resample_once(const Contour& c, Index M) {
  const fourier::TrigSeries fx(c.x()), fy(c.y());
  const ArcLengthMap map(c);
  const double two_pi = 2.0 * std::numbers::pi;
  VectorXd x(M), y(M);
  double prev = 0.0;
  for (Index l = 0; l < M; ++l) {
    const double target = map.length * static_cast<double>(l) / static_cast<double>(M);
    const double guess = two_pi * static_cast<double>(l) / static_cast<double>(M);
    const double t = l == 0 ? 0.0 : map.invert(target, guess, prev, two_pi);
    prev = t;
    x[l] = fx.eval(t);
    y[l] = fy.eval(t);
  }
  return Contour(std::move(x), std::move(y), Contour::Orientation::keep);
}

}  // namespace detail

/// Re-collocates the trigonometric interpolant of the contour at M points
/// equispaced in arc length. Node 0 is kept fixed. Repeated while the nodal
/// speed deviation keeps dropping (to ~1e-12 on resolved curves).
inline Contour resample_equal_arclength(const Contour& c, Index M) {
  if (M % 2 != 0) throw ArgumentError("resample_equal_arclength: M must be even");
  if (M < 8) throw ArgumentError("resample_equal_arclength: M must be at least 8");
  Contour out = detail::resample_once(c, M);
  for (int pass = 1; pass < 30 && out.speed_deviation() > 1e-12; ++pass) {
    Contour next = detail::resample_once(out, M);
    const bool better = next.speed_deviation() < 0.9 * out.speed_deviation();
    if (next.speed_deviation() < out.speed_deviation()) out = std::move(next);
    if (!better) break;
  }
  return out;
}

/// Displaces node l by amount[l] along the unit normal.
inline Contour displace_normal(const Contour& c, const VectorXd& amount) {
  if (amount.size() != c.size()) throw ArgumentError("displace_normal: size mismatch");
  const Eigen::MatrixX2d n = normals(c);
  VectorXd x = c.x() + amount.cwiseProduct(n.col(0));
  VectorXd y = c.y() + amount.cwiseProduct(n.col(1));
  return Contour(std::move(x), std::move(y), Contour::Orientation::keep);
}

}  // namespace coolshape
