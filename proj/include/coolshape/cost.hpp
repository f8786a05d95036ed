#pragma once

// Domain integrals of fields that are smooth on either side of the contour
// but kinked across it, such as (u - ubar)^2.
//
// Iterated Gauss-Legendre quadrature: every horizontal line is split where it
// crosses the contour, so each piece of the inner integral is smooth; the
// outer integral is split where the contour has a horizontal tangent and uses
// a cosine map so the (y - y*)^{3/2} behaviour at those breakpoints becomes
// smooth in the mapped variable.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <Eigen/Dense>

#include "coolshape/errors.hpp"
#include "coolshape/fourier.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/potential.hpp"
#include "coolshape/solver.hpp"
#include "coolshape/spectral.hpp"

namespace coolshape {

/// Quadrature nodes grouped by horizontal line (points of a line are contiguous).
struct LineQuadrature {
  std::vector<Vector2d> points;
  VectorXd weights;

  double apply(const VectorXd& values) const {
    if (values.size() != weights.size()) throw ArgumentError("LineQuadrature: value count mismatch");
    return weights.dot(values);
  }
};

namespace detail {

constexpr int kLineGaussPoints = 24;
constexpr double kMaxPanel = 0.25;

inline const std::vector<std::pair<double, double>>& unit_gauss_rule() {
  static const std::vector<std::pair<double, double>> rule = [] {
    using Gauss = boost::math::quadrature::gauss<double, kLineGaussPoints>;
    std::vector<std::pair<double, double>> r;
    const auto& ab = Gauss::abscissa();
    const auto& wt = Gauss::weights();
    for (std::size_t k = 0; k < ab.size(); ++k) {
      r.emplace_back(0.5 * (1.0 - ab[k]), 0.5 * wt[k]);
      if (ab[k] != 0.0) r.emplace_back(0.5 * (1.0 + ab[k]), 0.5 * wt[k]);
    }
    std::sort(r.begin(), r.end());
    return r;
  }();
  return rule;
}

// Roots in [0, 2pi) of p(t) = value for a trigonometric interpolant, bracketed
// on the uniform samples `fine` of p and polished by safeguarded Newton.
inline std::vector<double> trig_level_crossings(const fourier::TrigSeries& p, const VectorXd& fine, double value,
                                                int order) {
  std::vector<double> roots;
  const Index samples = fine.size();
  const double dt = 2.0 * std::numbers::pi / static_cast<double>(samples);
  auto f = [&](double t) { return p.eval(t, order) - value; };
  double t0 = 0.0, f0 = fine[0] - value;
  for (Index k = 1; k <= samples; ++k) {
    const double t1 = dt * static_cast<double>(k);
    const double f1 = fine[k % samples] - value;
    if (f0 == 0.0) {
      roots.push_back(t0);
    } else if (f0 * f1 < 0.0) {
      double a = t0, b = t1, fa = f(a);
      double t = a - fa * (b - a) / (f1 - f0);
      if (!(t > a && t < b)) t = 0.5 * (a + b);
      for (int it = 0; it < 60; ++it) {
        const double ft = f(t);
        if (ft == 0.0) break;
        if ((ft < 0.0) == (fa < 0.0)) {
          a = t;
          fa = ft;
        } else {
          b = t;
        }
        const double d = p.eval(t, order + 1);
        double next = (d != 0.0) ? t - ft / d : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - t) < 1e-15) {
          t = next;
          break;
        }
        t = next;
      }
      roots.push_back(t);
    }
    t0 = t1;
    f0 = f1;
  }
  return roots;
}

// Breakpoints [lo, hi] plus interior cuts, split further into panels no longer than kMaxPanel.
inline std::vector<double> panels(std::vector<double> cuts, double lo, double hi) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (c < lo || c > hi) continue;
    if (!out.empty() && c - out.back() < 1e-14) continue;
    out.push_back(c);
  }
  std::vector<double> fine;
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((out[i + 1] - out[i]) / kMaxPanel)));
    for (int k = 0; k < pieces; ++k) fine.push_back(out[i] + (out[i + 1] - out[i]) * k / pieces);
  }
  fine.push_back(out.back());
  return fine;
}

}  // namespace detail

/// Quadrature over an axis-aligned region for integrands that are smooth on
/// each side of the contour.
inline LineQuadrature build_line_quadrature(const Contour& c, const Rect& region) {
  if (!(region.xmax > region.xmin && region.ymax > region.ymin)) throw ArgumentError("line quadrature: empty region");
  const fourier::TrigSeries fx(c.x()), fy(c.y());
  const Index samples = 8 * c.size();
  const VectorXd yfine = fourier::upsample(c.y(), samples);
  const VectorXd dyfine = fourier::derivative(yfine, 1);
  const auto& rule = detail::unit_gauss_rule();

  // outer breakpoints: horizontal tangents of the contour
  std::vector<double> ycuts;
  for (double t : detail::trig_level_crossings(fy, dyfine, 0.0, 1)) ycuts.push_back(fy.eval(t));
  const std::vector<double> ypan = detail::panels(ycuts, region.ymin, region.ymax);

  std::vector<Vector2d> pts;
  std::vector<double> w;
  for (std::size_t p = 0; p + 1 < ypan.size(); ++p) {
    const double a = ypan[p], b = ypan[p + 1];
    for (const auto& [tau, wt] : rule) {
      // y = a + (b - a)(1 - cos(pi tau)) / 2
      const double y = a + 0.5 * (b - a) * (1.0 - std::cos(std::numbers::pi * tau));
      const double wy = wt * 0.5 * (b - a) * std::numbers::pi * std::sin(std::numbers::pi * tau);
      std::vector<double> xcuts;
      for (double t : detail::trig_level_crossings(fy, yfine, y, 0)) xcuts.push_back(fx.eval(t));
      const std::vector<double> xpan = detail::panels(xcuts, region.xmin, region.xmax);
      for (std::size_t q = 0; q + 1 < xpan.size(); ++q) {
        const double xa = xpan[q], xb = xpan[q + 1];
        for (const auto& [s, ws] : rule) {
          pts.emplace_back(xa + (xb - xa) * s, y);
          w.push_back(wy * ws * (xb - xa));
        }
      }
    }
  }
  LineQuadrature out;
  out.points = std::move(pts);
  out.weights = Eigen::Map<const VectorXd>(w.data(), static_cast<Index>(w.size()));
  return out;
}

/// Evaluates the temperature of a coupled solution anywhere in the domain:
/// spectral interpolation of u_p plus the single-layer potential, and a
/// one-sided second-order expansion from the contour traces for points
/// closer than a small fraction of the node spacing.
class TemperatureField {
 public:
  TemperatureField(const PhysicsConfig& cfg, const ChebGrid& g, const Contour& c, const CoupledSolution& s)
      : cfg_(cfg), g_(g), c_(c), s_(s), fx_(c.x()), fy_(c.y()), uc_(s.u_on_C.values), d1_(s.dn_u1.values),
        d2_(s.dn_u2.values), kappa_(curvature(c).values) {}

  VectorXd operator()(std::span<const Vector2d> points) const {
    const Index n = static_cast<Index>(points.size());
    VectorXd out(n);
    const auto V = Eigen::Map<const MatrixXd>(s_.up.data(), g_.N, g_.N);
    const double near = 0.05 * c_.arc_step();
    std::vector<Vector2d> far_pts;
    std::vector<Index> far_idx;
    VectorXd row;
    double row_y = std::numeric_limits<double>::quiet_NaN();
    for (Index r = 0; r < n; ++r) {
      const Vector2d& p = points[static_cast<std::size_t>(r)];
      double d = std::numeric_limits<double>::infinity();
      Index at = 0;
      for (Index l = 0; l < c_.size(); ++l) {
        const double dl = detail::segment_distance(p, c_.point(l), c_.point((l + 1) % c_.size()));
        if (dl < d) {
          d = dl;
          at = l;
        }
      }
      if (d < near) {
        out[r] = expansion(p, at);
        continue;
      }
      if (p.y() != row_y) {
        row_y = p.y();
        row = V.transpose() * barycentric_weights(g_, p.y());
      }
      out[r] = row.dot(barycentric_weights(g_, p.x()));
      far_pts.push_back(p);
      far_idx.push_back(r);
    }
    if (!far_pts.empty()) {
      const VectorXd uh = eval_single_layer(c_, s_.mu.values, far_pts);
      for (std::size_t k = 0; k < far_idx.size(); ++k) out[far_idx[k]] += uh[static_cast<Index>(k)];
    }
    return out;
  }

 private:
  double expansion(const Vector2d& p, Index at) const {
    // closest point on the contour
    const double dtn = 2.0 * std::numbers::pi / static_cast<double>(c_.size());
    double t = c_.parameter(at) + 0.5 * dtn;
    for (int it = 0; it < 30; ++it) {
      const Vector2d cp(fx_.eval(t), fy_.eval(t)), v1(fx_.eval(t, 1), fy_.eval(t, 1)), v2(fx_.eval(t, 2), fy_.eval(t, 2));
      const Vector2d e = p - cp;
      const double H = v1.squaredNorm() - e.dot(v2);
      const double step = std::clamp(e.dot(v1) / (H > 0.0 ? H : v1.squaredNorm()), -dtn, dtn);
      t += step;
      if (std::abs(step) < 1e-15) break;
    }
    const Vector2d cp(fx_.eval(t), fy_.eval(t)), v1(fx_.eval(t, 1), fy_.eval(t, 1)), v2(fx_.eval(t, 2), fy_.eval(t, 2));
    const double speed = v1.norm();
    const Vector2d n(v1.y() / speed, -v1.x() / speed);
    const double r = (p - cp).dot(n);
    const double kappa = (v1.x() * v2.y() - v1.y() * v2.x()) / (speed * speed * speed);
    const double dn = (r < 0.0) ? d1_.eval(t) : d2_.eval(t);
    // second arc-length derivative of the trace (speed is constant on an equispaced contour)
    const double uss = uc_.eval(t, 2) / (speed * speed);
    const double q = cfg_.q.function ? cfg_.q.function(cp.x(), cp.y())
                                     : interpolate_spectral(g_, cfg_.q.sample(g_), std::span<const Vector2d>(&cp, 1))[0];
    const double dnn = -q / cfg_.k - kappa * dn - uss;
    return uc_.eval(t) + r * dn + 0.5 * r * r * dnn;
  }

  const PhysicsConfig& cfg_;
  const ChebGrid& g_;
  const Contour& c_;
  const CoupledSolution& s_;
  fourier::TrigSeries fx_, fy_, uc_, d1_, d2_;
  VectorXd kappa_;
};

/// 1/2 int_region (u - ubar)^2 with the line quadrature.
inline double tracking_integral(const PhysicsConfig& cfg, const ChebGrid& g, const Contour& c,
                                const CoupledSolution& s) {
  const LineQuadrature lq = build_line_quadrature(c, cfg.region_A);
  const TemperatureField u(cfg, g, c, s);
  const VectorXd e = u(lq.points) - cfg.target.at(g, lq.points);
  return 0.5 * lq.apply(e.cwiseProduct(e));
}

}  // namespace coolshape
