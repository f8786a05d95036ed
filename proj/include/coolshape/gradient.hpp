#pragma once

// Shape gradients on a closed contour: the L2 gradient from direct and adjoint
// traces, its Sobolev (H1) smoothing, and the arc-length-dependent reference
// temperature formulas for boundary-attached contours.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "coolshape/errors.hpp"
#include "coolshape/fourier.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/solver.hpp"

namespace coolshape {

struct ShapeGradient {
  ContourFunction l2;
  ContourFunction h1;
  double smoothing_scale = 0.0;
};

namespace detail {

inline void check_trace(const Contour& c, const ContourFunction& f, const char* who, const char* what) {
  const double tol = 1e-12 * std::max(1.0, c.length());
  if (f.size() != c.size() || std::abs(f.length - c.length()) > tol)
    throw ArgumentError(std::string(who) + ": " + what + " was not computed on this contour");
}

inline void check_same_nodes(Index a, Index b, const char* who) {
  if (a != b)
    throw ArgumentError(std::string(who) + ": sample counts differ (" + std::to_string(a) + " vs " +
                        std::to_string(b) + ")");
}

}  // namespace detail

/// L2 shape gradient of the tracking cost, plus the length penalty when alpha > 0.
inline ContourFunction assemble_l2_gradient(const CoupledSolution& direct, const CoupledSolution& adjoint,
                                            const Contour& contour, const PhysicsConfig& cfg, double alpha = 0.0,
                                            double L0 = 0.0) {
  const char* who = "assemble_l2_gradient";
  detail::check_trace(contour, direct.u_on_C, who, "direct trace");
  detail::check_trace(contour, direct.dn_u2, who, "direct flux");
  detail::check_trace(contour, adjoint.u_on_C, who, "adjoint trace");
  detail::check_trace(contour, adjoint.dn_u1, who, "adjoint flux");
  if (alpha < 0.0) throw ArgumentError("assemble_l2_gradient: alpha must be >= 0");
  const VectorXd kappa = curvature(contour).values;
  const auto u1 = direct.u_on_C.values.array();
  const auto us = adjoint.u_on_C.values.array();
  const double gamma = cfg.gamma;
  VectorXd g = (-gamma * (u1 - cfg.u0) * (kappa.array() * us + adjoint.dn_u1.values.array()) -
                gamma * us * direct.dn_u2.values.array())
                   .matrix();
  if (alpha > 0.0) g += alpha * (contour.length() - L0) * kappa;
  return {std::move(g), contour.length()};
}

/// Solves (1 - ell^2 d^2/ds^2) g = l2 with periodic conditions on a contour of length L.
inline ContourFunction smooth_sobolev(const ContourFunction& l2, double ell, double L) {
  if (ell < 0.0) throw ArgumentError("smooth_sobolev: ell must be >= 0");
  if (!(L > 0.0)) throw ArgumentError("smooth_sobolev: L must be positive");
  if (ell == 0.0) return {l2.values, L};
  const Index M = l2.size();
  Eigen::VectorXcd c = fourier::forward(l2.values);
  const double w = 2.0 * std::numbers::pi / L;
  for (Index k = 0; k < M; ++k) {
    const double m = fourier::wavenumber(k, M) * w;
    c[k] /= 1.0 + ell * ell * m * m;
  }
  return {fourier::inverse(c), L};
}

/// Max-norm residual of (1 - ell^2 d^2/ds^2) h1 - l2 using spectral differentiation.
inline double helmholtz_residual(const ContourFunction& h1, const ContourFunction& l2, double ell, double L) {
  detail::check_same_nodes(h1.size(), l2.size(), "helmholtz_residual");
  const double scale = 2.0 * std::numbers::pi / L;
  const VectorXd d2 = fourier::derivative(h1.values, 2) * (scale * scale);
  return (h1.values - ell * ell * d2 - l2.values).cwiseAbs().maxCoeff();
}

/// L2 inner product of two contour functions, uniform trapezoid rule in s.
inline double inner_l2(const ContourFunction& a, const ContourFunction& b, double L) {
  detail::check_same_nodes(a.size(), b.size(), "inner_l2");
  return L / static_cast<double>(a.size()) * a.values.dot(b.values);
}

/// H1 inner product: int a b + ell^2 a' b' ds, derivatives spectral.
inline double inner_h1(const ContourFunction& a, const ContourFunction& b, double ell, double L) {
  detail::check_same_nodes(a.size(), b.size(), "inner_h1");
  const double scale = 2.0 * std::numbers::pi / L;
  const VectorXd da = fourier::derivative(a.values, 1) * scale;
  const VectorXd db = fourier::derivative(b.values, 1) * scale;
  return L / static_cast<double>(a.size()) * (a.values.dot(b.values) + ell * ell * da.dot(db));
}

inline ShapeGradient make_shape_gradient(ContourFunction l2, double ell) {
  const double L = l2.length;
  ContourFunction h1 = smooth_sobolev(l2, ell, L);
  return {std::move(l2), std::move(h1), ell};
}

/// Linear reference temperature Ta + (Tb - Ta) s / L.
inline ContourFunction eval_u0_profile(double Ta, double Tb, double L, const VectorXd& s) {
  if (!(L > 0.0)) throw ArgumentError("eval_u0_profile: L must be positive");
  for (Index i = 0; i < s.size(); ++i)
    if (s[i] < 0.0 || s[i] > L) throw ArgumentError("eval_u0_profile: s outside [0, L]");
  return {(Ta + (Tb - Ta) / L * s.array()).matrix(), L};
}

namespace detail {

// H(x + 0*side): side = 0 gives H(0) = 1/2, otherwise the one-sided limit.
inline double heaviside(double x, int side = 0) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  return side > 0 ? 1.0 : (side < 0 ? 0.0 : 0.5);
}

// Trapezoid rule on [0, L] over s_0 .. s_M (s_M = L carries node 0 by
// periodicity). f(l, s', side) gets side = +1 at s' = 0+, -1 at s' = L-.
template <typename F>
double closed_trapezoid(Index M, double h, F&& f) {
  double acc = 0.5 * (f(0, 0.0, 1) + f(0, h * static_cast<double>(M), -1));
  for (Index l = 1; l < M; ++l) acc += f(l, h * static_cast<double>(l), 0);
  return h * acc;
}

}  // namespace detail

/// (Tb-Ta)/L * int_0^L [H(s - s') - s/L] kappa(s') zeta(s') ds'.
inline ContourFunction shape_derivative_u0(double Ta, double Tb, double L, const ContourFunction& kappa,
                                           const ContourFunction& zeta) {
  detail::check_same_nodes(kappa.size(), zeta.size(), "shape_derivative_u0");
  if (!(L > 0.0)) throw ArgumentError("shape_derivative_u0: L must be positive");
  const Index M = kappa.size();
  const double h = L / static_cast<double>(M);
  const VectorXd kz = kappa.values.cwiseProduct(zeta.values);
  VectorXd out(M);
  for (Index i = 0; i < M; ++i) {
    const double s = h * static_cast<double>(i);
    out[i] = (Tb - Ta) / L * detail::closed_trapezoid(M, h, [&](Index l, double sp, int side) {
               return (detail::heaviside(s - sp, -side) - s / L) * kz[l];
             });
  }
  return {std::move(out), L};
}

/// -gamma kappa(s) (Tb-Ta)/L * int_0^L [H(s' - s) - s'/L] u*(s') ds'.
inline ContourFunction grad_u0_term(const ContourFunction& u_star, const ContourFunction& kappa, double Ta,
                                    double Tb, double L, double gamma = 1.0) {
  detail::check_same_nodes(u_star.size(), kappa.size(), "grad_u0_term");
  if (!(L > 0.0)) throw ArgumentError("grad_u0_term: L must be positive");
  const Index M = u_star.size();
  const double h = L / static_cast<double>(M);
  VectorXd out(M);
  for (Index i = 0; i < M; ++i) {
    const double s = h * static_cast<double>(i);
    const double inner = detail::closed_trapezoid(M, h, [&](Index l, double sp, int side) {
      return (detail::heaviside(sp - s, side) - sp / L) * u_star[l];
    });
    out[i] = -gamma * kappa[i] * (Tb - Ta) / L * inner;
  }
  return {std::move(out), L};
}

}  // namespace coolshape
