#pragma once

// Cost functional, finite-difference gradient check and the conjugate-gradient
// shape descent loop.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coolshape/cost.hpp"
#include "coolshape/errors.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/gradient.hpp"
#include "coolshape/solver.hpp"

namespace coolshape {

struct OptimConfig {
  double alpha = 0.0;   // length penalty weight
  double L0 = 1.0;      // target length, used iff alpha > 0
  double ell = 0.1;     // Sobolev smoothing scale
  double eps_J = 1e-3;
  double eps_tau = 1e-8;
  int max_iters = 100;
  Index N = 50;
  Index M = 100;
  double margin = 0.05;         // minimum distance from the domain boundary
  double max_displacement = 0.1;

  void validate() const {
    if (alpha < 0.0) throw ArgumentError("OptimConfig: alpha must be >= 0");
    if (alpha > 0.0 && !(L0 > 0.0)) throw ArgumentError("OptimConfig: L0 must be positive when alpha > 0");
    if (ell < 0.0) throw ArgumentError("OptimConfig: ell must be >= 0");
    if (!(eps_J > 0.0) || !(eps_tau > 0.0)) throw ArgumentError("OptimConfig: eps_J and eps_tau must be positive");
    if (max_iters < 1) throw ArgumentError("OptimConfig: max_iters must be >= 1");
    if (N < 8) throw ArgumentError("OptimConfig: N must be >= 8");
    if (M < 8 || M % 2 != 0) throw ArgumentError("OptimConfig: M must be even and >= 8");
    if (!(margin >= 0.0 && margin < 1.0)) throw ArgumentError("OptimConfig: margin must lie in [0, 1)");
    if (!(max_displacement > 0.0)) throw ArgumentError("OptimConfig: max_displacement must be positive");
  }
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double length = 0.0;
  double tau = 0.0;
  double grad_l2_norm = 0.0;
  double grad_h1_norm = 0.0;
  bool restart = false;  // steepest-descent direction used
  std::shared_ptr<const Contour> contour;  // iterate at which J was evaluated
};

struct OptimizationTrace {
  std::vector<IterationRecord> records;
};

enum class StopReason { step_small, cost_stalled, max_iters };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::step_small: return "step below eps_tau";
    case StopReason::cost_stalled: return "relative change of J below eps_J";
    case StopReason::max_iters: return "max_iters reached";
  }
  return "?";
}

struct OptimizationResult {
  Contour contour;
  OptimizationTrace trace;
  StopReason reason = StopReason::max_iters;
  bool converged() const { return reason != StopReason::max_iters; }
};

/// Raised when a solve fails mid-run; carries everything recorded so far.
class OptimizationError : public std::runtime_error {
 public:
  OptimizationError(const std::string& what, OptimizationTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const OptimizationTrace& trace() const noexcept { return trace_; }

 private:
  OptimizationTrace trace_;
};

/// J and the direct solution it was computed from.
struct CostEvaluation {
  double J = 0.0;
  double tracking = 0.0;
  double penalty = 0.0;
  CoupledSolution direct;
};

inline CostEvaluation evaluate_cost(const PhysicsConfig& physics, const CoupledSystem& sys, double alpha,
                                    double L0) {
  CostEvaluation out;
  out.direct = solve_direct(physics, sys);
  const ChebGrid& g = sys.grid();
  out.tracking = tracking_integral(physics, g, sys.contour(), out.direct);
  if (alpha > 0.0) {
    const double dL = sys.contour().length() - L0;
    out.penalty = 0.5 * alpha * dL * dL;
  }
  out.J = out.tracking + out.penalty;
  return out;
}

/// 1/2 int_A (u - ubar)^2 plus the length penalty when alpha > 0.
inline double evaluate_J(const PhysicsConfig& physics, const Contour& contour, Index N, double alpha = 0.0,
                         double L0 = 0.0) {
  if (!contains_in_domain(contour, 0.0)) throw GeometryError("evaluate_J: contour leaves the domain");
  const CoupledSystem sys(physics.k, physics.gamma, contour, GridSolver::shared(N));
  return evaluate_cost(physics, sys, alpha, L0).J;
}

inline double evaluate_J(const OptimConfig& cfg, const PhysicsConfig& physics, const Contour& contour) {
  return evaluate_J(physics, contour, cfg.N, cfg.alpha, cfg.L0);
}

/// L2 gradient at a contour together with J and both solutions.
struct GradientEvaluation {
  CostEvaluation cost;
  CoupledSolution adjoint;
  ShapeGradient gradient;
};

inline GradientEvaluation evaluate_gradient(const PhysicsConfig& physics, const Contour& contour, Index N,
                                            double alpha, double L0, double ell) {
  const CoupledSystem sys(physics.k, physics.gamma, contour, GridSolver::shared(N));
  GradientEvaluation out;
  out.cost = evaluate_cost(physics, sys, alpha, L0);
  out.adjoint = solve_adjoint(physics, sys, out.cost.direct);
  out.gradient = make_shape_gradient(assemble_l2_gradient(out.cost.direct, out.adjoint, contour, physics, alpha, L0),
                                     ell);
  return out;
}

/// Moves node l by amount[l] along the normal and remeshes to equal arc length.
inline Contour perturb_contour(const Contour& c, const VectorXd& amount) {
  return resample_equal_arclength(displace_normal(c, amount), c.size());
}

/// J and kappa are NaN when the perturbed contour cannot be resolved on the node count.
struct KappaRow {
  double epsilon = 0.0;
  double J = 0.0;
  double kappa = 0.0;
};

struct KappaResult {
  double J0 = 0.0;
  double directional = 0.0;  // <grad_L2 J, zeta>
  std::vector<KappaRow> rows;

  double best_error() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) best = std::min(best, std::abs(r.kappa - 1.0));
    return best;
  }
};

/// kappa(eps) = [J(C(eps)) - J(C)] / (eps <grad J, zeta>) with C(eps) displaced by eps zeta n.
inline KappaResult kappa_test(const PhysicsConfig& physics, const Contour& contour, const ContourFunction& zeta,
                              const std::vector<double>& epsilons, Index N, double alpha = 0.0, double L0 = 0.0) {
  if (zeta.size() != contour.size()) throw ArgumentError("kappa_test: zeta has the wrong number of samples");
  if (zeta.values.cwiseAbs().maxCoeff() == 0.0) throw ArgumentError("kappa_test: zeta must not vanish identically");
  if (epsilons.empty()) throw ArgumentError("kappa_test: no epsilons given");
  const GradientEvaluation ev = evaluate_gradient(physics, contour, N, alpha, L0, 0.0);
  KappaResult out;
  out.J0 = ev.cost.J;
  out.directional = inner_l2(ev.gradient.l2, zeta, contour.length());
  if (out.directional == 0.0) throw NumericalError("kappa_test: gradient is orthogonal to zeta");
  for (double eps : epsilons) {
    Contour ce = contour;
    try {
      ce = perturb_contour(contour, eps * zeta.values);
      if (!contains_in_domain(ce, 1e-10)) throw GeometryError("perturbed contour leaves the domain");
    } catch (const GeometryError& e) {
      std::ostringstream os;
      os << "kappa_test: epsilon = " << eps << ": " << e.what();
      throw GeometryError(os.str());
    }
    // too much displacement for M nodes: no kappa at this epsilon
    if (!ce.is_equispaced(kRemeshTol)) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.rows.push_back({eps, nan, nan});
      continue;
    }
    const double J = evaluate_J(physics, ce, N, alpha, L0);
    out.rows.push_back({eps, J, (J - out.J0) / (eps * out.directional)});
  }
  return out;
}

/// Default epsilon ladder 10^-1 ... 10^-10.
inline std::vector<double> default_epsilons() {
  std::vector<double> e;
  for (int p = 1; p <= 10; ++p) e.push_back(std::pow(10.0, -p));
  return e;
}

struct LineSearchResult {
  double tau = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Brent minimization (golden section with parabolic steps) of phi on [0, tau_max].
/// phi0 = phi(0) is supplied by the caller. Returns tau = 0 when nothing in the
/// bracket improves on phi0.
inline LineSearchResult brent_line_search(const std::function<double(double)>& phi, double tau_max, double phi0,
                                          double rel_tol = 1e-4, int max_evals = 50) {
  if (!(tau_max > 0.0)) throw ArgumentError("brent_line_search: tau_max must be positive");
  const double c = 0.5 * (3.0 - std::sqrt(5.0));
  const double abs_tol = 1e-10 * tau_max;
  double a = 0.0, b = tau_max;
  double v = a + c * (b - a), w = v, x = v;
  double e = 0.0, d = 0.0;
  int evals = 0;
  auto eval = [&](double t) {
    ++evals;
    const double f = phi(t);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };
  double fx = eval(x);
  // inadmissible trials lie at the far end of the bracket: pull it in
  while (!std::isfinite(fx) && evals < max_evals) {
    b = x;
    x = a + c * (b - a);
    fx = eval(x);
  }
  v = w = x;
  double fv = fx, fw = fx;
  while (evals < max_evals) {
    const double m = 0.5 * (a + b);
    const double tol = rel_tol * std::abs(x) + abs_tol;
    const double t2 = 2.0 * tol;
    if (std::abs(x - m) <= t2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    if (std::abs(e) > tol) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      r = e;
      e = d;
    }
    if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
      d = p / q;
      const double u = x + d;
      if (u - a < t2 || b - u < t2) d = (x < m) ? tol : -tol;
    } else {
      e = (x < m) ? b - x : a - x;
      d = c * e;
    }
    const double u = (std::abs(d) >= tol) ? x + d : (d > 0.0 ? x + tol : x - tol);
    const double fu = eval(u);
    if (!std::isfinite(fu)) {
      if (u < x) a = u; else b = u;
      continue;
    }
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  // the interior search never lands on the end of the bracket
  if (tau_max - x <= 4.0 * (rel_tol * tau_max + abs_tol) && evals < max_evals + 1) {
    const double fb = eval(tau_max);
    if (fb <= fx) {
      x = tau_max;
      fx = fb;
    }
  }
  if (!(fx < phi0)) return {0.0, phi0, evals};
  return {x, fx, evals};
}

namespace detail {

// The remeshed trial must stay inside the margin and resolvable on M nodes.
inline bool admissible(const Contour& c, const VectorXd& displacement, double margin) {
  try {
    if (!contains_in_domain(displace_normal(c, displacement), margin)) return false;
    const Contour moved = perturb_contour(c, displacement);
    return contains_in_domain(moved, margin) && moved.is_equispaced(kRemeshTol);
  } catch (const GeometryError&) {
    return false;
  }
}

inline void assert_iterate(const Contour& c, double margin, int iter) {
  std::ostringstream os;
  os << "optimize_shape: iterate " << iter;
  if (!contains_in_domain(c, margin)) {
    os << " violates the domain margin " << margin;
    throw GeometryError(os.str());
  }
  if (!c.is_equispaced(kRemeshTol)) {
    os << " is not equispaced (speed deviation " << c.speed_deviation() << ")";
    throw GeometryError(os.str());
  }
}

}  // namespace detail

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Polak-Ribiere conjugate-gradient descent with Sobolev gradients.
inline OptimizationResult optimize_shape(const OptimConfig& cfg, const PhysicsConfig& physics,
                                         const Contour& initial, const IterationCallback& on_iter = {}) {
  cfg.validate();
  physics.validate();
  Contour C = resample_equal_arclength(initial, cfg.M);
  if (!contains_in_domain(C, cfg.margin)) throw GeometryError("optimize_shape: initial contour violates the margin");

  OptimizationTrace trace;
  VectorXd g_prev, d_prev;
  bool force_restart = true;
  bool stagnation_retry = false;

  auto fail = [&](const std::exception& e) -> OptimizationError {
    return OptimizationError(std::string("optimize_shape: ") + e.what(), trace);
  };

  std::optional<GradientEvaluation> ev;
  for (int iter = 0;; ++iter) {
    try {
      ev = evaluate_gradient(physics, C, cfg.N, cfg.alpha, cfg.L0, cfg.ell);
    } catch (const NumericalError& e) {
      throw fail(e);
    } catch (const GeometryError& e) {
      throw fail(e);
    }
    const ShapeGradient& G = ev->gradient;
    const double L = C.length();
    const double hres = helmholtz_residual(G.h1, G.l2, cfg.ell, L);
    if (hres > 1e-9 * std::max(1.0, G.l2.values.cwiseAbs().maxCoeff()))
      throw fail(NumericalError("Sobolev gradient fails the Helmholtz check"));

    IterationRecord rec;
    rec.iter = iter;
    rec.J = ev->cost.J;
    rec.length = L;
    rec.grad_l2_norm = std::sqrt(inner_l2(G.l2, G.l2, L));
    rec.grad_h1_norm = std::sqrt(inner_h1(G.h1, G.h1, cfg.ell, L));
    rec.contour = std::make_shared<const Contour>(C);

    if (iter >= cfg.max_iters) {
      trace.records.push_back(rec);
      if (on_iter) on_iter(rec);
      return {C, trace, StopReason::max_iters};
    }
    if (rec.grad_h1_norm == 0.0) {
      trace.records.push_back(rec);
      if (on_iter) on_iter(rec);
      return {C, trace, StopReason::step_small};
    }

    // conjugate direction
    const VectorXd& g = G.h1.values;
    VectorXd d = g;
    bool restart = force_restart;
    if (!restart) {
      const ContourFunction gp{g_prev, L}, gn{g, L}, diff{g - g_prev, L};
      const double beta = inner_h1(gn, diff, cfg.ell, L) / inner_h1(gp, gp, cfg.ell, L);
      if (beta < 0.0 || !std::isfinite(beta)) {
        restart = true;
      } else {
        d = g + beta * d_prev;
        if (inner_h1({d, L}, gn, cfg.ell, L) <= 0.0) {
          restart = true;
          d = g;
        }
      }
    }
    rec.restart = restart;

    // bracket: bounded displacement, then halve until admissible
    double tau_max = cfg.max_displacement / d.cwiseAbs().maxCoeff();
    int halvings = 0;
    while (!detail::admissible(C, -tau_max * d, cfg.margin) && halvings < 60) {
      tau_max *= 0.5;
      ++halvings;
    }

    auto phi = [&](double tau) -> double {
      try {
        Contour trial = perturb_contour(C, -tau * d);
        if (!contains_in_domain(trial, cfg.margin) || !trial.is_equispaced(kRemeshTol))
          return std::numeric_limits<double>::infinity();
        return evaluate_J(physics, trial, cfg.N, cfg.alpha, cfg.L0);
      } catch (const GeometryError&) {
        return std::numeric_limits<double>::infinity();
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    LineSearchResult ls{};
    try {
      ls = brent_line_search(phi, tau_max, rec.J);
    } catch (const std::exception& e) {
      throw fail(e);
    }
    rec.tau = ls.tau;
    trace.records.push_back(rec);
    if (on_iter) on_iter(rec);

    if (ls.tau == 0.0 || std::abs(ls.tau) < cfg.eps_tau) {
      if (!restart && !stagnation_retry) {
        // one steepest-descent retry before giving up
        stagnation_retry = true;
        force_restart = true;
        continue;
      }
      return {C, trace, StopReason::step_small};
    }
    stagnation_retry = false;
    const double J_new = ls.value;
    g_prev = g;
    d_prev = d;
    force_restart = false;
    C = perturb_contour(C, -ls.tau * d);
    detail::assert_iterate(C, cfg.margin, iter + 1);

    if (std::abs(J_new - rec.J) < cfg.eps_J * std::abs(rec.J)) {
      // record the final iterate
      IterationRecord last;
      last.iter = iter + 1;
      last.J = J_new;
      last.length = C.length();
      last.contour = std::make_shared<const Contour>(C);
      try {
        const GradientEvaluation fin = evaluate_gradient(physics, C, cfg.N, cfg.alpha, cfg.L0, cfg.ell);
        last.J = fin.cost.J;
        last.grad_l2_norm = std::sqrt(inner_l2(fin.gradient.l2, fin.gradient.l2, C.length()));
        last.grad_h1_norm = std::sqrt(inner_h1(fin.gradient.h1, fin.gradient.h1, cfg.ell, C.length()));
      } catch (const std::exception& e) {
        throw fail(e);
      }
      trace.records.push_back(last);
      if (on_iter) on_iter(last);
      return {C, trace, StopReason::cost_stalled};
    }
  }
}

}  // namespace coolshape
