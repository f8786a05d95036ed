#pragma once

// Named contours, source and target fields, and the validation and
// optimization setups used in the examples.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "coolshape/errors.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/optimize.hpp"
#include "coolshape/solver.hpp"

namespace coolshape::presets {

inline const std::vector<std::string>& contour_names() {
  static const std::vector<std::string> names{"C1", "C2", "C3", "C4", "C5", "C6"};
  return names;
}

/// Parametric form (x(t), y(t)), 0 <= t < 2 pi.
struct Parametric {
  std::function<double(double)> x, y;
};

inline Parametric parametric(const std::string& name) {
  using std::cos;
  using std::sin;
  if (name == "C1") return {[](double t) { return 0.4 * cos(t) + 0.1; }, [](double t) { return 0.4 * sin(t) - 0.1; }};
  if (name == "C2") return {[](double t) { return 0.2 * cos(t) + 0.4; }, [](double t) { return 0.2 * sin(t) + 0.4; }};
  if (name == "C3") return {[](double t) { return 0.3 * cos(t); }, [](double t) { return 0.2 * sin(t); }};
  if (name == "C4")
    return {[](double t) { return 0.4 * (1.0 + 0.1 * cos(3.0 * t)) * cos(t) + 0.1; },
            [](double t) { return 0.4 * (1.0 + 0.1 * cos(3.0 * t)) * sin(t) + 0.1; }};
  if (name == "C5")
    return {[](double t) { return 0.4 * (1.0 + 0.1 * cos(4.0 * t)) * cos(t) + 0.1; },
            [](double t) { return 0.4 * (1.0 + 0.1 * cos(4.0 * t)) * sin(t) + 0.1; }};
  if (name == "C6") {
    const double r = 3.0 / (2.0 * std::numbers::pi);
    return {[r](double t) { return r * cos(t) - 0.4; }, [r](double t) { return r * sin(t) + 0.3; }};
  }
  throw ArgumentError("unknown contour preset '" + name + "'");
}

/// Named contour with M nodes equispaced in arc length.
inline Contour contour(const std::string& name, Index M) {
  const Parametric p = parametric(name);
  const Index fine = std::max<Index>(M, 256);
  Contour c = sample_parametric(p.x, p.y, fine + fine % 2);
  return resample_equal_arclength(c, M);
}

inline FieldSpec field(const std::string& name) {
  using std::cos;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  if (name == "q_paper")
    return {[](double x, double y) { return 50.0 - 15.0 * x * x - 15.0 * (y - 0.5) * (y - 0.5); }, std::nullopt, name};
  if (name == "ubar_sin")
    return {[](double x, double y) { return 15.0 + sin(4.0 * x - 1.0) * cos(4.0 * y - 1.0); }, std::nullopt, name};
  if (name == "ubar_cells")
    return {[](double x, double y) { return 15.0 + sin(2.0 * pi * x + pi) * cos(2.0 * pi * y + 0.5 * pi); },
            std::nullopt, name};
  if (name == "zero") return {[](double, double) { return 0.0; }, std::nullopt, name};
  throw ArgumentError("unknown field preset '" + name + "'");
}

/// zeta_j = sin(j t) on the nodes, t the normalized arc-length parameter.
inline ContourFunction perturbation(int j, const Contour& c) {
  if (j < 1) throw ArgumentError("perturbation index must be >= 1");
  VectorXd z(c.size());
  for (Index l = 0; l < c.size(); ++l) z[l] = std::sin(static_cast<double>(j) * c.parameter(l));
  return {std::move(z), c.length()};
}

/// Physics of the validation tests: q and ubar of the gradient checks, A = Omega.
inline PhysicsConfig validation_physics() {
  PhysicsConfig p;
  p.q = field("q_paper");
  p.target = field("ubar_sin");
  p.region_A = Rect::domain();
  return p;
}

struct Resolution {
  Index N, M;
};

/// One contour x perturbation x resolution combination of a gradient check.
struct KappaCase {
  std::string contour;
  int zeta;
  Resolution res;
};

inline std::vector<KappaCase> test1() {
  std::vector<KappaCase> out;
  for (Resolution r : {Resolution{50, 50}, Resolution{100, 100}, Resolution{80, 300}})
    for (int j = 1; j <= 4; ++j) out.push_back({"C1", j, r});
  return out;
}

inline std::vector<KappaCase> test2() {
  std::vector<KappaCase> out;
  for (const char* c : {"C2", "C3", "C4", "C5"})
    for (Resolution r : {Resolution{50, 50}, Resolution{80, 100}, Resolution{80, 200}, Resolution{80, 300},
                         Resolution{80, 400}})
      out.push_back({c, 1, r});
  return out;
}

/// Optimization setup: physics, descent settings and the initial contour.
struct Case {
  PhysicsConfig physics;
  OptimConfig optim;
  std::string initial;
};

inline Case case1(const std::string& initial = "C2") {
  Case c;
  c.physics.q = field("q_paper");
  c.physics.target = field("ubar_cells");
  c.physics.region_A = Rect::domain();
  c.optim.alpha = 0.0;
  c.optim.ell = 0.1;
  c.optim.N = 50;
  c.optim.M = 100;
  c.initial = initial;
  return c;
}

inline Case case2(double alpha = 100.0) {
  Case c;
  c.physics.q = field("q_paper");
  c.physics.target = field("ubar_cells");
  c.physics.region_A = Rect{-0.5, 1.0, -0.5, 1.0};
  c.optim.alpha = alpha;
  c.optim.L0 = 3.0;
  c.optim.ell = 0.1;
  c.optim.N = 50;
  c.optim.M = 100;
  c.initial = "C6";
  return c;
}

inline Case optimization_case(const std::string& name, const std::string& initial = "") {
  if (name == "case1") return case1(initial.empty() ? "C2" : initial);
  if (name == "case2") {
    Case c = case2();
    if (!initial.empty()) c.initial = initial;
    return c;
  }
  throw ArgumentError("unknown optimization preset '" + name + "'");
}

}  // namespace coolshape::presets
