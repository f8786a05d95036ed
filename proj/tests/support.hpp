#pragma once

// Helpers shared by the test suites: seeded generators and standard setups.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "coolshape/coolshape.hpp"

namespace coolshape::testing {

constexpr unsigned kSeed = 20240611u;

inline Contour circle(double cx, double cy, double r, Index M) {
  return sample_parametric([=](double t) { return cx + r * std::cos(t); },
                           [=](double t) { return cy + r * std::sin(t); }, M);
}

/// Random smooth star-shaped contour r(t) = r0 (1 + sum a_k cos(k t + p_k)) inside (-0.8, 0.8)^2.
inline Contour random_star(std::mt19937& rng, Index M, int modes = 4) {
  std::uniform_real_distribution<double> centre(-0.2, 0.2), radius(0.2, 0.4), amp(-0.05, 0.05),
      phase(0.0, 2.0 * std::numbers::pi);
  const double cx = centre(rng), cy = centre(rng), r0 = radius(rng);
  std::vector<double> a(static_cast<std::size_t>(modes)), p(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = amp(rng);
    p[k] = phase(rng);
  }
  auto r = [=](double t) {
    double s = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::cos(static_cast<double>(k + 2) * t + p[k]);
    return r0 * s;
  };
  const Contour raw = sample_parametric([=](double t) { return cx + r(t) * std::cos(t); },
                                        [=](double t) { return cy + r(t) * std::sin(t); }, 256);
  return resample_equal_arclength(raw, M);
}

/// Random trigonometric polynomial of degree < M/2 sampled on M nodes.
inline VectorXd random_trig(std::mt19937& rng, Index M, int degree) {
  std::normal_distribution<double> n(0.0, 1.0);
  VectorXd v = VectorXd::Constant(M, n(rng));
  for (int k = 1; k <= degree; ++k) {
    const double a = n(rng), b = n(rng);
    for (Index l = 0; l < M; ++l) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(M);
      v[l] += a * std::cos(k * t) + b * std::sin(k * t);
    }
  }
  return v;
}

inline PhysicsConfig energy_physics() {
  PhysicsConfig p;
  p.q = presets::field("q_paper");
  p.target = presets::field("ubar_sin");
  return p;
}

}  // namespace coolshape::testing
