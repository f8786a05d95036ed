#pragma once

// Gradient checks over contour x perturbation x resolution combinations.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "coolshape/optimize.hpp"
#include "coolshape/presets.hpp"

namespace coolshape {

struct KappaOutcome {
  presets::KappaCase spec;
  KappaResult result;
  double threshold = 0.0;  // required min |kappa - 1| on the plateau
  double best = 0.0;       // min |kappa - 1| over the plateau window
  bool plateau_ok = false;
  bool trend_ok = false;   // error grows again at both ends of the ladder
  std::string error;       // non-empty when the combination could not be run

  bool passed() const { return error.empty() && plateau_ok && trend_ok; }
};

/// Plateau window for epsilon.
constexpr double kPlateauMin = 1e-6;
constexpr double kPlateauMax = 1e-1;

/// 1e-3 at the finest resolution of a test, 1e-2 elsewhere.
inline double plateau_threshold(const presets::Resolution& r, const std::vector<presets::KappaCase>& all) {
  Index finest = 0;
  for (const auto& c : all) finest = std::max(finest, c.res.N * c.res.M);
  return r.N * r.M == finest ? 1e-3 : 1e-2;
}

inline void judge(KappaOutcome& o) {
  const auto& rows = o.result.rows;
  o.best = std::numeric_limits<double>::infinity();
  double best_all = std::numeric_limits<double>::infinity();
  // unresolved rows count as arbitrarily bad
  auto error = [](const KappaRow& r) {
    return std::isfinite(r.kappa) ? std::abs(r.kappa - 1.0) : std::numeric_limits<double>::infinity();
  };
  for (const auto& r : rows) {
    const double e = error(r);
    best_all = std::min(best_all, e);
    if (r.epsilon >= kPlateauMin * (1 - 1e-12) && r.epsilon <= kPlateauMax * (1 + 1e-12)) o.best = std::min(o.best, e);
  }
  o.plateau_ok = o.best <= o.threshold;
  // both ends of the ladder sit above the plateau minimum
  double large = 0.0, small = 0.0;
  bool have_large = false, have_small = false;
  for (const auto& r : rows) {
    const double e = error(r);
    if (r.epsilon >= 1e-2) {
      large = std::max(large, e);
      have_large = true;
    }
    if (r.epsilon <= 1e-7) {
      small = std::max(small, e);
      have_small = true;
    }
  }
  o.trend_ok = have_large && have_small && large > best_all && small > best_all;
}

inline KappaOutcome run_kappa_case(const presets::KappaCase& k, const PhysicsConfig& physics,
                                   const std::vector<double>& epsilons, double threshold) {
  KappaOutcome o;
  o.spec = k;
  o.threshold = threshold;
  try {
    const Contour c = presets::contour(k.contour, k.res.M);
    const ContourFunction zeta = presets::perturbation(k.zeta, c);
    o.result = kappa_test(physics, c, zeta, epsilons, k.res.N);
    judge(o);
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

/// Worker count from CONTOUR_OPT_THREADS (default 1).
inline unsigned worker_count() {
  const char* env = std::getenv("CONTOUR_OPT_THREADS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v >= 1 ? static_cast<unsigned>(v) : 1u;
}

/// Runs every combination; results keep the input order whatever the worker count.
inline std::vector<KappaOutcome> run_kappa_cases(const std::vector<presets::KappaCase>& cases,
                                                 const PhysicsConfig& physics, const std::vector<double>& epsilons,
                                                 unsigned workers = 1,
                                                 const std::function<void(const KappaOutcome&)>& on_done = {}) {
  std::vector<KappaOutcome> out(cases.size());
  std::mutex mutex;
  std::size_t next = 0;
  auto work = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= cases.size()) return;
        i = next++;
      }
      out[i] = run_kappa_case(cases[i], physics, epsilons, plateau_threshold(cases[i].res, cases));
      if (on_done) {
        std::lock_guard lock(mutex);
        on_done(out[i]);
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cases.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace coolshape
