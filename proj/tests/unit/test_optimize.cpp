#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "coolshape/coolshape.hpp"
#include "support.hpp"

using namespace coolshape;

TEST(BrentLineSearch, QuadraticMinimum) {
  int calls = 0;
  const auto r = brent_line_search([&](double t) { ++calls; return (t - 2.0) * (t - 2.0); }, 5.0, 4.0);
  EXPECT_NEAR(r.tau, 2.0, 1e-4);
  EXPECT_LE(r.evaluations, 50);
  EXPECT_EQ(calls, r.evaluations);
  EXPECT_LT(r.value, 1e-8);
}

TEST(BrentLineSearch, MonotoneIncreaseStagnates) {
  const auto r = brent_line_search([](double t) { return t; }, 1.0, 0.0);
  EXPECT_EQ(r.tau, 0.0);
  EXPECT_EQ(r.value, 0.0);
}

TEST(BrentLineSearch, MonotoneDecreaseHitsBracketEnd) {
  const auto r = brent_line_search([](double t) { return -t; }, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(r.tau, 1.0);
  EXPECT_DOUBLE_EQ(r.value, -1.0);
}

TEST(BrentLineSearch, InadmissibleFarEnd) {
  // +inf beyond 0.05 must pull the bracket in instead of chasing it
  auto phi = [](double t) { return t > 0.05 ? std::numeric_limits<double>::infinity() : (t - 0.03) * (t - 0.03); };
  const auto r = brent_line_search(phi, 1.0, 0.03 * 0.03);
  EXPECT_NEAR(r.tau, 0.03, 1e-4);
}

TEST(BrentLineSearch, RandomParabolas) {
  std::mt19937 rng(coolshape::testing::kSeed);
  std::uniform_real_distribution<double> centre(0.05, 0.95), curv(0.1, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = centre(rng), a = curv(rng);
    const auto r = brent_line_search([&](double t) { return a * (t - c) * (t - c) + std::pow(t - c, 4); }, 1.0, a * c * c);
    EXPECT_NEAR(r.tau, c, 2e-4) << trial;
    EXPECT_LE(r.value, a * c * c);
  }
  EXPECT_THROW(brent_line_search([](double t) { return t; }, 0.0, 0.0), ArgumentError);
}

TEST(KappaTest, RejectsDegenerateInput) {
  const PhysicsConfig p = presets::validation_physics();
  const Contour c = presets::contour("C1", 64);
  EXPECT_THROW(kappa_test(p, c, {VectorXd::Zero(64), c.length()}, {1e-3}, 20), ArgumentError);
  EXPECT_THROW(kappa_test(p, c, {VectorXd::Ones(32), c.length()}, {1e-3}, 20), ArgumentError);
  EXPECT_THROW(kappa_test(p, c, presets::perturbation(1, c), {}, 20), ArgumentError);
}

TEST(KappaTest, GeometryErrorNamesEpsilon) {
  const PhysicsConfig p = presets::validation_physics();
  const Contour c = presets::contour("C1", 64);
  try {
    kappa_test(p, c, {VectorXd::Ones(64), c.length()}, {1e-4, 0.6}, 20);
    FAIL() << "expected a geometry error";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("epsilon = 0.6"), std::string::npos) << e.what();
  }
}

TEST(KappaTest, PlateauOnCircleSmallResolution) {
  const PhysicsConfig p = presets::validation_physics();
  const Contour c = presets::contour("C1", 100);
  const KappaResult r = kappa_test(p, c, presets::perturbation(1, c), default_epsilons(), 50);
  ASSERT_EQ(r.rows.size(), 10u);
  EXPECT_LT(r.best_error(), 1e-2);
  // truncation at the large end, round-off at the small end
  EXPECT_GT(std::abs(r.rows.front().kappa - 1.0), r.best_error());
  EXPECT_GT(std::abs(r.rows.back().kappa - 1.0), r.best_error());
}

TEST(KappaTest, UnresolvedPerturbationGivesNaNRow) {
  const PhysicsConfig p = presets::validation_physics();
  const Contour c = presets::contour("C5", 50);
  const KappaResult r = kappa_test(p, c, presets::perturbation(1, c), {1e-1, 1e-3}, 20);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_TRUE(std::isnan(r.rows[0].kappa));
  EXPECT_TRUE(std::isfinite(r.rows[1].kappa));
  EXPECT_EQ(r.best_error(), std::abs(r.rows[1].kappa - 1.0));
}

TEST(Perturbations, SinesOfArcParameter) {
  const Contour c = presets::contour("C3", 64);
  const ContourFunction z = presets::perturbation(3, c);
  for (Index l = 0; l < 64; ++l) EXPECT_NEAR(z[l], std::sin(3.0 * 2.0 * std::numbers::pi * l / 64.0), 1e-14);
  EXPECT_THROW(presets::perturbation(0, c), ArgumentError);
}

TEST(PerturbContour, RemeshesAfterDisplacement) {
  const Contour c = presets::contour("C2", 64);
  const Contour moved = perturb_contour(c, VectorXd::Constant(64, 0.05));
  EXPECT_TRUE(moved.is_equispaced());
  EXPECT_NEAR(moved.length(), 2.0 * std::numbers::pi * 0.25, 1e-10);
}

TEST(OptimConfig, Validation) {
  OptimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.M = 63;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.alpha = 1.0;
  c.L0 = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.eps_tau = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.margin = 1.0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(OptimizeShape, TrivialProblemStopsImmediately) {
  PhysicsConfig p;
  p.q = FieldSpec::constant(0.0);
  p.target = FieldSpec::constant(p.u0);
  OptimConfig cfg;
  cfg.N = 20;
  cfg.M = 64;
  const Contour c = presets::contour("C2", 64);
  const OptimizationResult r = optimize_shape(cfg, p, c);
  EXPECT_TRUE(r.converged());
  ASSERT_FALSE(r.trace.records.empty());
  EXPECT_LE(r.trace.records.size(), 2u);
  EXPECT_LT(std::abs(r.trace.records.front().J), 1e-18);
  EXPECT_LT((r.contour.x() - c.x()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r.contour.y() - c.y()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OptimizeShape, DescentAndInvariantsOnCoarseRun) {
  presets::Case cs = presets::case1("C2");
  cs.optim.N = 24;
  cs.optim.M = 64;
  cs.optim.max_iters = 3;
  std::vector<IterationRecord> seen;
  const OptimizationResult r =
      optimize_shape(cs.optim, cs.physics, presets::contour("C2", 64), [&](const IterationRecord& rec) { seen.push_back(rec); });
  ASSERT_GE(r.trace.records.size(), 2u);
  EXPECT_EQ(seen.size(), r.trace.records.size());
  const auto& recs = r.trace.records;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    EXPECT_LE(recs[i].J, recs[i - 1].J + 1e-12 * std::max(1.0, recs[i - 1].J)) << i;
    EXPECT_TRUE(contains_in_domain(*recs[i].contour, cs.optim.margin));
    EXPECT_TRUE(recs[i].contour->is_equispaced(kRemeshTol));
  }
  EXPECT_TRUE(recs.front().restart);
  EXPECT_LT(recs.back().J, recs.front().J);
}

TEST(OptimizeShape, MaxItersIsReported) {
  presets::Case cs = presets::case1("C2");
  cs.optim.N = 20;
  cs.optim.M = 64;
  cs.optim.max_iters = 1;
  const OptimizationResult r = optimize_shape(cs.optim, cs.physics, presets::contour("C2", 64));
  EXPECT_EQ(r.reason, StopReason::max_iters);
  EXPECT_FALSE(r.converged());
}

TEST(OptimizeShape, RejectsInitialContourOutsideMargin) {
  presets::Case cs = presets::case1("C2");
  cs.optim.margin = 0.3;
  EXPECT_THROW(optimize_shape(cs.optim, cs.physics, coolshape::testing::circle(0.0, 0.0, 0.8, 64)), GeometryError);
}
