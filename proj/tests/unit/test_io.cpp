#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "coolshape/coolshape.hpp"
#include "support.hpp"

using namespace coolshape;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "coolshape_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

int line_count(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  int n = 0;
  while (std::getline(f, line)) ++n;
  return n;
}

}  // namespace

TEST(Csv, ContourRoundTripIsExact) {
  std::mt19937 rng(coolshape::testing::kSeed);
  for (int trial = 0; trial < 5; ++trial) {
    const Contour c = coolshape::testing::random_star(rng, 64);
    const fs::path p = scratch("contour.csv");
    io::write_contour(p, c);
    EXPECT_EQ(first_line(p), "s,x,y");
    const Contour back = io::read_contour(p);
    EXPECT_EQ(back.x(), c.x());
    EXPECT_EQ(back.y(), c.y());
  }
}

TEST(Csv, GridFieldRoundTripIsExact) {
  const ChebGrid g = build_grid(12);
  const GridField f = g.sample([](double x, double y) { return std::exp(x) / 3.0 + std::sin(7.0 * y); });
  const fs::path p = scratch("field.csv");
  io::write_grid_field(p, g, f);
  EXPECT_EQ(first_line(p), "x,y,value");
  const auto [N, back] = io::read_grid_field(p);
  EXPECT_EQ(N, 12);
  EXPECT_EQ(back, f);
  EXPECT_THROW(io::write_grid_field(p, build_grid(10), f), ArgumentError);
}

TEST(Csv, SolutionAndGradientHeaders) {
  const PhysicsConfig p = coolshape::testing::energy_physics();
  const Contour c = presets::contour("C1", 64);
  const GradientEvaluation ev = evaluate_gradient(p, c, 20, 0.0, 0.0, 0.1);
  const fs::path t = scratch("trace.csv"), g = scratch("gradient.csv");
  io::write_trace(t, c, ev.cost.direct);
  io::write_gradient(g, c, ev.gradient);
  EXPECT_EQ(first_line(t), "s,u,dn_u1,dn_u2,mu");
  EXPECT_EQ(first_line(g), "s,grad_l2,grad_h1");
  EXPECT_EQ(line_count(t), 65);
  EXPECT_EQ(line_count(g), 65);
}

TEST(Csv, TraceAndKappaHeaders) {
  OptimizationTrace tr;
  tr.records.push_back({0, 1.0 / 3.0, 2.0, 1e-5, 4.0, 5.0, true, nullptr});
  const fs::path p = scratch("opt.csv");
  io::write_optimization_trace(p, tr);
  EXPECT_EQ(first_line(p), "iter,J,L,tau,grad_l2_norm,grad_h1_norm");
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::getline(f, line);
  EXPECT_EQ(std::stod(line.substr(2, line.find(',', 2) - 2)), 1.0 / 3.0);

  KappaResult k;
  k.rows.push_back({1e-3, 2.0, 0.999});
  const fs::path q = scratch("kappa.csv");
  io::write_kappa_table(q, k);
  EXPECT_EQ(first_line(q), "epsilon,J,kappa,abs_kappa_minus_1");
}

TEST(Csv, ReadErrors) {
  const fs::path p = scratch("bad.csv");
  {
    std::ofstream f(p);
    f << "a,b\n1,2\n";
  }
  EXPECT_THROW(io::read_contour(p), ArgumentError);
  {
    std::ofstream f(p);
    f << "s,x,y\n0,0.5,zz\n";
  }
  EXPECT_THROW(io::read_contour(p), ArgumentError);
  {
    std::ofstream f(p);
    f << "x,y,value\n0,0,1\n0,1,2\n";
  }
  EXPECT_THROW(io::read_grid_field(p), ArgumentError);
  EXPECT_THROW(io::read_contour(scratch("missing.csv")), ArgumentError);
}
