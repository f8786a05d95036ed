// coolshape: solve, validate, optimize and kappa commands.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coolshape/coolshape.hpp"
#include "run_config.hpp"

#ifndef COOLSHAPE_VERSION
#define COOLSHAPE_VERSION "0.0.0-unknown"
#endif

namespace fs = std::filesystem;
using namespace coolshape;
using cli::ConfigError;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kValidate = 4, kMaxIters = 5 };

class Manifest {
 public:
  Manifest(std::string command, const cli::RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {}

  template <typename F>
  auto timed(const std::string& phase, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      std::map<std::string, double>& t;
      std::string phase;
      std::chrono::steady_clock::time_point t0;
      ~Stop() { t[phase] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
    } stop{timings_, phase, t0};
    return f();
  }

  void add(const fs::path& p) { files_.push_back(p); }
  void resolution(Index N, Index M) { res_.push_back({N, M}); }

  void write(const fs::path& dir) const {
    json files = json::array();
    for (const auto& p : files_) {
      if (!fs::exists(p) || fs::file_size(p) == 0)
        throw std::runtime_error("manifest: output '" + p.string() + "' is missing or empty");
      files.push_back({{"path", fs::relative(p, dir).string()}, {"bytes", fs::file_size(p)}});
    }
    json res = json::array();
    for (auto [N, M] : res_) res.push_back({{"N", N}, {"M", M}});
    const auto& ph = cfg_.physics;
    json m{{"command", command_},
           {"version", COOLSHAPE_VERSION},
           {"config_hash", hash()},
           {"resolutions", res},
           {"physics",
            {{"k", ph.k},
             {"gamma", ph.gamma},
             {"u0", ph.u0},
             {"q", ph.q.name},
             {"target", ph.target.name},
             {"region_A", {ph.region_A.xmin, ph.region_A.xmax, ph.region_A.ymin, ph.region_A.ymax}}}},
           {"timings_s", timings_},
           {"files", files}};
    std::ofstream f(dir / "manifest.json");
    f << std::setw(2) << m << '\n';
  }

 private:
  std::string hash() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(cfg_.raw.dump());
    return os.str();
  }

  std::string command_;
  const cli::RunConfig& cfg_;
  std::map<std::string, double> timings_;
  std::vector<fs::path> files_;
  std::vector<std::pair<Index, Index>> res_;
};

Contour initial_contour(const cli::RunConfig& cfg, Index M) {
  try {
    Contour c = cli::build_contour(cfg.contour, M);
    if (!contains_in_domain(c, 0.0)) throw ConfigError("contour must lie inside the domain (-1,1)^2");
    return c;
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("contour must lie inside the domain (-1,1)^2: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("contour: ") + e.what());
  }
}

int cmd_solve(const cli::RunConfig& cfg) {
  Manifest man("solve", cfg);
  const Contour c = initial_contour(cfg, cfg.optim.M);
  const Index N = cfg.solve_N;
  man.resolution(N, c.size());
  const auto sys = man.timed("factorize", [&] {
    return std::make_shared<CoupledSystem>(cfg.physics.k, cfg.physics.gamma, c, GridSolver::shared(N));
  });
  const CoupledSolution d = man.timed("direct", [&] { return solve_direct(cfg.physics, *sys); });
  const CoupledSolution a = man.timed("adjoint", [&] { return solve_adjoint(cfg.physics, *sys, d); });
  const double J = man.timed("cost", [&] { return tracking_integral(cfg.physics, sys->grid(), c, d); });
  const ShapeGradient g = make_shape_gradient(assemble_l2_gradient(d, a, c, cfg.physics), cfg.optim.ell);

  const fs::path out = cfg.out_dir;
  io::write_contour(out / "contour.csv", c);
  io::write_grid_field(out / "u.csv", sys->grid(), d.u);
  io::write_grid_field(out / "u_adjoint.csv", sys->grid(), a.u);
  io::write_trace(out / "trace.csv", c, d);
  io::write_trace(out / "trace_adjoint.csv", c, a);
  io::write_gradient(out / "gradient.csv", c, g);
  for (const char* f : {"contour.csv", "u.csv", "u_adjoint.csv", "trace.csv", "trace_adjoint.csv", "gradient.csv"})
    man.add(out / f);
  man.write(out);
  std::printf("J = %.17g\nflux-jump residual = %.3e\n", J, flux_jump_residual(cfg.physics, d).cwiseAbs().maxCoeff());
  return kOk;
}

std::string combo_name(const presets::KappaCase& k) {
  return "kappa_" + k.contour + "_z" + std::to_string(k.zeta) + "_N" + std::to_string(k.res.N) + "_M" +
         std::to_string(k.res.M) + ".csv";
}

int cmd_validate(const cli::RunConfig& cfg) {
  if (cfg.combinations.empty()) throw ConfigError("validate: empty combination list");
  Manifest man("validate", cfg);
  for (const auto& k : cfg.combinations) man.resolution(k.res.N, k.res.M);
  const fs::path out = cfg.out_dir;
  const auto results = man.timed("kappa", [&] {
    return run_kappa_cases(cfg.combinations, cfg.physics, cfg.epsilons, worker_count(), [](const KappaOutcome& o) {
      std::printf("%-3s zeta%d (%3ld,%3ld)  min|kappa-1| = %.3e  %s\n", o.spec.contour.c_str(), o.spec.zeta,
                  static_cast<long>(o.spec.res.N), static_cast<long>(o.spec.res.M), o.best,
                  o.passed() ? "pass" : "FAIL");
      std::fflush(stdout);
    });
  });
  std::ofstream summary;
  fs::create_directories(out);
  summary.open(out / "summary.csv");
  summary << std::setprecision(17) << "contour,zeta,N,M,threshold,best,plateau_ok,trend_ok,error\n";
  std::vector<std::string> failures;
  for (const auto& o : results) {
    summary << o.spec.contour << ',' << o.spec.zeta << ',' << o.spec.res.N << ',' << o.spec.res.M << ','
            << o.threshold << ',' << o.best << ',' << o.plateau_ok << ',' << o.trend_ok << ",\"" << o.error << "\"\n";
    if (o.error.empty()) {
      io::write_kappa_table(out / combo_name(o.spec), o.result);
      man.add(out / combo_name(o.spec));
    }
    if (!o.passed()) failures.push_back(combo_name(o.spec) + (o.error.empty() ? "" : ": " + o.error));
  }
  summary.close();
  man.add(out / "summary.csv");
  man.write(out);
  if (!failures.empty()) {
    std::fprintf(stderr, "%zu of %zu combinations failed:\n", failures.size(), results.size());
    for (const auto& f : failures) std::fprintf(stderr, "  %s\n", f.c_str());
    return kValidate;
  }
  return kOk;
}

int cmd_kappa(const cli::RunConfig& cfg) {
  Manifest man("kappa", cfg);
  const Contour c = initial_contour(cfg, cfg.optim.M);
  man.resolution(cfg.optim.N, c.size());
  const ContourFunction zeta = presets::perturbation(cfg.zeta, c);
  const KappaResult r = man.timed("kappa", [&] {
    return kappa_test(cfg.physics, c, zeta, cfg.epsilons, cfg.optim.N, cfg.optim.alpha, cfg.optim.L0);
  });
  const fs::path out = cfg.out_dir;
  io::write_kappa_table(out / "kappa.csv", r);
  man.add(out / "kappa.csv");
  man.write(out);
  std::printf("<grad J, zeta> = %.17g\n", r.directional);
  for (const auto& row : r.rows) std::printf("%8.1e  %.17g  %.3e\n", row.epsilon, row.kappa, std::abs(row.kappa - 1.0));
  return kOk;
}

int cmd_optimize(const cli::RunConfig& cfg) {
  Manifest man("optimize", cfg);
  const Contour c0 = initial_contour(cfg, cfg.optim.M);
  if (!contains_in_domain(c0, cfg.optim.margin))
    throw ConfigError("initial contour violates the domain margin " + std::to_string(cfg.optim.margin));
  man.resolution(cfg.optim.N, cfg.optim.M);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  auto snapshot = [&](const IterationRecord& r) {
    std::printf("%4d  J = %.10g  L = %.6f  tau = %.3e  |g|_H1 = %.3e%s\n", r.iter, r.J, r.length, r.tau,
                r.grad_h1_norm, r.restart ? "  (restart)" : "");
    std::fflush(stdout);
    if (cfg.snapshots && r.contour) {
      char name[64];
      std::snprintf(name, sizeof name, "contour_%04d.csv", r.iter);
      io::write_contour(out / name, *r.contour);
      man.add(out / name);
    }
  };
  OptimizationTrace trace;
  StopReason reason = StopReason::max_iters;
  Contour final_c = c0;
  int code = kOk;
  try {
    OptimizationResult res = man.timed("optimize", [&] { return optimize_shape(cfg.optim, cfg.physics, c0, snapshot); });
    trace = std::move(res.trace);
    reason = res.reason;
    final_c = res.contour;
    if (!res.converged()) code = kMaxIters;
  } catch (const OptimizationError& e) {
    trace = e.trace();
    std::fprintf(stderr, "error: %s\n", e.what());
    code = kSolver;
  }
  io::write_optimization_trace(out / "trace.csv", trace);
  man.add(out / "trace.csv");
  if (code != kSolver) {
    io::write_contour(out / "contour_final.csv", final_c);
    man.add(out / "contour_final.csv");
  }
  man.write(out);
  if (code != kSolver) std::printf("stop: %s\n", to_string(reason));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization of a cooling contour"};
  app.set_version_flag("--version", COOLSHAPE_VERSION);
  app.require_subcommand(1);
  std::string config_path, out_dir, preset, initial;
  int seed = 0;
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"solve", "validate", "optimize", "kappa"}) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "JSON configuration");
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--preset", preset, "test1, test2, case1 or case2");
    s->add_option("--initial", initial, "initial contour for case presets (C1..C6)");
    s->add_option("--seed", seed, "unused; the pipeline is deterministic");
    subs[name] = s;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }
  (void)seed;

  try {
    cli::RunConfig cfg;
    if (!preset.empty()) {
      cfg = cli::preset_config(preset, initial);
      if (!config_path.empty()) throw ConfigError("use either --config or --preset");
    } else if (!config_path.empty()) {
      cfg = cli::load_config(config_path, std::cerr);
    } else {
      throw ConfigError("either --config or --preset is required");
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (subs["solve"]->parsed()) return cmd_solve(cfg);
    if (subs["validate"]->parsed()) return cmd_validate(cfg);
    if (subs["optimize"]->parsed()) return cmd_optimize(cfg);
    return cmd_kappa(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolver;
  }
}
