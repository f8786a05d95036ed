#pragma once

// JSON run configuration for the command-line tool.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coolshape/coolshape.hpp"

namespace coolshape::cli {

using nlohmann::json;

/// Bad configuration: exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContourSpec {
  std::string preset;                // Table name, e.g. "C1"
  std::vector<Vector2d> points;      // explicit nodes when preset is empty
  std::optional<std::string> csv;    // or an s,x,y file
};

struct RunConfig {
  PhysicsConfig physics;
  OptimConfig optim;
  ContourSpec contour;
  std::filesystem::path out_dir = "out";
  bool snapshots = true;
  Index solve_N = 50;
  std::vector<presets::KappaCase> combinations;  // validate
  std::vector<double> epsilons = default_epsilons();
  int zeta = 1;  // kappa
  json raw;      // canonical form used for the manifest hash
};

namespace detail {

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline FieldSpec parse_field(const json& j, const std::string& what, const std::filesystem::path& base) {
  if (j.is_string()) {
    try {
      return presets::field(j.get<std::string>());
    } catch (const ArgumentError& e) {
      throw ConfigError(what + ": " + e.what());
    }
  }
  if (j.is_number()) return FieldSpec::constant(j.get<double>());
  if (j.is_object() && j.contains("grid")) {
    const std::filesystem::path p = base / j["grid"].get<std::string>();
    auto [N, f] = io::read_grid_field(p);
    (void)N;
    return {{}, f, what + ":" + p.filename().string()};
  }
  throw ConfigError(what + ": expected a preset name, a number or {\"grid\": path}");
}

template <typename T>
void take(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj[key].get<T>();
}

inline presets::Resolution parse_res(const json& j) {
  return {j.at("N").get<Index>(), j.at("M").get<Index>()};
}

}  // namespace detail

/// Parses a configuration document. Warnings go to `log`.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base, std::ostream& log) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << "parse error at line " << line << ", column " << col << ": " << e.what();
    throw ConfigError(os.str());
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig cfg;
  cfg.raw = doc;
  try {
    const json physics = doc.value("physics", json::object());
    if (!physics.contains("gamma")) log << "warning: physics.gamma missing, using gamma = 1\n";
    detail::take(physics, "k", cfg.physics.k);
    detail::take(physics, "gamma", cfg.physics.gamma);
    detail::take(physics, "u0", cfg.physics.u0);
    if (physics.contains("q")) cfg.physics.q = detail::parse_field(physics["q"], "physics.q", base);
    if (physics.contains("target")) cfg.physics.target = detail::parse_field(physics["target"], "physics.target", base);
    if (physics.contains("region_A")) {
      const auto r = physics["region_A"].get<std::vector<double>>();
      if (r.size() != 4) throw ConfigError("physics.region_A: expected [xmin, xmax, ymin, ymax]");
      cfg.physics.region_A = {r[0], r[1], r[2], r[3]};
    }
    try {
      cfg.physics.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }

    const json optim = doc.value("optim", json::object());
    detail::take(optim, "alpha", cfg.optim.alpha);
    detail::take(optim, "L0", cfg.optim.L0);
    detail::take(optim, "ell", cfg.optim.ell);
    detail::take(optim, "eps_J", cfg.optim.eps_J);
    detail::take(optim, "eps_tau", cfg.optim.eps_tau);
    detail::take(optim, "max_iters", cfg.optim.max_iters);
    detail::take(optim, "N", cfg.optim.N);
    detail::take(optim, "M", cfg.optim.M);
    detail::take(optim, "margin", cfg.optim.margin);
    detail::take(optim, "max_displacement", cfg.optim.max_displacement);
    try {
      cfg.optim.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }

    if (doc.contains("contour")) {
      const json& c = doc["contour"];
      if (c.is_string()) {
        cfg.contour.preset = c.get<std::string>();
      } else if (c.contains("preset")) {
        cfg.contour.preset = c["preset"].get<std::string>();
      } else if (c.contains("points")) {
        for (const auto& p : c["points"]) {
          const auto v = p.get<std::vector<double>>();
          if (v.size() != 2) throw ConfigError("contour.points: each point needs two coordinates");
          cfg.contour.points.emplace_back(v[0], v[1]);
        }
      } else if (c.contains("csv")) {
        cfg.contour.csv = (base / c["csv"].get<std::string>()).string();
      } else {
        throw ConfigError("contour: expected \"preset\", \"points\" or \"csv\"");
      }
      if (!cfg.contour.preset.empty()) {
        const auto& names = presets::contour_names();
        if (std::find(names.begin(), names.end(), cfg.contour.preset) == names.end())
          throw ConfigError("unknown contour preset '" + cfg.contour.preset + "'");
      }
    }

    const json outputs = doc.value("outputs", json::object());
    if (outputs.contains("dir")) cfg.out_dir = outputs["dir"].get<std::string>();
    detail::take(outputs, "snapshots", cfg.snapshots);

    if (doc.contains("solve")) detail::take(doc["solve"], "N", cfg.solve_N);

    if (doc.contains("validate")) {
      const json& v = doc["validate"];
      if (v.contains("tests")) {
        for (const auto& t : v["tests"]) {
          const std::string name = t.get<std::string>();
          std::vector<presets::KappaCase> add;
          if (name == "test1") add = presets::test1();
          else if (name == "test2") add = presets::test2();
          else throw ConfigError("unknown validation test '" + name + "'");
          cfg.combinations.insert(cfg.combinations.end(), add.begin(), add.end());
        }
      }
      if (v.contains("combinations")) {
        for (const auto& c : v["combinations"])
          cfg.combinations.push_back({c.at("contour").get<std::string>(), c.value("zeta", 1), detail::parse_res(c)});
      }
      detail::take(v, "epsilons", cfg.epsilons);
    }
    if (doc.contains("kappa")) {
      const json& k = doc["kappa"];
      detail::take(k, "zeta", cfg.zeta);
      detail::take(k, "epsilons", cfg.epsilons);
      if (k.contains("N")) cfg.optim.N = k["N"].get<Index>();
      if (k.contains("M")) cfg.optim.M = k["M"].get<Index>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, std::ostream& log) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read configuration '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path(), log);
}

/// Configuration built from a named preset: test1, test2, case1, case2.
inline RunConfig preset_config(const std::string& name, const std::string& initial) {
  RunConfig cfg;
  if (name == "test1" || name == "test2") {
    cfg.physics = presets::validation_physics();
    cfg.combinations = name == "test1" ? presets::test1() : presets::test2();
    cfg.contour.preset = name == "test1" ? "C1" : "C2";
  } else if (name == "case1" || name == "case2") {
    presets::Case c = presets::optimization_case(name, initial);
    cfg.physics = c.physics;
    cfg.optim = c.optim;
    cfg.contour.preset = c.initial;
    const auto& names = presets::contour_names();
    if (std::find(names.begin(), names.end(), c.initial) == names.end())
      throw ConfigError("unknown contour preset '" + c.initial + "'");
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  cfg.raw = json{{"preset", name}, {"initial", initial}};
  return cfg;
}

/// Contour described by the configuration, M nodes equispaced in arc length.
inline Contour build_contour(const ContourSpec& spec, Index M) {
  if (!spec.preset.empty()) return presets::contour(spec.preset, M);
  if (spec.csv) return resample_equal_arclength(io::read_contour(*spec.csv), M);
  if (spec.points.empty()) throw ConfigError("no contour given");
  VectorXd x(static_cast<Index>(spec.points.size())), y(x.size());
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    x[static_cast<Index>(i)] = spec.points[i].x();
    y[static_cast<Index>(i)] = spec.points[i].y();
  }
  return resample_equal_arclength(Contour(std::move(x), std::move(y)), M);
}

}  // namespace coolshape::cli
