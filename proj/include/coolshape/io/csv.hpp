#pragma once

// CSV export and import with 17 significant digits so values round-trip.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "coolshape/errors.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/gradient.hpp"
#include "coolshape/optimize.hpp"
#include "coolshape/solver.hpp"
#include "coolshape/spectral.hpp"

namespace coolshape::io {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ArgumentError("cannot open '" + path.string() + "' for writing");
  f << std::setprecision(17);
  return f;
}

inline std::vector<std::vector<double>> read_rows(const std::filesystem::path& path, const std::string& header) {
  std::ifstream f(path);
  if (!f) throw ArgumentError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line) || line != header)
    throw ArgumentError("'" + path.string() + "': expected header '" + header + "'");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ArgumentError("'" + path.string() + "' line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Header s,x,y.
inline void write_contour(const std::filesystem::path& path, const Contour& c) {
  auto f = detail::open_out(path);
  f << "s,x,y\n";
  const VectorXd s = c.arc_coordinates();
  for (Index l = 0; l < c.size(); ++l) f << s[l] << ',' << c.x()[l] << ',' << c.y()[l] << '\n';
}

inline Contour read_contour(const std::filesystem::path& path) {
  const auto rows = detail::read_rows(path, "s,x,y");
  VectorXd x(static_cast<Index>(rows.size())), y(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw ArgumentError("'" + path.string() + "': contour rows need 3 columns");
    x[static_cast<Index>(r)] = rows[r][1];
    y[static_cast<Index>(r)] = rows[r][2];
  }
  return Contour(std::move(x), std::move(y));
}

/// Header x,y,value; rows in grid order.
inline void write_grid_field(const std::filesystem::path& path, const ChebGrid& g, const GridField& f) {
  if (f.size() != g.size()) throw ArgumentError("write_grid_field: field does not match the grid");
  auto out = detail::open_out(path);
  out << "x,y,value\n";
  for (Index k = 0; k < g.size(); ++k) out << g.x(k) << ',' << g.y(k) << ',' << f[k] << '\n';
}

/// Reads a gridded field written by write_grid_field; N is inferred from the row count.
inline std::pair<Index, GridField> read_grid_field(const std::filesystem::path& path) {
  const auto rows = detail::read_rows(path, "x,y,value");
  const Index n = static_cast<Index>(rows.size());
  const Index N = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (N * N != n) throw ArgumentError("'" + path.string() + "': row count is not a square");
  GridField f(n);
  for (Index k = 0; k < n; ++k) f[k] = rows[static_cast<std::size_t>(k)].at(2);
  return {N, f};
}

/// Header s,u,dn_u1,dn_u2,mu.
inline void write_trace(const std::filesystem::path& path, const Contour& c, const CoupledSolution& s) {
  auto f = detail::open_out(path);
  f << "s,u,dn_u1,dn_u2,mu\n";
  const VectorXd sc = c.arc_coordinates();
  for (Index l = 0; l < c.size(); ++l)
    f << sc[l] << ',' << s.u_on_C[l] << ',' << s.dn_u1[l] << ',' << s.dn_u2[l] << ',' << s.mu[l] << '\n';
}

/// Header s,grad_l2,grad_h1.
inline void write_gradient(const std::filesystem::path& path, const Contour& c, const ShapeGradient& g) {
  auto f = detail::open_out(path);
  f << "s,grad_l2,grad_h1\n";
  const VectorXd sc = c.arc_coordinates();
  for (Index l = 0; l < c.size(); ++l) f << sc[l] << ',' << g.l2[l] << ',' << g.h1[l] << '\n';
}

/// Header iter,J,L,tau,grad_l2_norm,grad_h1_norm.
inline void write_optimization_trace(const std::filesystem::path& path, const OptimizationTrace& t) {
  auto f = detail::open_out(path);
  f << "iter,J,L,tau,grad_l2_norm,grad_h1_norm\n";
  for (const auto& r : t.records)
    f << r.iter << ',' << r.J << ',' << r.length << ',' << r.tau << ',' << r.grad_l2_norm << ',' << r.grad_h1_norm
      << '\n';
}

/// Header epsilon,J,kappa,abs_kappa_minus_1.
inline void write_kappa_table(const std::filesystem::path& path, const KappaResult& k) {
  auto f = detail::open_out(path);
  f << "epsilon,J,kappa,abs_kappa_minus_1\n";
  for (const auto& r : k.rows) f << r.epsilon << ',' << r.J << ',' << r.kappa << ',' << std::abs(r.kappa - 1.0) << '\n';
}

}  // namespace coolshape::io
