#pragma once

// Plain CSV persistence with shortest round-trip decimal numbers.

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/mfg/fields.hpp"
#include "mfg_seird/mfg/params.hpp"
#include "mfg_seird/seird/simulate.hpp"

namespace mfg_seird::io {

namespace fs = std::filesystem;

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Strict: the whole token must be a finite number.
inline double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw ConfigError("csv: missing column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_commas(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                        " columns");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, path.string() + ":" + std::to_string(lineno)));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ConfigError(path.string() + ": empty file");
  return t;
}

inline void write_csv(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  std::string buf;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) buf += ',';
    buf += header[c];
  }
  buf += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) buf += ',';
      buf += format_double(row[c]);
    }
    buf += '\n';
  }
  out << buf;
  if (!out) throw ConfigError("write failed: " + path.string());
}

namespace detail {

// Node count n such that xs are exactly the nodes i/n of a periodic grid.
inline PeriodicGrid periodic_grid_from(const std::vector<double>& xs, const std::string& what) {
  const PeriodicGrid g(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(std::abs(xs[i] - g.node(i)) <= 1e-9, what + ": x column is not a uniform periodic grid on [0, 1)");
  }
  return g;
}

}  // namespace detail

// ---- MFG fields --------------------------------------------------------

inline void write_density_field(const fs::path& path, const mfg::DensityField& mu) {
  const RectGrid& g = mu.grid;
  std::vector<std::vector<double>> rows;
  rows.reserve(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) rows.push_back({g.x(i), g.h(j), mu(i, j)});
  }
  write_csv(path, {"x", "h", "mu"}, rows);
}

inline mfg::DensityField read_density_field(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = t.column("x"), ch = t.column("h"), cm = t.column("mu");
  require(!t.rows.empty(), path.string() + ": no rows");
  std::size_t nh = 0;
  while (nh < t.rows.size() && t.rows[nh][cx] == t.rows[0][cx]) ++nh;
  require(nh >= 2 && t.rows.size() % nh == 0, path.string() + ": rows are not a full (x, h) grid");
  std::vector<double> xs;
  for (std::size_t r = 0; r < t.rows.size(); r += nh) xs.push_back(t.rows[r][cx]);
  const RectGrid g(detail::periodic_grid_from(xs, path.string()), nh, t.rows[nh - 1][ch]);
  mfg::DensityField mu(g);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    require(std::abs(t.rows[r][ch] - g.h(r % nh)) <= 1e-9 * g.h_max(), path.string() + ": irregular h column");
    mu.values[r] = t.rows[r][cm];
  }
  return mu;
}

inline void write_spatial_density(const fs::path& path, const PeriodicGrid& grid, const std::vector<double>& mu_x) {
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back({grid.node(i), mu_x[i]});
  write_csv(path, {"x", "mu_x"}, rows);
}

inline mfg::SpatialDensity read_spatial_density(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = t.column("x"), cm = t.column("mu_x");
  std::vector<double> xs, mu;
  for (const auto& r : t.rows) {
    xs.push_back(r[cx]);
    mu.push_back(r[cm]);
  }
  require(xs.size() >= PeriodicGrid::kMinNodes, path.string() + ": density needs at least 8 rows");
  return {detail::periodic_grid_from(xs, path.string()), std::move(mu)};
}

inline void write_value_policy(const fs::path& path, const mfg::ValueField& V, const mfg::PolicyField& pol) {
  const RectGrid& g = V.grid;
  std::vector<std::vector<double>> rows;
  rows.reserve(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nh(); ++j) {
      const std::size_t n = g.index(i, j);
      rows.push_back({g.x(i), g.h(j), V.values[n], pol.drift(n), pol.investment[n]});
    }
  }
  write_csv(path, {"x", "h", "V", "v_star", "f_star"}, rows);
}

/// Two-column (x, A) amenity table.
inline mfg::Amenity read_amenity(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cx = t.column("x"), ca = t.column("A");
  std::vector<double> xs, vals;
  for (const auto& r : t.rows) {
    xs.push_back(r[cx]);
    vals.push_back(r[ca]);
  }
  return mfg::Amenity::table(std::move(xs), std::move(vals), path.string());
}

// ---- epidemic trajectories -------------------------------------------------

inline constexpr std::array<std::string_view, 5> kCompartments{"S", "E", "I", "R", "D"};

inline void write_trajectory_long(const fs::path& path, const seird::Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.snapshots.size() * traj.grid.size());
  for (const auto& s : traj.snapshots) {
    for (std::size_t i = 0; i < traj.grid.size(); ++i) {
      rows.push_back({s.t, traj.grid.node(i), s.S[i], s.E[i], s.I[i], s.R[i], s.D[i]});
    }
  }
  write_csv(path, {"t", "x", "S", "E", "I", "R", "D"}, rows);
}

/// Rows are snapshots, columns nodes; first row holds x, first column t.
struct SpaceTimeMatrix {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<std::vector<double>> values;
};

inline SpaceTimeMatrix space_time(const seird::Trajectory& traj, std::size_t compartment) {
  require(compartment < 5, "compartment index out of range");
  SpaceTimeMatrix m;
  for (std::size_t i = 0; i < traj.grid.size(); ++i) m.x.push_back(traj.grid.node(i));
  for (const auto& s : traj.snapshots) {
    m.t.push_back(s.t);
    m.values.push_back(*s.fields()[compartment]);
  }
  return m;
}

inline void write_space_time(const fs::path& path, const SpaceTimeMatrix& m) {
  std::vector<std::string> header{"t"};
  for (double x : m.x) header.push_back(format_double(x));
  std::vector<std::vector<double>> rows;
  rows.reserve(m.t.size());
  for (std::size_t r = 0; r < m.t.size(); ++r) {
    std::vector<double> row{m.t[r]};
    row.insert(row.end(), m.values[r].begin(), m.values[r].end());
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

inline SpaceTimeMatrix read_space_time(const fs::path& path) {
  const CsvTable t = read_csv(path);
  require(t.header.size() >= 2 && t.header[0] == "t", path.string() + ": first header cell must be 't'");
  SpaceTimeMatrix m;
  for (std::size_t c = 1; c < t.header.size(); ++c) m.x.push_back(parse_double(t.header[c], path.string() + ": header"));
  for (const auto& r : t.rows) {
    m.t.push_back(r[0]);
    m.values.emplace_back(r.begin() + 1, r.end());
  }
  return m;
}

}  // namespace mfg_seird::io
