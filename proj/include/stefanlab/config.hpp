#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "stefanlab/errors.hpp"
#include "stefanlab/obstacle.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

inline const char* to_string(SolverMode m) {
  return m == SolverMode::radial ? "radial" : "cartesian2d";
}

inline const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::constant: return "constant";
    case BoundaryKind::ramp: return "ramp";
    case BoundaryKind::quadratic: return "quadratic";
  }
  return "ramp";
}

inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::cap: return "cap";
    case InitKind::positive: return "positive";
    case InitKind::zero: return "zero";
  }
  return "cap";
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double_at(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    require_input(used == v.size(), "config line " + std::to_string(line) +
                                        ": trailing characters after number '" + v + "'");
    return d;
  } catch (const input_error&) {
    throw;
  } catch (const std::exception&) {
    throw input_error("config line " + std::to_string(line) + ": expected a number, got '" + v +
                      "'");
  }
}

inline long long parse_int_at(const std::string& v, int line) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require_input(ec == std::errc() && ptr == v.data() + v.size(),
                "config line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
  return out;
}

} // namespace detail

/**
 * Flat key = value solver configuration.  '#' starts a comment, blank lines
 * are skipped, every key has a default, unknown or repeated keys are hard
 * errors carrying the line number.  Keys:
 *
 *   mode              radial | cartesian2d        (radial)
 *   n                 dimension                   (2)
 *   h                 grid spacing                (0.01)
 *   dt                time step                   (1e-4)
 *   L                 domain half-width           (1.0)
 *   omega             PSOR relaxation, (1, 2)     (1.8)
 *   tol               complementarity residual    (1e-10)
 *   max_sweeps        PSOR sweep cap              (20000)
 *   boundary.kind     constant | ramp | quadratic (ramp)
 *   boundary.g0       boundary scale              (0.125)
 *   boundary.kappa    ramp slope, >= 0            (1.0)
 *   boundary.mu1      quadratic x1 weight         (0.25)
 *   boundary.mu2      quadratic x2 weight         (0.25)
 *   init.kind         cap | positive | zero       (cap)
 *   init.radius       initial ice radius          (0.25)
 *   snapshot_stride   steps between snapshots     (0 = off)
 *   max_time          simulated time cap          (1.0)
 *   seed              RNG seed                    (1)
 */
inline SolverConfig load_solver_config(std::istream& is) {
  SolverConfig cfg;
  std::string raw;
  int line = 0;
  std::set<std::string> seen;
  while (std::getline(is, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = detail::trim(raw);
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    require_input(eq != std::string::npos,
                  "config line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    require_input(!key.empty() && !val.empty(),
                  "config line " + std::to_string(line) + ": empty key or value");
    require_input(seen.insert(key).second,
                  "config line " + std::to_string(line) + ": repeated key '" + key + "'");
    if (key == "mode") {
      if (val == "radial")
        cfg.mode = SolverMode::radial;
      else if (val == "cartesian2d")
        cfg.mode = SolverMode::cartesian2d;
      else
        throw input_error("config line " + std::to_string(line) + ": unknown mode '" + val + "'");
    } else if (key == "n") {
      cfg.n = static_cast<int>(detail::parse_int_at(val, line));
    } else if (key == "h") {
      cfg.h = detail::parse_double_at(val, line);
    } else if (key == "dt") {
      cfg.dt = detail::parse_double_at(val, line);
    } else if (key == "L") {
      cfg.L = detail::parse_double_at(val, line);
    } else if (key == "omega") {
      cfg.omega = detail::parse_double_at(val, line);
    } else if (key == "tol") {
      cfg.tol = detail::parse_double_at(val, line);
    } else if (key == "max_sweeps") {
      cfg.max_sweeps = static_cast<int>(detail::parse_int_at(val, line));
    } else if (key == "boundary.kind") {
      if (val == "constant")
        cfg.boundary.kind = BoundaryKind::constant;
      else if (val == "ramp")
        cfg.boundary.kind = BoundaryKind::ramp;
      else if (val == "quadratic")
        cfg.boundary.kind = BoundaryKind::quadratic;
      else
        throw input_error("config line " + std::to_string(line) + ": unknown boundary.kind '" +
                          val + "'");
    } else if (key == "boundary.g0") {
      cfg.boundary.g0 = detail::parse_double_at(val, line);
    } else if (key == "boundary.kappa") {
      cfg.boundary.kappa = detail::parse_double_at(val, line);
    } else if (key == "boundary.mu1") {
      cfg.boundary.mu1 = detail::parse_double_at(val, line);
    } else if (key == "boundary.mu2") {
      cfg.boundary.mu2 = detail::parse_double_at(val, line);
    } else if (key == "init.kind") {
      if (val == "cap")
        cfg.init.kind = InitKind::cap;
      else if (val == "positive")
        cfg.init.kind = InitKind::positive;
      else if (val == "zero")
        cfg.init.kind = InitKind::zero;
      else
        throw input_error("config line " + std::to_string(line) + ": unknown init.kind '" + val +
                          "'");
    } else if (key == "init.radius") {
      cfg.init.radius = detail::parse_double_at(val, line);
    } else if (key == "snapshot_stride") {
      cfg.snapshot_stride = static_cast<int>(detail::parse_int_at(val, line));
    } else if (key == "max_time") {
      cfg.max_time = detail::parse_double_at(val, line);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::parse_int_at(val, line));
    } else {
      throw input_error("config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline SolverConfig load_solver_config(const std::string& path) {
  std::ifstream f(path);
  require_input(f.good(), "load_solver_config: cannot open '" + path + "'");
  return load_solver_config(f);
}

/// Canonical echo: every key, fixed order, 17 significant digits.
/// load(save(cfg)) reproduces cfg exactly.
inline void save_solver_config(const SolverConfig& cfg, std::ostream& os) {
  os << "mode = " << to_string(cfg.mode) << "\n";
  os << "n = " << cfg.n << "\n";
  os << "h = " << format17(cfg.h) << "\n";
  os << "dt = " << format17(cfg.dt) << "\n";
  os << "L = " << format17(cfg.L) << "\n";
  os << "omega = " << format17(cfg.omega) << "\n";
  os << "tol = " << format17(cfg.tol) << "\n";
  os << "max_sweeps = " << cfg.max_sweeps << "\n";
  os << "boundary.kind = " << to_string(cfg.boundary.kind) << "\n";
  os << "boundary.g0 = " << format17(cfg.boundary.g0) << "\n";
  os << "boundary.kappa = " << format17(cfg.boundary.kappa) << "\n";
  os << "boundary.mu1 = " << format17(cfg.boundary.mu1) << "\n";
  os << "boundary.mu2 = " << format17(cfg.boundary.mu2) << "\n";
  os << "init.kind = " << to_string(cfg.init.kind) << "\n";
  os << "init.radius = " << format17(cfg.init.radius) << "\n";
  os << "snapshot_stride = " << cfg.snapshot_stride << "\n";
  os << "max_time = " << format17(cfg.max_time) << "\n";
  os << "seed = " << cfg.seed << "\n";
}

inline std::string config_echo(const SolverConfig& cfg) {
  std::ostringstream ss;
  save_solver_config(cfg, ss);
  return ss.str();
}

} // namespace stefan
