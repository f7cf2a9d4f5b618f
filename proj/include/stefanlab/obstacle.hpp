#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stefanlab/errors.hpp"
#include "stefanlab/field.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

enum class SolverMode { radial, cartesian2d };
enum class BoundaryKind { constant, ramp, quadratic };
enum class InitKind { cap, positive, zero };

/// Outer Dirichlet data.  All kinds are nondecreasing in time (kappa >= 0),
/// which is what keeps the discrete solution monotone and the ice shrinking.
///   constant:  g0
///   ramp:      g0 (1 + kappa t)
///   quadratic: g0 (1 + kappa t) (mu1 x1^2 + mu2 x2^2)   (radial: g0(1+kappa t) r^2)
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::ramp;
  double g0 = 0.125;
  double kappa = 1.0;
  double mu1 = 0.25;
  double mu2 = 0.25;
};

/// Initial data.
///   cap:      boundary profile times ((|x| - radius)_+ / (L - radius))^2, ice ball of
///             the given radius
///   positive: max(boundary profile at t = 0, 0.1 g0), no ice anywhere
///   zero:     identically zero inside, boundary values on the rim
struct InitSpec {
  InitKind kind = InitKind::cap;
  double radius = 0.25;
};

struct SolverConfig {
  SolverMode mode = SolverMode::radial;
  int n = 2; ///< dimension carried by the radial Laplacian; must be 2 in cartesian2d
  double h = 0.01;
  double dt = 1e-4;
  double L = 1.0;
  double omega = 1.8;
  double tol = 1e-10;
  int max_sweeps = 20000;
  BoundarySpec boundary;
  InitSpec init;
  int snapshot_stride = 0; ///< 0 disables snapshots
  double max_time = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    require_input(h > 0.0 && dt > 0.0 && tol > 0.0, "SolverConfig: h, dt, tol must be positive");
    require_input(L > h, "SolverConfig: domain half-width must exceed h");
    require_input(omega > 1.0 && omega < 2.0, "SolverConfig: omega must lie in (1, 2)");
    require_input(max_sweeps >= 1, "SolverConfig: max_sweeps must be positive");
    require_input(max_time > 0.0, "SolverConfig: max_time must be positive");
    if (mode == SolverMode::radial) {
      require_input(n >= 1, "SolverConfig: radial mode needs n >= 1");
    } else {
      require_input(n == 2, "SolverConfig: cartesian2d mode fixes n = 2");
    }
    require_input(boundary.g0 >= 0.0, "SolverConfig: boundary.g0 must be nonnegative");
    require_input(boundary.kappa >= 0.0,
                  "SolverConfig: boundary.kappa must be nonnegative (monotone data)");
    if (boundary.kind == BoundaryKind::quadratic) {
      require_input(boundary.mu1 >= 0.0 && boundary.mu2 >= 0.0 &&
                        boundary.mu1 + boundary.mu2 > 0.0,
                    "SolverConfig: quadratic boundary needs mu1, mu2 >= 0, not both zero");
    }
    require_input(init.radius >= 0.0 && init.radius < L,
                  "SolverConfig: init.radius must lie in [0, L)");
    const double cells = (mode == SolverMode::radial ? L : 2.0 * L) / h;
    const double rounded = std::llround(cells);
    require_input(std::abs(cells - rounded) <= 1e-9 * std::max(1.0, cells) && rounded >= 4,
                  "SolverConfig: L must be an integer multiple of h (at least 4 cells)");
  }

  /// Nodes per axis minus one; radial grids cover [0, L], cartesian [-L, L]^2.
  std::int64_t cells_per_axis() const {
    return std::llround((mode == SolverMode::radial ? L : 2.0 * L) / h);
  }
};

/// Dirichlet value at spatial point x (radial: x = {r}) and time t.
inline double boundary_value(const SolverConfig& cfg, const std::vector<double>& x, double t) {
  const double ramp = cfg.boundary.kind == BoundaryKind::constant
                          ? 1.0
                          : 1.0 + cfg.boundary.kappa * t;
  switch (cfg.boundary.kind) {
    case BoundaryKind::constant:
      return cfg.boundary.g0;
    case BoundaryKind::ramp:
      return cfg.boundary.g0 * ramp;
    case BoundaryKind::quadratic:
      if (cfg.mode == SolverMode::radial) return cfg.boundary.g0 * ramp * x[0] * x[0];
      return cfg.boundary.g0 * ramp *
             (cfg.boundary.mu1 * x[0] * x[0] + cfg.boundary.mu2 * x[1] * x[1]);
  }
  return 0.0;
}

inline ScalarField initial_field(const SolverConfig& cfg) {
  cfg.validate();
  const std::int64_t M = cfg.cells_per_axis();
  auto cap_profile = [&](double r) {
    const double num = std::max(r - cfg.init.radius, 0.0);
    const double den = cfg.L - cfg.init.radius;
    return std::min(1.0, (num / den) * (num / den));
  };
  if (cfg.mode == SolverMode::radial) {
    ScalarField f({M + 1}, cfg.h, {0.0}, 0.0);
    const double g_outer = boundary_value(cfg, {cfg.L}, 0.0);
    for (std::int64_t i = 0; i <= M; ++i) {
      const double r = f.coord(0, i);
      switch (cfg.init.kind) {
        case InitKind::cap: f.at(i) = g_outer * cap_profile(r); break;
        case InitKind::positive:
          f.at(i) = std::max(boundary_value(cfg, {r}, 0.0), 0.1 * cfg.boundary.g0);
          break;
        case InitKind::zero: f.at(i) = 0.0; break;
      }
    }
    f.at(M) = g_outer;
    return f;
  }
  ScalarField f({M + 1, M + 1}, cfg.h, {-cfg.L, -cfg.L}, 0.0);
  for (std::int64_t i = 0; i <= M; ++i) {
    for (std::int64_t j = 0; j <= M; ++j) {
      const double x = f.coord(0, i), y = f.coord(1, j);
      const double r = std::hypot(x, y);
      const double g = boundary_value(cfg, {x, y}, 0.0);
      switch (cfg.init.kind) {
        case InitKind::cap: f.at(i, j) = g * cap_profile(r); break;
        case InitKind::positive: f.at(i, j) = std::max(g, 0.1 * cfg.boundary.g0); break;
        case InitKind::zero: f.at(i, j) = 0.0; break;
      }
      if (i == 0 || i == M || j == 0 || j == M) f.at(i, j) = g;
    }
  }
  return f;
}

/// Cells with u below this count as ice; sits below the scheme's O(h^2)
/// truncation error so solver noise cannot erode the contact set.
inline double contact_threshold(double h) { return 1e-3 * h * h; }

struct StepResult {
  ScalarField u;
  int sweeps = 0;
  double residual = 0.0;
};

namespace detail {

/// Projected SOR for the radial implicit-Euler LCP.  Row 0 is the symmetry
/// (ghost node) row; row M is Dirichlet and preset in u.  Sweeps are
/// lexicographic and single-threaded: the Gauss-Seidel order is part of the
/// deterministic contract.
inline StepResult psor_radial(const ScalarField& u_prev, const SolverConfig& cfg,
                              double g_new) {
  const std::int64_t M = cfg.cells_per_axis();
  const double sigma = cfg.dt / (cfg.h * cfg.h);
  const double n = cfg.n;
  StepResult out;
  out.u = u_prev;
  out.u.t = u_prev.t + cfg.dt;
  out.u.at(M) = g_new;
  std::vector<double> b(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i) b[static_cast<std::size_t>(i)] = u_prev.at(i) - cfg.dt;
  const double diag0 = 1.0 + 2.0 * n * sigma;
  const double diag = 1.0 + 2.0 * sigma;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    {
      const double target = (b[0] + 2.0 * n * sigma * out.u.at(1)) / diag0;
      out.u.at(0) = std::max(0.0, (1.0 - cfg.omega) * out.u.at(0) + cfg.omega * target);
    }
    for (std::int64_t i = 1; i < M; ++i) {
      const double drift = (n - 1.0) / (2.0 * static_cast<double>(i));
      const double cl = sigma * (1.0 - drift), cu = sigma * (1.0 + drift);
      const double target =
          (b[static_cast<std::size_t>(i)] + cl * out.u.at(i - 1) + cu * out.u.at(i + 1)) / diag;
      out.u.at(i) = std::max(0.0, (1.0 - cfg.omega) * out.u.at(i) + cfg.omega * target);
    }
    double res = 0.0;
    {
      const double row = diag0 * out.u.at(0) - 2.0 * n * sigma * out.u.at(1) - b[0];
      res = std::max(res, std::abs(std::min(out.u.at(0), row)));
    }
    for (std::int64_t i = 1; i < M; ++i) {
      const double drift = (n - 1.0) / (2.0 * static_cast<double>(i));
      const double row = diag * out.u.at(i) - sigma * (1.0 - drift) * out.u.at(i - 1) -
                         sigma * (1.0 + drift) * out.u.at(i + 1) -
                         b[static_cast<std::size_t>(i)];
      res = std::max(res, std::abs(std::min(out.u.at(i), row)));
    }
    out.sweeps = sweep;
    out.residual = res;
    if (res <= cfg.tol) return out;
  }
  require_numeric(false, "psor_radial: residual " + format17(out.residual) + " after " +
                             std::to_string(cfg.max_sweeps) + " sweeps");
  return out;
}

inline StepResult psor_cartesian(const ScalarField& u_prev, const SolverConfig& cfg,
                                 double t_new) {
  const std::int64_t M = cfg.cells_per_axis();
  const double sigma = cfg.dt / (cfg.h * cfg.h);
  StepResult out;
  out.u = u_prev;
  out.u.t = t_new;
  for (std::int64_t i = 0; i <= M; ++i) {
    for (std::int64_t j = 0; j <= M; ++j) {
      if (i == 0 || i == M || j == 0 || j == M) {
        out.u.at(i, j) =
            boundary_value(cfg, {out.u.coord(0, i), out.u.coord(1, j)}, t_new);
      }
    }
  }
  std::vector<double> b(static_cast<std::size_t>((M + 1) * (M + 1)));
  for (std::int64_t i = 1; i < M; ++i)
    for (std::int64_t j = 1; j < M; ++j)
      b[static_cast<std::size_t>(i * (M + 1) + j)] = u_prev.at(i, j) - cfg.dt;
  const double diag = 1.0 + 4.0 * sigma;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (std::int64_t i = 1; i < M; ++i) {
      for (std::int64_t j = 1; j < M; ++j) {
        const double nb = out.u.at(i - 1, j) + out.u.at(i + 1, j) + out.u.at(i, j - 1) +
                          out.u.at(i, j + 1);
        const double target = (b[static_cast<std::size_t>(i * (M + 1) + j)] + sigma * nb) / diag;
        out.u.at(i, j) = std::max(0.0, (1.0 - cfg.omega) * out.u.at(i, j) + cfg.omega * target);
      }
    }
    double res = 0.0;
    for (std::int64_t i = 1; i < M; ++i) {
      for (std::int64_t j = 1; j < M; ++j) {
        const double nb = out.u.at(i - 1, j) + out.u.at(i + 1, j) + out.u.at(i, j - 1) +
                          out.u.at(i, j + 1);
        const double row =
            diag * out.u.at(i, j) - sigma * nb - b[static_cast<std::size_t>(i * (M + 1) + j)];
        res = std::max(res, std::abs(std::min(out.u.at(i, j), row)));
      }
    }
    out.sweeps = sweep;
    out.residual = res;
    if (res <= cfg.tol) return out;
  }
  require_numeric(false, "psor_cartesian: residual " + format17(out.residual) + " after " +
                             std::to_string(cfg.max_sweeps) + " sweeps");
  return out;
}

} // namespace detail

/// One implicit-Euler step of the obstacle problem: solves the LCP
///   u >= 0,  (I - dt Lap_h) u - (u_prev - dt) >= 0,  u . ((I - dt Lap_h) u - b) = 0
/// by projected SOR, with Dirichlet data imposed at the new time on the outer
/// boundary.  Throws numeric_error with the residual if PSOR stalls.
inline StepResult step_lcp(const ScalarField& u_prev, const SolverConfig& cfg) {
  cfg.validate();
  const double t_new = u_prev.t + cfg.dt;
  if (cfg.mode == SolverMode::radial) {
    require_input(u_prev.rank() == 1 && u_prev.dims[0] == cfg.cells_per_axis() + 1,
                  "step_lcp: field does not match config grid");
    return detail::psor_radial(u_prev, cfg, boundary_value(cfg, {cfg.L}, t_new));
  }
  require_input(u_prev.rank() == 2 && u_prev.dims[0] == cfg.cells_per_axis() + 1 &&
                    u_prev.dims[1] == cfg.cells_per_axis() + 1,
                "step_lcp: field does not match config grid");
  return detail::psor_cartesian(u_prev, cfg, t_new);
}

struct ContactMetrics {
  double inradius = 0.0;
  double circumradius = 0.0;
  double volume = 0.0; ///< cell count times h^rank of the grid
  bool empty = true;
};

/**
 * Contact set = { cells with u < threshold }.  Radii are measured from the
 * anchor (default: origin) with sub-grid linear interpolation of the
 * u = threshold crossing along grid edges.  The inradius is the distance to
 * the nearest thawed point, the circumradius the distance to the farthest
 * ice point; both are zero with the empty flag set when there is no ice.
 */
inline ContactMetrics extract_contact_metrics(const ScalarField& u, double threshold,
                                              std::vector<double> anchor = {}) {
  require_input(threshold > 0.0, "extract_contact_metrics: threshold must be positive");
  if (anchor.empty()) anchor.assign(static_cast<std::size_t>(u.rank()), 0.0);
  require_input(static_cast<int>(anchor.size()) == u.rank(),
                "extract_contact_metrics: anchor rank mismatch");
  ContactMetrics m;
  auto crossing = [&](double a, double ua, double b, double ub) {
    // ua < threshold <= ub; linear interpolation of the threshold crossing.
    return a + (b - a) * (threshold - ua) / (ub - ua);
  };
  if (u.rank() == 1) {
    const std::int64_t N = u.dims[0];
    std::int64_t count = 0;
    double inr = 0.0, circ = 0.0;
    bool anchor_ice = u.at(0) < threshold && std::abs(anchor[0] - u.origin[0]) < 0.5 * u.h;
    for (std::int64_t i = 0; i < N; ++i)
      if (u.at(i) < threshold) ++count;
    if (count == 0) return m;
    m.empty = false;
    m.volume = static_cast<double>(count) * u.h;
    if (anchor_ice) {
      std::int64_t i = 0;
      while (i + 1 < N && u.at(i + 1) < threshold) ++i;
      inr = i + 1 < N ? crossing(u.coord(0, i), u.at(i), u.coord(0, i + 1), u.at(i + 1))
                      : u.coord(0, N - 1);
      inr = std::abs(inr - anchor[0]);
    }
    std::int64_t last = N - 1;
    while (last >= 0 && u.at(last) >= threshold) --last;
    circ = last + 1 < N
               ? crossing(u.coord(0, last), u.at(last), u.coord(0, last + 1), u.at(last + 1))
               : u.coord(0, N - 1);
    circ = std::abs(circ - anchor[0]);
    m.inradius = std::min(inr, circ);
    m.circumradius = std::max(inr, circ);
    return m;
  }
  require_input(u.rank() == 2, "extract_contact_metrics: rank 1 and 2 only");
  const std::int64_t R = u.dims[0], C = u.dims[1];
  auto dist_to = [&](double x, double y) { return std::hypot(x - anchor[0], y - anchor[1]); };
  std::int64_t count = 0;
  double circ = 0.0;
  double inr = 1e300;
  for (std::int64_t i = 0; i < R; ++i) {
    for (std::int64_t j = 0; j < C; ++j) {
      const double uc = u.at(i, j);
      const double x = u.coord(0, i), y = u.coord(1, j);
      if (uc < threshold) {
        ++count;
        circ = std::max(circ, dist_to(x, y));
        const std::int64_t di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const std::int64_t ii = i + di[k], jj = j + dj[k];
          if (ii < 0 || ii >= R || jj < 0 || jj >= C) continue;
          if (u.at(ii, jj) >= threshold) {
            const double f = (threshold - uc) / (u.at(ii, jj) - uc);
            const double cx = x + f * (u.coord(0, ii) - x);
            const double cy = y + f * (u.coord(1, jj) - y);
            circ = std::max(circ, dist_to(cx, cy));
            inr = std::min(inr, dist_to(cx, cy));
          }
        }
      } else {
        inr = std::min(inr, dist_to(x, y));
      }
    }
  }
  if (count == 0) return m;
  m.empty = false;
  m.volume = static_cast<double>(count) * u.h * u.h;
  // Anchor outside the ice means no ball around it fits inside.
  const double ax = (anchor[0] - u.origin[0]) / u.h, ay = (anchor[1] - u.origin[1]) / u.h;
  const std::int64_t ai = std::llround(ax), aj = std::llround(ay);
  const bool anchor_ice =
      ai >= 0 && ai < R && aj >= 0 && aj < C && u.at(ai, aj) < threshold;
  m.inradius = anchor_ice ? std::min(inr, circ) : 0.0;
  m.circumradius = circ;
  return m;
}

struct ContactSetHistory {
  std::vector<double> t;
  std::vector<double> inradius;
  std::vector<double> circumradius;
  std::vector<double> volume;
  std::optional<double> t_star;

  void push(double time, const ContactMetrics& m) {
    t.push_back(time);
    inradius.push_back(m.inradius);
    circumradius.push_back(m.circumradius);
    volume.push_back(m.volume);
  }

  void write_csv(std::ostream& os) const {
    os << "t,inradius,circumradius,volume\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      os << format17(t[i]) << "," << format17(inradius[i]) << "," << format17(circumradius[i])
         << "," << format17(volume[i]) << "\n";
    }
  }
};

/// Locates extinction inside the step (t_pre, t_pre + cfg.dt] by bisection on
/// the sub-step length, taking single implicit steps from the saved
/// pre-extinction state.  Valid because monotone data makes extinction
/// monotone in the step length.
inline double refine_extinction(const SolverConfig& cfg, const ScalarField& u_pre) {
  const double thresh = contact_threshold(cfg.h);
  double lo = 0.0, hi = cfg.dt;
  for (int it = 0; it < 50 && hi - lo > 1e-14 * cfg.dt; ++it) {
    const double mid = 0.5 * (lo + hi);
    SolverConfig probe = cfg;
    probe.dt = mid;
    const StepResult r = step_lcp(u_pre, probe);
    if (extract_contact_metrics(r.u, thresh).empty) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return u_pre.t + 0.5 * (lo + hi);
}

struct SimResult {
  std::vector<ScalarField> snapshots;
  ContactSetHistory history;
  long long total_sweeps = 0;
  int steps = 0;
};

/**
 * Advances the obstacle problem from the configured initial data until the
 * contact set empties or max_time is reached.  Contact metrics are recorded
 * every step (including t = 0); snapshots every snapshot_stride steps plus
 * the final state.  The extinction time, when reached, is refined by
 * bisection on the final sub-step.  A field max growing more than tenfold in
 * one step aborts with a diagnostic (instability detector).
 */
inline SimResult simulate(const SolverConfig& cfg) {
  cfg.validate();
  const double thresh = contact_threshold(cfg.h);
  SimResult out;
  ScalarField u = initial_field(cfg);
  const ContactMetrics m0 = extract_contact_metrics(u, thresh);
  out.history.push(0.0, m0);
  if (cfg.snapshot_stride > 0) out.snapshots.push_back(u);
  if (m0.empty) {
    // No ice at all: nothing freezes later under monotone data, so there is
    // no extinction event to time.
    return out;
  }
  const long long max_steps = std::llround(std::ceil(cfg.max_time / cfg.dt - 1e-12));
  double prev_max = *std::max_element(u.values.begin(), u.values.end());
  for (long long k = 1; k <= max_steps; ++k) {
    const ScalarField u_pre = u;
    StepResult r = step_lcp(u, cfg);
    out.total_sweeps += r.sweeps;
    ++out.steps;
    u = std::move(r.u);
    const double cur_max = *std::max_element(u.values.begin(), u.values.end());
    require_numeric(cur_max <= 10.0 * prev_max + 1e-12,
                    "simulate: field max grew more than tenfold in one step (max " +
                        format17(cur_max) + " at t " + format17(u.t) + ")");
    prev_max = cur_max;
    const ContactMetrics m = extract_contact_metrics(u, thresh);
    out.history.push(u.t, m);
    if (cfg.snapshot_stride > 0 && k % cfg.snapshot_stride == 0) out.snapshots.push_back(u);
    if (m.empty) {
      out.history.t_star = refine_extinction(cfg, u_pre);
      break;
    }
  }
  if (cfg.snapshot_stride > 0 &&
      (out.snapshots.empty() || out.snapshots.back().t != u.t)) {
    out.snapshots.push_back(u);
  }
  return out;
}

} // namespace stefan
