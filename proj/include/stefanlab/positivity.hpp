#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "stefanlab/core.hpp"
#include "stefanlab/errors.hpp"
#include "stefanlab/rng.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

/**
 * Heat value at the center of the backward unit cylinder for radial Dirichlet
 * data: lateral(t) on {r = 1, t in (-1, 0]} and face(r) on {t = -1}.  Forward
 * Euler on the radial Laplacian u_rr + (n-1)/r u_r with a symmetry ghost node
 * at r = 0; dt is chosen so the march lands exactly on t = 0.
 */
inline double radial_heat_center(int n, int grid, const std::function<double(double)>& lateral,
                                 const std::function<double(double)>& face) {
  require_input(n >= 1 && grid >= 8, "radial_heat_center: need n >= 1, grid >= 8");
  const double h = 1.0 / grid;
  const long long steps = static_cast<long long>(std::ceil(1.0 / (0.2 * h * h)));
  const double dt = 1.0 / static_cast<double>(steps);
  const double sigma = dt / (h * h);
  std::vector<double> u(static_cast<std::size_t>(grid) + 1), next(u.size());
  for (int i = 0; i < grid; ++i) u[static_cast<std::size_t>(i)] = face(i * h);
  u[static_cast<std::size_t>(grid)] = lateral(-1.0);
  for (long long k = 1; k <= steps; ++k) {
    const double t_new = -1.0 + dt * static_cast<double>(k);
    next[0] = u[0] + sigma * 2.0 * n * (u[1] - u[0]);
    for (int i = 1; i < grid; ++i) {
      const double drift = (n - 1.0) / (2.0 * i);
      next[static_cast<std::size_t>(i)] =
          u[static_cast<std::size_t>(i)] +
          sigma * ((u[static_cast<std::size_t>(i) + 1] - 2.0 * u[static_cast<std::size_t>(i)] +
                    u[static_cast<std::size_t>(i) - 1]) +
                   drift * (u[static_cast<std::size_t>(i) + 1] - u[static_cast<std::size_t>(i) - 1]));
    }
    next[static_cast<std::size_t>(grid)] = lateral(t_new);
    u.swap(next);
  }
  require_numeric(all_finite(u), "radial_heat_center: solution not finite");
  return u[0];
}

struct QmpReport {
  double c0 = 0.0;
  int trials = 0;
  double theta_min = 0.0;  ///< minimum center value over trials
  double theta_mean = 0.0;
  std::vector<double> values;
};

/**
 * Empirical quantitative maximum principle on the backward unit cylinder:
 * random radial data g >= 0 occupying at least the fraction c0 of the
 * parabolic boundary with g = 1 (a lateral time band plus an initial-face
 * annulus, split at random) and g = 0 elsewhere.  Reports the minimum center
 * value over trials; positivity of that minimum is the quantitative content.
 */
inline QmpReport quantitative_max_principle_test(double c0, int trials, int n = 2,
                                                 int grid = 100, std::uint64_t seed = 1) {
  require_input(c0 > 0.0 && c0 < 1.0, "quantitative_max_principle_test: c0 must lie in (0,1)");
  require_input(trials >= 1, "quantitative_max_principle_test: trials must be positive");
  require_input(n >= 2, "quantitative_max_principle_test: n >= 2");
  QmpReport rep;
  rep.c0 = c0;
  rep.trials = trials;
  rep.values.assign(static_cast<std::size_t>(trials), 0.0);
  // Surface measures of the two boundary pieces; ball/sphere in dimension n.
  auto unit_ball_volume = [](int dim) {
    return std::pow(std::acos(-1.0), dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
  };
  const double face = unit_ball_volume(n);
  const double lateral = n * face; // sphere area times the unit time depth
  const double total = face + lateral;

  parallel_for(trials, [&](std::int64_t idx) {
    Rng rng = Rng::for_index(seed, static_cast<std::uint64_t>(idx));
    const double target = c0 * total;
    double lat_measure = std::min(lateral, rng.uniform() * target);
    double face_measure = target - lat_measure;
    if (face_measure > face) {
      lat_measure += face_measure - face;
      face_measure = face;
    }
    // Lateral band: g = 1 for t in (t0, t0 + len).
    const double len = lat_measure / lateral;
    const double t0 = len >= 1.0 ? -1.0 : -1.0 + (1.0 - len) * rng.uniform();
    // Face annulus (r0, r1) with ball-measure face_measure.
    const double cap = face_measure / face; // fraction of the unit ball
    const double r0 = cap >= 1.0 ? 0.0 : std::pow((1.0 - cap) * rng.uniform(), 1.0 / n);
    const double r1 = std::pow(std::pow(r0, n) + cap, 1.0 / n);
    auto lat_fn = [&](double t) { return (t >= t0 && t <= t0 + len) ? 1.0 : 0.0; };
    auto face_fn = [&](double r) { return (r >= r0 && r <= r1) ? 1.0 : 0.0; };
    rep.values[static_cast<std::size_t>(idx)] = radial_heat_center(n, grid, lat_fn, face_fn);
  });
  rep.theta_min = 1e300;
  KahanSum mean;
  for (double v : rep.values) {
    rep.theta_min = std::min(rep.theta_min, v);
    mean.add(v);
  }
  rep.theta_mean = mean.value() / trials;
  return rep;
}

struct PositivityResult {
  double nu = 0.0;
  double min_checked = 0.0; ///< min u over the cone domain inside Q_{1/2}
  double min_bulk = 0.0;    ///< min u over the cone domain inside Q_1
  int grid = 0;
};

namespace detail {

/// Masked forward-Euler heat solve for the m = 0 (radial) configuration:
/// u = 1 pinned on {|x| = 1/2}, u = -nu on the cylinder faces, u = 0 on the
/// moving sheet {|x| <= eta |t|^(1/2)}.
inline PositivityResult positivity_radial(int n, double eta, double nu, int grid) {
  const double h = 1.0 / grid;
  const long long steps = static_cast<long long>(std::ceil(1.0 / (0.2 * h * h)));
  const double dt = 1.0 / static_cast<double>(steps);
  const double sigma = dt / (h * h);
  const int sheet = grid / 2; // node at 1/2; grid is kept even by the caller
  std::vector<double> u(static_cast<std::size_t>(grid) + 1), next(u.size());
  auto masked = [&](int i, double t) { return i * h <= eta * std::sqrt(std::abs(t)); };
  auto apply_classes = [&](std::vector<double>& v, double t) {
    for (int i = 0; i <= grid; ++i) {
      if (i == sheet) {
        v[static_cast<std::size_t>(i)] = 1.0;
      } else if (masked(i, t)) {
        v[static_cast<std::size_t>(i)] = 0.0;
      } else if (i == grid) {
        v[static_cast<std::size_t>(i)] = -nu;
      }
    }
  };
  std::fill(u.begin(), u.end(), -nu); // initial face value
  apply_classes(u, -1.0);
  PositivityResult out;
  out.nu = nu;
  out.grid = grid;
  out.min_checked = 1e300;
  out.min_bulk = 1e300;
  for (long long k = 1; k <= steps; ++k) {
    const double t_new = -1.0 + dt * static_cast<double>(k);
    next[0] = u[0] + sigma * 2.0 * n * (u[1] - u[0]);
    for (int i = 1; i < grid; ++i) {
      const double drift = (n - 1.0) / (2.0 * i);
      next[static_cast<std::size_t>(i)] =
          u[static_cast<std::size_t>(i)] +
          sigma * ((u[static_cast<std::size_t>(i) + 1] - 2.0 * u[static_cast<std::size_t>(i)] +
                    u[static_cast<std::size_t>(i) - 1]) +
                   drift * (u[static_cast<std::size_t>(i) + 1] - u[static_cast<std::size_t>(i) - 1]));
    }
    next[static_cast<std::size_t>(grid)] = -nu;
    apply_classes(next, t_new);
    u.swap(next);
    for (int i = 1; i < grid; ++i) {
      if (i == sheet || masked(i, t_new)) continue;
      out.min_bulk = std::min(out.min_bulk, u[static_cast<std::size_t>(i)]);
      if (t_new > -0.25 && i * h < 0.5) {
        out.min_checked = std::min(out.min_checked, u[static_cast<std::size_t>(i)]);
      }
    }
  }
  require_numeric(all_finite(u), "positivity_radial: solution not finite");
  return out;
}

/// Masked forward-Euler heat solve for the m = 1 configuration in
/// axisymmetric coordinates (s, rho) with rho = |(x_2 .. x_n)|:
/// Laplacian d_ss + d_rhorho + (n-2)/rho d_rho.
inline PositivityResult positivity_axisym(int n, double eta, double nu, int grid) {
  const double h = 1.0 / grid;
  const long long steps = static_cast<long long>(std::ceil(1.0 / (0.2 * h * h)));
  const double dt = 1.0 / static_cast<double>(steps);
  const double sigma = dt / (h * h);
  const int S = 2 * grid; // s-index 0..S maps to s = -1 .. 1
  const int P = grid;     // rho-index 0..P maps to rho = 0 .. 1
  const int sheet = grid / 2;
  auto at = [P](std::vector<double>& v, int i, int j) -> double& {
    return v[static_cast<std::size_t>(i) * (P + 1) + static_cast<std::size_t>(j)];
  };
  std::vector<double> u(static_cast<std::size_t>(S + 1) * (P + 1)), next(u.size());
  auto s_of = [&](int i) { return -1.0 + i * h; };
  auto masked = [&](int i, int j, double t) {
    return j * h <= eta * std::max(std::sqrt(std::abs(t)), std::abs(s_of(i)));
  };
  auto outside = [&](int i, int j) {
    const double s = s_of(i), r = j * h;
    return s * s + r * r >= 1.0;
  };
  auto apply_classes = [&](std::vector<double>& v, double t) {
    for (int i = 0; i <= S; ++i) {
      for (int j = 0; j <= P; ++j) {
        if (j == sheet && !outside(i, j)) {
          at(v, i, j) = 1.0;
        } else if (masked(i, j, t)) {
          at(v, i, j) = 0.0;
        } else if (outside(i, j)) {
          at(v, i, j) = -nu;
        }
      }
    }
  };
  std::fill(u.begin(), u.end(), -nu);
  apply_classes(u, -1.0);
  PositivityResult out;
  out.nu = nu;
  out.grid = grid;
  out.min_checked = 1e300;
  out.min_bulk = 1e300;
  for (long long k = 1; k <= steps; ++k) {
    const double t_new = -1.0 + dt * static_cast<double>(k);
    for (int i = 1; i < S; ++i) {
      for (int j = 1; j < P; ++j) {
        const double drift = (n - 2.0) / (2.0 * j);
        at(next, i, j) = at(u, i, j) +
                         sigma * (at(u, i - 1, j) + at(u, i + 1, j) - 4.0 * at(u, i, j) +
                                  (1.0 - drift) * at(u, i, j - 1) +
                                  (1.0 + drift) * at(u, i, j + 1));
      }
    }
    for (int i = 0; i <= S; ++i) {
      at(next, i, 0) = at(u, i, 0);
      at(next, i, P) = at(u, i, P);
    }
    for (int j = 0; j <= P; ++j) {
      at(next, 0, j) = at(u, 0, j);
      at(next, S, j) = at(u, S, j);
    }
    apply_classes(next, t_new);
    u.swap(next);
    for (int i = 1; i < S; ++i) {
      for (int j = 1; j < P; ++j) {
        if (j == sheet || masked(i, j, t_new) || outside(i, j)) continue;
        const double v = at(u, i, j);
        out.min_bulk = std::min(out.min_bulk, v);
        const double s = s_of(i), r = j * h;
        if (t_new > -0.25 && s * s + r * r < 0.25) {
          out.min_checked = std::min(out.min_checked, v);
        }
      }
    }
  }
  require_numeric(all_finite(u), "positivity_axisym: solution not finite");
  return out;
}

} // namespace detail

/**
 * Worst-case solve for the almost-positivity configuration on the cone
 * domain intersected with the backward unit cylinder: caloric with u = 1
 * pinned on the sheet {|ybar| = 1/2}, u = 0 on the cone boundary, and the
 * admissible floor -nu on the cylinder's own parabolic boundary.  By
 * comparison, every admissible solution dominates this one, so
 * min_checked >= 0 certifies the property at this (n, m, eta, nu).
 * Supported reductions: m = 0 (radial in |x|) and m = 1 (axisymmetric).
 */
inline PositivityResult almost_positivity_solve(int n, int m, double eta, double nu, int grid) {
  require_input(eta > 0.0 && eta < 0.25, "almost_positivity_solve: eta must lie in (0, 1/4)");
  require_input(nu >= 0.0, "almost_positivity_solve: nu must be nonnegative");
  require_input(grid >= 16 && grid % 2 == 0, "almost_positivity_solve: grid must be even, >= 16");
  if (m == 0) {
    require_input(n >= 2, "almost_positivity_solve: m = 0 needs n >= 2");
    return detail::positivity_radial(n, eta, nu, grid);
  }
  require_input(m == 1 && n >= 3, "almost_positivity_solve: supported cases are m = 0 and m = 1, n >= 3");
  return detail::positivity_axisym(n, eta, nu, grid);
}

/// Largest candidate floor (candidates tried in descending order) whose
/// worst-case solve stays above the margin on the checked region.
inline std::optional<double> calibrate_nu(int n, int m, double eta, int grid,
                                          std::vector<double> candidates,
                                          double margin = 1e-6) {
  std::sort(candidates.rbegin(), candidates.rend());
  for (double nu : candidates) {
    require_input(nu >= 0.0, "calibrate_nu: candidates must be nonnegative");
    if (almost_positivity_solve(n, m, eta, nu, grid).min_checked >= margin) return nu;
  }
  return std::nullopt;
}

} // namespace stefan
