#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "stefanlab/core.hpp"
#include "stefanlab/errors.hpp"
#include "stefanlab/quadrature.hpp"
#include "stefanlab/rng.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

namespace detail {

/// Distance from reduced point (spine s0, transverse rho0, time t0) to the
/// lateral cone sheet { |ybar| = eta |xbar| }.  Exact: the sheet is a line
/// through the origin in the (|xbar|, |ybar|) half-plane and the optimal
/// sheet time equals t0.
inline double lateral_sheet_dist(double s0, double rho0, double eta) {
  return (rho0 - eta * s0) / std::sqrt(1.0 + eta * eta);
}

/// Squared distance from (rho0, t0) to the time sheet { |ybar| = eta |t|^(1/2) }
/// as a function of the sheet time t (spine coordinates match for free).
inline double time_sheet_sqdist_at(double rho0, double t0, double eta, double t) {
  const double gap = rho0 - eta * std::sqrt(std::abs(t));
  return gap * gap + std::abs(t - t0);
}

/// Distance from (rho0, t0) to the time sheet.  The squared distance is
/// piecewise unimodal between the kinks t = 0 and t = t0, so each segment is
/// minimized by golden section (argument tolerance 1e-13).
inline double time_sheet_dist(double rho0, double t0, double eta) {
  const double span = (rho0 / eta) * (rho0 / eta) + std::abs(t0) + 1.0;
  std::vector<double> cuts = {-span, 0.0, t0, span};
  std::sort(cuts.begin(), cuts.end());
  double best = time_sheet_sqdist_at(rho0, t0, eta, 0.0);
  auto f = [&](double t) { return time_sheet_sqdist_at(rho0, t0, eta, t); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (b <= a) continue;
    double tm = golden_minimize(f, a, b, 1e-13);
    best = std::min({best, f(tm), f(a), f(b)});
  }
  return std::sqrt(best);
}

} // namespace detail

/// Parabolic distance from an interior point to the boundary of the cone
/// domain: the minimum of the exact lateral-sheet distance and the
/// golden-section time-sheet distance.
inline double cone_boundary_dist(const ConeDomain& d, const ParaPoint& p) {
  require_input(d.contains(p), "cone_boundary_dist: point must lie inside the domain");
  const double s0 = d.spine_norm(p);
  const double rho0 = d.transverse_norm(p);
  double dist = detail::time_sheet_dist(rho0, p.t, d.eta());
  if (d.m() >= 1) dist = std::min(dist, detail::lateral_sheet_dist(s0, rho0, d.eta()));
  return dist;
}

/// Two-sided comparison between the boundary distance and the sheet margins:
///   lower = M / (1 + eta)  <=  dist  <=  upper = M,
/// where M = min(|ybar| - eta |t|^(1/2), |ybar| - eta |xbar|).
struct SandwichCheck {
  double lower = 0.0;
  double dist = 0.0;
  double upper = 0.0;
  bool ok = false;
};

inline SandwichCheck sandwich_check(const ConeDomain& d, const ParaPoint& p,
                                    double slack = 1e-9) {
  SandwichCheck out;
  const double s0 = d.spine_norm(p);
  const double rho0 = d.transverse_norm(p);
  double margin = rho0 - d.eta() * std::sqrt(std::abs(p.t));
  if (d.m() >= 1) margin = std::min(margin, rho0 - d.eta() * s0);
  out.dist = cone_boundary_dist(d, p);
  out.upper = margin;
  out.lower = margin / (1.0 + d.eta());
  out.ok = out.dist <= out.upper + slack && out.dist >= out.lower - slack;
  return out;
}

/// Time-decreasing chain of interior points whose boundary distance grows
/// geometrically; used to carry pointwise lower bounds toward the thick part
/// of the domain.
struct HarnackChain {
  std::vector<ParaPoint> points;      ///< N + 1 points, first is the start
  std::vector<double> boundary_dist;  ///< per point
  std::vector<double> radii;          ///< per step, radii[i]^2 = t_i - t_{i+1}
  int steps() const { return static_cast<int>(radii.size()); }
};

/// Cap on the chain length for a start at boundary distance delta:
/// the smallest k with 1.1^k * delta > 3/8, by direct evaluation.
inline int harnack_step_cap(double delta) {
  require_input(delta > 0.0, "harnack_step_cap: delta must be positive");
  int k = 0;
  double v = delta;
  while (v <= 0.375) {
    v *= 1.1;
    ++k;
    require_numeric(k <= 100000, "harnack_step_cap: delta too small");
  }
  return k;
}

/**
 * Builds the outward chain from p: each step moves the transverse part
 * radially out by half the boundary distance and steps time down by a
 * quarter of its square.  Stops once |ybar| >= 3/8 (the start itself may
 * already satisfy this).  Guarantees, checked by the caller's tests:
 * boundary distance grows by >= 1.1 per step, |ybar| grows by <= 1.5 per
 * step, the terminal |ybar| lies in [3/8, 9/16], and |t_N| < 0.99 for starts
 * in the backward unit cylinder scaled by 2/3.
 */
inline HarnackChain build_harnack_chain(const ConeDomain& d, const ParaPoint& start) {
  require_input(d.contains(start), "build_harnack_chain: start must lie inside the domain");
  HarnackChain chain;
  ParaPoint p = start;
  chain.points.push_back(p);
  chain.boundary_dist.push_back(cone_boundary_dist(d, p));
  const int cap = harnack_step_cap(chain.boundary_dist.front()) + 1;
  while (d.transverse_norm(chain.points.back()) < 0.375) {
    require_numeric(chain.steps() < cap,
                    "build_harnack_chain: step cap exceeded (geometric growth failed)");
    const ParaPoint& cur = chain.points.back();
    const double dist = chain.boundary_dist.back();
    const double rho = d.transverse_norm(cur);
    ParaPoint next = cur;
    const double scale = (rho + 0.5 * dist) / rho;
    for (int i = d.m(); i < d.n(); ++i) next.x[i] *= scale;
    next.t = cur.t - 0.25 * dist * dist;
    chain.radii.push_back(0.5 * dist);
    chain.points.push_back(next);
    chain.boundary_dist.push_back(cone_boundary_dist(d, next));
  }
  return chain;
}

/// Per-point outcome of the explicit four-step access chain.
struct AccessChainSample {
  ParaPoint start;
  double min_intermediate_ratio = 0.0; ///< min over i=1..4 of dist_i / delta
  double final_ratio = 0.0;            ///< dist_4 / delta
  bool ok = false;
};

/// Monte-Carlo report for the two access conditions of the cone domain.
struct AccessReport {
  // Four-step chains from delta/2-deep starts.
  int chain_samples = 0;
  int chain_violations = 0;
  double worst_intermediate_ratio = 0.0; ///< min over samples (target >= 11/20)
  double worst_final_ratio = 0.0;        ///< min over samples (target >= 1)
  // Boundary-measure condition: fraction of the parabolic boundary of
  // Q_{2 delta}(center) lying in (Omega_delta union Omega^c).
  int measure_centers = 0;
  double min_fraction = 1.0;
  double mean_fraction = 0.0;
};

namespace detail {

inline void sample_unit_vector(Rng& rng, int n, std::vector<double>& out) {
  out.resize(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = rng.normal();
      norm += out[i] * out[i];
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-12);
  for (int i = 0; i < n; ++i) out[i] /= norm;
}

/// Uniform point in the backward cylinder B_radius x (-radius^2, 0].
inline ParaPoint sample_in_cylinder(Rng& rng, int n, double radius) {
  std::vector<double> dir;
  sample_unit_vector(rng, n, dir);
  const double r = radius * std::pow(rng.uniform(), 1.0 / n);
  for (int i = 0; i < n; ++i) dir[i] *= r;
  const double t = -radius * radius * rng.uniform();
  return ParaPoint(std::move(dir), t);
}

} // namespace detail

/**
 * Samples the two access conditions of the cone domain at depth delta.
 *
 * Condition 1: from each sampled start in Omega_{delta/2} (cone depth at
 * least delta/2, inside Q_{1-delta}), the explicit four-step chain that moves
 * |ybar| out by delta/4 and time down by delta^2/16 per step keeps boundary
 * distance >= 11 delta/20 at every step and >= delta at the end.
 *
 * Condition 2: for centers sampled in Omega inside Q_{1-2 delta}, the
 * parabolic boundary of Q_{2 delta}(center) meets (Omega_delta union
 * Omega^c) in a positive measure fraction; the empirical minimum over
 * centers estimates that constant.  Depth is measured to the cone sheets;
 * the cylinder margin is guaranteed by the center restriction.
 */
inline AccessReport accessibility_check(const ConeDomain& d, double delta, int chain_samples,
                                        int measure_centers, int surface_samples,
                                        std::uint64_t seed) {
  require_input(delta > 0.0 && delta < 0.2, "accessibility_check: delta must lie in (0, 0.2)");
  require_input(chain_samples > 0 && measure_centers > 0 && surface_samples > 0,
                "accessibility_check: sample counts must be positive");
  AccessReport report;
  report.chain_samples = chain_samples;
  report.measure_centers = measure_centers;
  report.worst_intermediate_ratio = 1e300;
  report.worst_final_ratio = 1e300;

  // Condition 1: explicit four-step chains.
  std::vector<double> min_ratio(chain_samples), fin_ratio(chain_samples);
  parallel_for(chain_samples, [&](std::int64_t idx) {
    Rng rng = Rng::for_index(seed, static_cast<std::uint64_t>(idx));
    ParaPoint p(std::vector<double>(d.n(), 0.0), 0.0);
    // Rejection-sample a start with cone depth >= delta/2 inside Q_{1-delta}.
    for (int attempt = 0;; ++attempt) {
      require_numeric(attempt < 100000, "accessibility_check: start sampling failed");
      ParaPoint cand = detail::sample_in_cylinder(rng, d.n(), 1.0 - delta);
      if (!d.contains(cand)) continue;
      if (cone_boundary_dist(d, cand) < 0.5 * delta) continue;
      p = std::move(cand);
      break;
    }
    const double rho = d.transverse_norm(p);
    double worst = 1e300, last = 0.0;
    for (int i = 1; i <= 4; ++i) {
      ParaPoint q = p;
      const double scale = (rho + 0.25 * delta * i) / rho;
      for (int k = d.m(); k < d.n(); ++k) q.x[k] *= scale;
      q.t = p.t - delta * delta * i / 16.0;
      const double dist = d.contains(q) ? cone_boundary_dist(d, q) : 0.0;
      worst = std::min(worst, dist / delta);
      last = dist / delta;
    }
    min_ratio[idx] = worst;
    fin_ratio[idx] = last;
  });
  for (int i = 0; i < chain_samples; ++i) {
    report.worst_intermediate_ratio = std::min(report.worst_intermediate_ratio, min_ratio[i]);
    report.worst_final_ratio = std::min(report.worst_final_ratio, fin_ratio[i]);
    if (min_ratio[i] < 0.55 - 1e-9 || fin_ratio[i] < 1.0 - 1e-9) ++report.chain_violations;
  }

  // Condition 2: surface measure fractions.
  std::vector<double> fractions(measure_centers);
  const double R = 2.0 * delta;
  parallel_for(measure_centers, [&](std::int64_t idx) {
    Rng rng = Rng::for_index(seed ^ 0x5bd1e995u, static_cast<std::uint64_t>(idx));
    ParaPoint c(std::vector<double>(d.n(), 0.0), 0.0);
    for (int attempt = 0;; ++attempt) {
      require_numeric(attempt < 100000, "accessibility_check: center sampling failed");
      ParaPoint cand = detail::sample_in_cylinder(rng, d.n(), 1.0 - 2.0 * delta);
      if (!d.contains(cand)) continue;
      c = std::move(cand);
      break;
    }
    const double p_face = 1.0 / (1.0 + d.n() * R);
    int hits = 0;
    std::vector<double> dir;
    for (int s = 0; s < surface_samples; ++s) {
      ParaPoint q = c;
      if (rng.uniform() < p_face) {
        // Initial face: t = t_c - R^2, x uniform in the ball.
        detail::sample_unit_vector(rng, d.n(), dir);
        const double r = R * std::pow(rng.uniform(), 1.0 / d.n());
        for (int k = 0; k < d.n(); ++k) q.x[k] += r * dir[k];
        q.t = c.t - R * R;
      } else {
        // Lateral face: |x - x_c| = R, t uniform in (t_c - R^2, t_c].
        detail::sample_unit_vector(rng, d.n(), dir);
        for (int k = 0; k < d.n(); ++k) q.x[k] += R * dir[k];
        q.t = c.t - R * R * rng.uniform();
      }
      if (!d.contains(q)) {
        ++hits; // complement of Omega
      } else if (cone_boundary_dist(d, q) > delta) {
        ++hits; // delta-deep part of Omega
      }
    }
    fractions[idx] = static_cast<double>(hits) / surface_samples;
  });
  KahanSum mean;
  for (int i = 0; i < measure_centers; ++i) {
    report.min_fraction = std::min(report.min_fraction, fractions[i]);
    mean.add(fractions[i]);
  }
  report.mean_fraction = mean.value() / measure_centers;
  return report;
}

} // namespace stefan
