#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stefanlab/barriers.hpp"
#include "stefanlab/errors.hpp"
#include "stefanlab/field.hpp"
#include "stefanlab/obstacle.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

enum class RateModel { sqrtlog_2d, loglog_nd };

inline const char* to_string(RateModel m) {
  return m == RateModel::sqrtlog_2d ? "sqrtlog_2d" : "loglog_nd";
}

inline RateModel parse_rate_model(const std::string& s) {
  if (s == "sqrtlog_2d") return RateModel::sqrtlog_2d;
  if (s == "loglog_nd") return RateModel::loglog_nd;
  throw input_error("parse_rate_model: unknown model '" + s + "'");
}

/// Least-squares fit of the collapse rate in transformed coordinates:
/// y = log(lambda / sqrt(s)) against x = sqrt(|log s|) (sqrtlog_2d) or
/// x = log|log s| (loglog_nd), s = time to extinction.
struct RateFit {
  RateModel model = RateModel::sqrtlog_2d;
  std::vector<double> s; ///< kept samples, decreasing
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  double slope_se = 0.0; ///< standard error of the slope
  double s_min = 0.0;
  double s_max = 0.0;
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t N = x.size();
  KahanSum sx, sy, sxx, sxy;
  for (std::size_t i = 0; i < N; ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
    sxx.add(x[i] * x[i]);
    sxy.add(x[i] * y[i]);
  }
  const double nn = static_cast<double>(N);
  const double det = nn * sxx.value() - sx.value() * sx.value();
  require_numeric(std::abs(det) > 1e-14 * (1.0 + nn * sxx.value()),
                  "least_squares: degenerate abscissa");
  LineFit f;
  f.slope = (nn * sxy.value() - sx.value() * sy.value()) / det;
  f.intercept = (sy.value() - f.slope * sx.value()) / nn;
  KahanSum rr;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = y[i] - (f.slope * x[i] + f.intercept);
    rr.add(e * e);
  }
  f.rms = std::sqrt(rr.value() / nn);
  return f;
}

} // namespace detail

/**
 * Fits the contact-set outer radius against the time to extinction s = T* - t.
 * Window rules: samples with lambda < min_lambda are dropped (sub-grid free
 * boundaries are noise), then the last 5 resolvable steps before extinction
 * are dropped, and the fit requires >= 30 samples spanning at least two
 * decades in s.
 */
inline RateFit fit_rate(const ContactSetHistory& history, RateModel model, double t_star,
                        double min_lambda = 0.0) {
  require_input(t_star > 0.0, "fit_rate: extinction time must be positive");
  std::vector<std::pair<double, double>> keep; // (s, lambda), s decreasing
  for (std::size_t i = 0; i < history.t.size(); ++i) {
    const double s = t_star - history.t[i];
    const double lam = history.circumradius[i];
    if (s <= 0.0 || lam <= 0.0) continue;
    if (lam < min_lambda) continue;
    keep.emplace_back(s, lam);
  }
  std::sort(keep.begin(), keep.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  require_input(keep.size() > 5, "fit_rate: too few samples");
  keep.resize(keep.size() - 5);
  require_input(keep.size() >= 30, "fit_rate: too few samples in the fit window");
  require_input(keep.front().first >= 100.0 * keep.back().first,
                "fit_rate: window must span at least two decades in time to extinction");
  RateFit fit;
  fit.model = model;
  for (const auto& [s, lam] : keep) {
    const double L = std::abs(std::log(s));
    fit.s.push_back(s);
    fit.x.push_back(model == RateModel::sqrtlog_2d ? std::sqrt(L) : std::log(L));
    fit.y.push_back(std::log(lam / std::sqrt(s)));
  }
  const detail::LineFit lf = detail::least_squares(fit.x, fit.y);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.rms = lf.rms;
  const double nn = static_cast<double>(fit.x.size());
  KahanSum mx, sxx;
  for (double v : fit.x) mx.add(v);
  const double xbar = mx.value() / nn;
  for (double v : fit.x) sxx.add((v - xbar) * (v - xbar));
  fit.slope_se = fit.rms * std::sqrt(nn / ((nn - 2.0) * sxx.value()));
  fit.s_min = keep.back().first;
  fit.s_max = keep.front().first;
  return fit;
}

/**
 * Envelope inclusion report.  Ratios compare the history against the
 * unit-constant envelope shapes: outer_ratio = circumradius / outer(s) must
 * admit a finite C1 (its window maximum) and inner_ratio = inradius /
 * inner(s) a positive c1 (the window minimum).  On a finite window the
 * extremes always exist, so divergence is detected by trend: the extremal
 * ratio over the last quarter of the window (in log s) must stay within a
 * factor 2 of the extremal over the first quarter.  A shrinking-to-zero
 * inner ratio or an exploding outer ratio fails the corresponding side.
 */
struct EnvelopeReport {
  std::vector<double> s;           ///< decreasing
  std::vector<double> inner_ratio; ///< inradius / unit inner envelope
  std::vector<double> outer_ratio; ///< circumradius / unit outer envelope
  double c1 = 0.0;                 ///< fitted inner constant (window minimum)
  double C1 = 0.0;                 ///< fitted outer constant (window maximum)
  bool inner_ok = false;
  bool outer_ok = false;
  double s_min = 0.0;
  double s_max = 0.0;

  void write_csv(std::ostream& os) const {
    os << "s,inner_ratio,outer_ratio\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << format17(s[i]) << "," << format17(inner_ratio[i]) << ","
         << format17(outer_ratio[i]) << "\n";
    }
  }
};

inline EnvelopeReport check_envelope(const ContactSetHistory& history, const Envelope& env,
                                     double t_star, double min_lambda = 0.0) {
  require_input(env.law() != Envelope::Law::sqrtlog_band,
                "check_envelope: the band law has non-multiplicative constants");
  require_input(t_star > 0.0, "check_envelope: extinction time must be positive");
  const Envelope unit(env.law(), env.n(), env.delta(), 1.0, 1.0);
  EnvelopeReport rep;
  std::vector<std::size_t> order;
  std::vector<std::pair<double, std::pair<double, double>>> keep; // s -> (inr, cir)
  for (std::size_t i = 0; i < history.t.size(); ++i) {
    const double s = t_star - history.t[i];
    if (s <= 0.0 || s >= 0.5) continue;
    if (history.circumradius[i] <= 0.0) continue;
    if (history.circumradius[i] < min_lambda) continue;
    keep.push_back({s, {history.inradius[i], history.circumradius[i]}});
  }
  std::sort(keep.begin(), keep.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  require_input(keep.size() >= 8, "check_envelope: too few samples");
  for (const auto& [s, rad] : keep) {
    rep.s.push_back(s);
    rep.inner_ratio.push_back(rad.first / unit.inner(s));
    rep.outer_ratio.push_back(rad.second / unit.outer(s));
  }
  rep.s_max = rep.s.front();
  rep.s_min = rep.s.back();
  rep.c1 = *std::min_element(rep.inner_ratio.begin(), rep.inner_ratio.end());
  rep.C1 = *std::max_element(rep.outer_ratio.begin(), rep.outer_ratio.end());
  const double l_hi = std::log(rep.s_max), l_lo = std::log(rep.s_min);
  const double q1 = l_hi - 0.25 * (l_hi - l_lo); // first quarter: s above this
  const double q3 = l_lo + 0.25 * (l_hi - l_lo); // last quarter: s below this
  double in_first = std::numeric_limits<double>::infinity(), in_last = in_first;
  double out_first = 0.0, out_last = 0.0;
  for (std::size_t i = 0; i < rep.s.size(); ++i) {
    const double ls = std::log(rep.s[i]);
    if (ls >= q1) {
      in_first = std::min(in_first, rep.inner_ratio[i]);
      out_first = std::max(out_first, rep.outer_ratio[i]);
    }
    if (ls <= q3) {
      in_last = std::min(in_last, rep.inner_ratio[i]);
      out_last = std::max(out_last, rep.outer_ratio[i]);
    }
  }
  require_numeric(std::isfinite(in_first) && std::isfinite(in_last) && out_first > 0.0 &&
                      out_last > 0.0,
                  "check_envelope: empty quarter window");
  rep.inner_ok = in_last >= 0.5 * in_first;
  rep.outer_ok = out_last <= 2.0 * out_first;
  return rep;
}

/**
 * Lipschitz-to-monotonicity ratio table: for each radius r, the maximum of
 * |grad u| / max(u_t, floor) over the positivity set inside the cylinder
 * {|x - anchor| <= r} x (t_c - r^2, t_c], t_c the last snapshot time.
 * u_t is the backward difference of consecutive snapshots.  normalized
 * divides by r and multiplies by tau(2r) when a rate is supplied, so a
 * bounded normalized column means the ratio obeys C r / tau(2r).
 */
struct LipschitzTable {
  std::vector<double> r;
  std::vector<double> ratio;
  std::vector<double> normalized;
  double C = 0.0; ///< max of normalized
  bool unreliable = false;

  void write_csv(std::ostream& os) const {
    os << "r,ratio,normalized\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << format17(r[i]) << "," << format17(ratio[i]) << "," << format17(normalized[i])
         << "\n";
    }
  }
};

inline LipschitzTable lipschitz_profile(const std::vector<ScalarField>& snapshots,
                                        const std::vector<double>& anchor,
                                        const std::vector<double>& radii,
                                        const RateFunction* tau = nullptr,
                                        double floor = 1e-14) {
  require_input(snapshots.size() >= 2, "lipschitz_profile: need at least two snapshots");
  require_input(!radii.empty(), "lipschitz_profile: no radii");
  const ScalarField& last = snapshots.back();
  require_input(last.rank() == 2, "lipschitz_profile: rank-2 snapshots only");
  require_input(anchor.size() == 2, "lipschitz_profile: anchor rank mismatch");
  for (std::size_t k = 1; k < snapshots.size(); ++k) {
    require_input(snapshots[k].t > snapshots[k - 1].t,
                  "lipschitz_profile: snapshot times must increase");
    require_input(snapshots[k].size() == snapshots[k - 1].size(),
                  "lipschitz_profile: snapshot grids must match");
  }
  const double t_c = last.t;
  const double thresh = contact_threshold(last.h);
  LipschitzTable table;
  long long positive_nodes = 0, floored_nodes = 0;
  for (double r : radii) {
    require_input(r > 0.0, "lipschitz_profile: radii must be positive");
    double worst = 0.0;
    for (std::size_t k = snapshots.size() - 1; k >= 1; --k) {
      const ScalarField& u = snapshots[k];
      const ScalarField& up = snapshots[k - 1];
      // The final pair always qualifies (its time is the window's right
      // endpoint); older pairs drop out once past t_c - r^2.
      if (k + 1 < snapshots.size() && u.t <= t_c - r * r) break;
      const double dt = u.t - up.t;
      const std::int64_t R = u.dims[0], C = u.dims[1];
      for (std::int64_t i = 0; i < R; ++i) {
        const double dx = u.coord(0, i) - anchor[0];
        if (std::abs(dx) > r) continue;
        for (std::int64_t j = 0; j < C; ++j) {
          const double dy = u.coord(1, j) - anchor[1];
          if (dx * dx + dy * dy > r * r) continue;
          if (u.at(i, j) <= thresh) continue;
          ++positive_nodes;
          const std::int64_t il = std::max<std::int64_t>(i - 1, 0), ih = std::min(i + 1, R - 1);
          const std::int64_t jl = std::max<std::int64_t>(j - 1, 0), jh = std::min(j + 1, C - 1);
          const double gx = (u.at(ih, j) - u.at(il, j)) / (u.h * static_cast<double>(ih - il));
          const double gy = (u.at(i, jh) - u.at(i, jl)) / (u.h * static_cast<double>(jh - jl));
          const double ut = (u.at(i, j) - up.at(i, j)) / dt;
          if (ut < floor) ++floored_nodes;
          worst = std::max(worst, std::sqrt(gx * gx + gy * gy) / std::max(ut, floor));
        }
      }
    }
    table.r.push_back(r);
    table.ratio.push_back(worst);
    double norm = worst / r;
    if (tau != nullptr) norm *= (*tau)(std::min(2.0 * r, 0.5));
    table.normalized.push_back(norm);
    table.C = std::max(table.C, norm);
  }
  table.unreliable = positive_nodes > 0 && 2 * floored_nodes > positive_nodes;
  return table;
}

/**
 * Deep radial run by zoom cascade.  A plain run cannot resolve small times
 * to extinction (the rate fits need lambda >= 4h over two decades of s), so
 * when the contact set has shrunk to an eighth of the domain the state is
 * rebased onto a domain a quarter the size: same cell count, h and the
 * remaining dynamics rescale parabolically (dt / 16).  The Dirichlet value
 * at the new rim continues the old solution linearly in time (slope from
 * the last two steps, clamped nonnegative, expressed through the ramp
 * boundary), preserving the monotonicity that extinction refinement needs.
 */
struct CascadeResult {
  ContactSetHistory history;     ///< absolute times
  std::vector<double> sample_h;  ///< grid spacing per history row
  std::vector<int> sample_stage; ///< zoom level per history row
  int stages = 1;
  long long total_sweeps = 0;
  std::optional<double> t_star;
};

inline CascadeResult simulate_radial_cascade(SolverConfig cfg, int max_zoom = 10,
                                             long long max_stage_steps = 2000000) {
  cfg.validate();
  require_input(cfg.mode == SolverMode::radial, "simulate_radial_cascade: radial mode only");
  require_input(max_zoom >= 0 && max_zoom <= 16, "simulate_radial_cascade: max_zoom out of range");
  CascadeResult out;
  ScalarField u = initial_field(cfg);
  double t_offset = 0.0;
  int zoom = 0;
  auto record = [&](double t_abs, const ContactMetrics& m) {
    out.history.push(t_abs, m);
    out.sample_h.push_back(cfg.h);
    out.sample_stage.push_back(zoom);
  };
  {
    const ContactMetrics m0 = extract_contact_metrics(u, contact_threshold(cfg.h));
    record(0.0, m0);
    if (m0.empty) return out;
  }
  // Slow reference for the rim's time slope, refreshed every 16 steps so the
  // rebased ramp is not built from one step's worth of solver noise.
  ScalarField u_mark = u;
  for (;;) {
    long long stage_steps = 0;
    bool rebase = false;
    for (; stage_steps < max_stage_steps; ++stage_steps) {
      const ScalarField u_pre = u;
      StepResult r = step_lcp(u, cfg);
      out.total_sweeps += r.sweeps;
      if (stage_steps % 16 == 0) u_mark = u;
      u = std::move(r.u);
      const ContactMetrics m = extract_contact_metrics(u, contact_threshold(cfg.h));
      record(t_offset + u.t, m);
      if (m.empty) {
        out.t_star = t_offset + refine_extinction(cfg, u_pre);
        out.history.t_star = out.t_star;
        return out;
      }
      if (t_offset + u.t >= cfg.max_time) return out;
      if (zoom < max_zoom && m.circumradius <= cfg.L / 32.0) {
        rebase = true;
        break;
      }
    }
    require_numeric(rebase, "simulate_radial_cascade: stage step budget exhausted");
    // Rebase: halve the domain, keep the cell count.  The cut must stay far
    // outside the collapse's matching region, which in 2D reaches the heat
    // length sqrt(T*-t) >> circumradius; a 32x-ball domain keeps it covered,
    // while quartering the domain (an earlier design) amputated it and
    // visibly accelerated the measured rate.
    const double L_new = 0.5 * cfg.L;
    const double h_new = 0.5 * cfg.h;
    const double g_edge = u.sample({L_new});
    require_numeric(g_edge > 0.0, "simulate_radial_cascade: rim value vanished before rebase");
    const double slope =
        u.t > u_mark.t
            ? std::max(0.0, (g_edge - u_mark.sample({L_new})) / (u.t - u_mark.t))
            : 0.0;
    t_offset += u.t;
    ++zoom;
    ++out.stages;
    SolverConfig next = cfg;
    next.L = L_new;
    next.h = h_new;
    // dt/4 keeps dt/h^2 fixed, so PSOR sweep counts stay flat across stages.
    next.dt = cfg.dt / 4.0;
    next.boundary.kind = BoundaryKind::ramp;
    next.boundary.g0 = g_edge;
    next.boundary.kappa = slope / g_edge;
    next.max_time = cfg.max_time; // absolute cap is checked against t_offset + u.t
    // The stage starts from the resampled field, not from initial_field.
    next.init.kind = InitKind::zero;
    next.init.radius = 0.0;
    const std::int64_t M = next.cells_per_axis();
    ScalarField v({M + 1}, h_new, {0.0}, 0.0);
    for (std::int64_t i = 0; i <= M; ++i) v.at(i) = u.sample({h_new * static_cast<double>(i)});
    v.at(M) = g_edge;
    cfg = next;
    u = std::move(v);
    u_mark = u;
  }
}

/// History restricted to rows whose contact set is resolvable on the grid it
/// was computed on: circumradius >= min_cells * h(row).
inline ContactSetHistory resolvable_history(const CascadeResult& cascade, int min_cells = 4) {
  require_input(min_cells >= 1, "resolvable_history: min_cells must be >= 1");
  ContactSetHistory out;
  out.t_star = cascade.history.t_star;
  for (std::size_t i = 0; i < cascade.history.t.size(); ++i) {
    if (cascade.history.circumradius[i] <
        static_cast<double>(min_cells) * cascade.sample_h[i])
      continue;
    out.t.push_back(cascade.history.t[i]);
    out.inradius.push_back(cascade.history.inradius[i]);
    out.circumradius.push_back(cascade.history.circumradius[i]);
    out.volume.push_back(cascade.history.volume[i]);
  }
  return out;
}

} // namespace stefan
