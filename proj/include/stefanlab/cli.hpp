#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stefanlab/barriers.hpp"
#include "stefanlab/config.hpp"
#include "stefanlab/core.hpp"
#include "stefanlab/errors.hpp"
#include "stefanlab/field.hpp"
#include "stefanlab/frequency.hpp"
#include "stefanlab/geometry.hpp"
#include "stefanlab/manifest.hpp"
#include "stefanlab/obstacle.hpp"
#include "stefanlab/quadrature.hpp"
#include "stefanlab/rates.hpp"
#include "stefanlab/rng.hpp"
#include "stefanlab/spectra.hpp"
#include "stefanlab/util.hpp"
#include "stefanlab/version.hpp"

namespace stefan {
namespace cli {

namespace fs = std::filesystem;

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      require_input(used == item.size(), "trailing characters in list item '" + item + "'");
    } catch (const input_error&) {
      throw;
    } catch (const std::exception&) {
      throw input_error("expected a number in list, got '" + item + "'");
    }
  }
  require_input(!out.empty(), "empty number list");
  return out;
}

inline std::string joined_command(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require_input(!ec, "cannot create output directory '" + dir + "': " + ec.message());
}

inline std::ofstream open_out(const std::string& dir, const std::string& rel) {
  std::ofstream f(dir + "/" + rel);
  require_input(f.good(), "cannot write '" + dir + "/" + rel + "'");
  return f;
}

inline ContactSetHistory read_history_csv(const std::string& path) {
  std::ifstream f(path);
  require_input(f.good(), "cannot open history '" + path + "'");
  std::string line;
  require_input(static_cast<bool>(std::getline(f, line)), "empty history file '" + path + "'");
  require_input(line == "t,inradius,circumradius,volume",
                "history '" + path + "': unexpected header '" + line + "'");
  ContactSetHistory h;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<double> v = parse_list(line);
    require_input(v.size() == 4,
                  "history '" + path + "' line " + std::to_string(lineno) + ": expected 4 columns");
    h.t.push_back(v[0]);
    h.inradius.push_back(v[1]);
    h.circumradius.push_back(v[2]);
    h.volume.push_back(v[3]);
  }
  require_input(!h.t.empty(), "history '" + path + "' has no rows");
  return h;
}

/// t_star from an explicit value or, for "auto", from manifest.json next to
/// the history file.
inline double resolve_tstar(const std::string& spec, const std::string& history_path) {
  if (spec != "auto") {
    try {
      return std::stod(spec);
    } catch (const std::exception&) {
      throw input_error("--tstar expects a number or 'auto', got '" + spec + "'");
    }
  }
  const fs::path dir = fs::path(history_path).parent_path();
  const fs::path mf = dir / "manifest.json";
  require_input(fs::exists(mf),
                "--tstar auto needs " + mf.string() + " next to the history file");
  const RunManifest m = RunManifest::load(mf.string());
  const auto it = m.scalars.find("t_star");
  require_input(it != m.scalars.end(), "manifest " + mf.string() + " records no t_star");
  return it->second;
}

struct SimulateArgs {
  std::string config_path;
  std::string out = "out-simulate";
  int zoom = 0;
};

inline void cmd_simulate(const SimulateArgs& a, const std::string& cmdline) {
  const SolverConfig cfg = load_solver_config(a.config_path);
  ensure_dir(a.out);
  RunManifest man;
  man.command = cmdline;
  man.config = config_echo(cfg);
  man.seed = cfg.seed;
  PhaseTimer timer;
  {
    auto f = open_out(a.out, "config.cfg");
    save_solver_config(cfg, f);
  }
  if (a.zoom > 0) {
    require_input(cfg.mode == SolverMode::radial, "--zoom applies to radial mode only");
    timer.start("cascade");
    const CascadeResult cas = simulate_radial_cascade(cfg, a.zoom);
    timer.stop();
    {
      auto f = open_out(a.out, "history.csv");
      cas.history.write_csv(f);
    }
    {
      auto f = open_out(a.out, "cascade.csv");
      f << "t,inradius,circumradius,volume,h,stage\n";
      for (std::size_t i = 0; i < cas.history.t.size(); ++i) {
        f << format17(cas.history.t[i]) << "," << format17(cas.history.inradius[i]) << ","
          << format17(cas.history.circumradius[i]) << "," << format17(cas.history.volume[i])
          << "," << format17(cas.sample_h[i]) << "," << cas.sample_stage[i] << "\n";
      }
    }
    man.scalars["stages"] = cas.stages;
    man.scalars["total_sweeps"] = static_cast<double>(cas.total_sweeps);
    man.flags["extinct"] = cas.t_star.has_value();
    if (cas.t_star) man.scalars["t_star"] = *cas.t_star;
    man.timings = timer.phases();
    man.add_output(a.out, "config.cfg");
    man.add_output(a.out, "history.csv");
    man.add_output(a.out, "cascade.csv");
  } else {
    timer.start("simulate");
    const SimResult sim = simulate(cfg);
    timer.stop();
    {
      auto f = open_out(a.out, "history.csv");
      sim.history.write_csv(f);
    }
    man.scalars["steps"] = sim.steps;
    man.scalars["total_sweeps"] = static_cast<double>(sim.total_sweeps);
    man.flags["extinct"] = sim.history.t_star.has_value();
    if (sim.history.t_star) man.scalars["t_star"] = *sim.history.t_star;
    man.timings = timer.phases();
    man.add_output(a.out, "config.cfg");
    man.add_output(a.out, "history.csv");
    for (std::size_t k = 0; k < sim.snapshots.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "snapshot_%04zu.bin", k);
      write_field_binary(sim.snapshots[k], a.out + "/" + name);
      man.add_output(a.out, name);
    }
  }
  man.save(a.out + "/manifest.json");
  if (man.scalars.count("t_star"))
    std::cout << "t_star = " << format17(man.scalars["t_star"]) << "\n";
  else
    std::cout << "no extinction before max_time\n";
}

struct EigenArgs {
  int n = 2;
  double eta = 0.1;
  double R = 36.0;
  int N = 2000;
  std::string out = "out-eigen";
};

inline void cmd_eigen(const EigenArgs& a, const std::string& cmdline) {
  ensure_dir(a.out);
  PhaseTimer timer;
  timer.start("eigen");
  const OuEigen e = ou_radial_eigen(a.n, a.eta, a.R, a.N);
  timer.stop();
  {
    auto f = open_out(a.out, "eigen.csv");
    f << "r,phi\n";
    for (std::size_t i = 0; i < e.r.size(); ++i)
      f << format17(e.r[i]) << "," << format17(e.phi[i]) << "\n";
  }
  RunManifest man;
  man.command = cmdline;
  man.timings = timer.phases();
  man.scalars["eps"] = e.eps;
  man.scalars["eps_log_scaled"] = e.eps * std::abs(std::log(a.eta));
  man.add_output(a.out, "eigen.csv");
  man.save(a.out + "/manifest.json");
  std::cout << "eps = " << format17(e.eps) << "\n";
}

struct CompetitorArgs {
  int n = 3;
  int m = 1;
  std::string eta_list = "0.1,0.05,0.02";
  long long mc_samples = 20000;
  std::uint64_t seed = 1;
  std::string out = "out-competitor";
};

inline void cmd_competitor(const CompetitorArgs& a, const std::string& cmdline) {
  ensure_dir(a.out);
  const std::vector<double> etas = parse_list(a.eta_list);
  PhaseTimer timer;
  timer.start("competitor");
  auto f = open_out(a.out, "competitor.csv");
  f << "eta,eps,eps_ub,eps_ub_log_scaled,eps_ub_pow_scaled,eps_ub_mc\n";
  for (double eta : etas) {
    const CompetitorBound b = competitor_bound(a.n, a.m, eta);
    double eps = std::numeric_limits<double>::quiet_NaN();
    if (a.m == 0) eps = ou_radial_eigen(a.n, eta, 36.0, 2000).eps;
    double mc = std::numeric_limits<double>::quiet_NaN();
    if (a.mc_samples > 0) mc = competitor_bound_mc(a.n, a.m, eta, a.mc_samples, a.seed).eps_ub;
    f << format17(eta) << "," << format17(eps) << "," << format17(b.eps_ub) << ","
      << format17(b.eps_ub * std::abs(std::log(eta))) << ","
      << format17(b.eps_ub * std::pow(eta, -(a.n - a.m - 2))) << "," << format17(mc) << "\n";
  }
  f.close();
  timer.stop();
  RunManifest man;
  man.command = cmdline;
  man.seed = a.seed;
  man.timings = timer.phases();
  man.add_output(a.out, "competitor.csv");
  man.save(a.out + "/manifest.json");
  std::cout << "wrote " << a.out << "/competitor.csv\n";
}

struct FreqArgs {
  std::string input;
  std::string p2 = "isotropic";
  std::string radii; ///< optional filter, comma list
  std::string anchor = "0,0";
  double tstar = -1.0;
  bool no_cutoff = false;
  int min_radius_cells = 4;
  std::string out = "out-freq";
};

inline BlowupPolynomial load_p2(const std::string& spec, int n) {
  if (spec == "isotropic") return BlowupPolynomial::isotropic(n);
  std::ifstream f(spec);
  require_input(f.good(), "cannot open p2 matrix file '" + spec + "'");
  std::vector<double> vals;
  double v;
  while (f >> v) vals.push_back(v);
  require_input(static_cast<int>(vals.size()) == n * n,
                "p2 matrix file '" + spec + "' must hold " + std::to_string(n * n) + " numbers");
  return BlowupPolynomial(std::move(vals), n);
}

inline void cmd_freq(const FreqArgs& a, const std::string& cmdline) {
  require_input(a.tstar > 0.0, "--tstar must be given (positive)");
  require_input(fs::is_directory(a.input), "--input must be a snapshot directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(a.input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin")
      paths.push_back(entry.path().string());
  }
  require_input(!paths.empty(), "no .bin snapshots under '" + a.input + "'");
  std::sort(paths.begin(), paths.end());
  std::vector<ScalarField> snaps;
  for (const auto& p : paths) snaps.push_back(read_field_binary(p));
  // Optional radius filter: keep snapshots within 10% of a requested radius.
  if (!a.radii.empty()) {
    const std::vector<double> want = parse_list(a.radii);
    std::vector<ScalarField> kept;
    for (auto& s : snaps) {
      const double gap = a.tstar - s.t;
      if (gap <= 0.0) continue;
      const double r = std::sqrt(gap);
      for (double wr : want) {
        if (std::abs(r - wr) <= 0.1 * wr) {
          kept.push_back(std::move(s));
          break;
        }
      }
    }
    require_input(!kept.empty(), "--radii filter kept no snapshots");
    snaps = std::move(kept);
  }
  const std::vector<double> anchor = parse_list(a.anchor);
  require_input(anchor.size() == 2, "--anchor expects x,y");
  const BlowupPolynomial p2 = load_p2(a.p2, 2);
  ensure_dir(a.out);
  PhaseTimer timer;
  timer.start("frequency");
  const LambdaStarEstimate est =
      estimate_lambda_star(snaps, a.tstar, anchor, p2, a.min_radius_cells, !a.no_cutoff);
  timer.stop();
  {
    auto f = open_out(a.out, "freq.csv");
    est.curve.write_csv(f);
  }
  RunManifest man;
  man.command = cmdline;
  man.timings = timer.phases();
  man.scalars["lambda_star"] = est.lambda_star;
  man.flags["nonmonotone_tail"] = est.nonmonotone_tail;
  man.add_output(a.out, "freq.csv");
  man.save(a.out + "/manifest.json");
  std::cout << "lambda_star = " << format17(est.lambda_star) << "\n";
}

struct RatesFitArgs {
  std::string history;
  std::string model = "sqrtlog_2d";
  std::string tstar = "auto";
  double min_lambda = 0.0;
  std::string out = "out-rates-fit";
};

inline void cmd_rates_fit(const RatesFitArgs& a, const std::string& cmdline) {
  const ContactSetHistory h = read_history_csv(a.history);
  const double ts = resolve_tstar(a.tstar, a.history);
  const RateModel model = parse_rate_model(a.model);
  ensure_dir(a.out);
  PhaseTimer timer;
  timer.start("fit");
  const RateFit fit = fit_rate(h, model, ts, a.min_lambda);
  timer.stop();
  {
    auto f = open_out(a.out, "fit.csv");
    f << "s,x,y\n";
    for (std::size_t i = 0; i < fit.s.size(); ++i)
      f << format17(fit.s[i]) << "," << format17(fit.x[i]) << "," << format17(fit.y[i]) << "\n";
  }
  RunManifest man;
  man.command = cmdline;
  man.timings = timer.phases();
  man.scalars["slope"] = fit.slope;
  man.scalars["intercept"] = fit.intercept;
  man.scalars["rms"] = fit.rms;
  man.scalars["slope_se"] = fit.slope_se;
  man.scalars["ci95_lo"] = fit.slope - 1.96 * fit.slope_se;
  man.scalars["ci95_hi"] = fit.slope + 1.96 * fit.slope_se;
  man.scalars["s_min"] = fit.s_min;
  man.scalars["s_max"] = fit.s_max;
  man.scalars["samples"] = static_cast<double>(fit.s.size());
  man.scalars["t_star"] = ts;
  man.add_output(a.out, "fit.csv");
  man.save(a.out + "/manifest.json");
  std::cout << "slope = " << format17(fit.slope) << " +- " << format17(1.96 * fit.slope_se)
            << "\n";
}

struct RatesCheckArgs {
  std::string history;
  std::string theorem = "1.1";
  double delta = 0.1;
  int n = 2;
  std::string tstar = "auto";
  double min_lambda = 0.0;
  std::string out = "out-rates-check";
};

inline void cmd_rates_check(const RatesCheckArgs& a, const std::string& cmdline) {
  const ContactSetHistory h = read_history_csv(a.history);
  const double ts = resolve_tstar(a.tstar, a.history);
  const Envelope env(Envelope::parse_law(a.theorem), a.n, a.delta);
  ensure_dir(a.out);
  PhaseTimer timer;
  timer.start("check");
  const EnvelopeReport rep = check_envelope(h, env, ts, a.min_lambda);
  timer.stop();
  {
    auto f = open_out(a.out, "envelope_report.csv");
    rep.write_csv(f);
  }
  RunManifest man;
  man.command = cmdline;
  man.timings = timer.phases();
  man.scalars["c1"] = rep.c1;
  man.scalars["C1"] = rep.C1;
  man.scalars["s_min"] = rep.s_min;
  man.scalars["s_max"] = rep.s_max;
  man.flags["inner_ok"] = rep.inner_ok;
  man.flags["outer_ok"] = rep.outer_ok;
  man.add_output(a.out, "envelope_report.csv");
  man.save(a.out + "/manifest.json");
  std::cout << (rep.inner_ok && rep.outer_ok ? "inclusion holds" : "inclusion FAILS")
            << " (c1 = " << format17(rep.c1) << ", C1 = " << format17(rep.C1) << ")\n";
}

struct RatesEnvelopeArgs {
  std::string theorem = "1.1";
  double delta = 0.1;
  int n = 2;
  double c1 = 1.0;
  double C1 = 1.0;
  std::string t_grid = "1e-8,0.4,200";
  std::string out = "out-rates-envelope";
};

inline void cmd_rates_envelope(const RatesEnvelopeArgs& a, const std::string& cmdline) {
  const std::vector<double> g = parse_list(a.t_grid);
  require_input(g.size() == 3 && g[0] > 0.0 && g[1] > g[0] && g[2] >= 2.0,
                "--t-grid expects lo,hi,count with 0 < lo < hi and count >= 2");
  const Envelope env(Envelope::parse_law(a.theorem), a.n, a.delta, a.c1, a.C1);
  ensure_dir(a.out);
  auto f = open_out(a.out, "envelope.csv");
  f << "t,inner,outer\n";
  const int count = static_cast<int>(g[2]);
  for (int i = 0; i < count; ++i) {
    const double lt = std::log(g[0]) + (std::log(g[1]) - std::log(g[0])) * i / (count - 1);
    const double t = std::exp(lt);
    f << format17(t) << "," << format17(env.inner(t)) << "," << format17(env.outer(t)) << "\n";
  }
  f.close();
  RunManifest man;
  man.command = cmdline;
  man.add_output(a.out, "envelope.csv");
  man.save(a.out + "/manifest.json");
  std::cout << "wrote " << a.out << "/envelope.csv\n";
}

struct GeomArgs {
  int n = 3;
  int m = 1;
  double eta = 0.1;
  long long samples = 10000;
  std::uint64_t seed = 1;
  std::string out = "out-geom";
};

inline void cmd_geom_sandwich(const GeomArgs& a, const std::string& cmdline) {
  const ConeDomain cone(a.n, a.m, a.eta);
  ensure_dir(a.out);
  PhaseTimer timer;
  timer.start("sandwich");
  auto f = open_out(a.out, "sandwich.csv");
  for (int i = 0; i < a.n; ++i) f << "x" << i << ",";
  f << "t,lower,dist,upper,ok\n";
  long long violations = 0;
  ParaPoint p(std::vector<double>(static_cast<std::size_t>(a.n), 0.0), 0.0);
  for (long long k = 0; k < a.samples; ++k) {
    Rng rng = Rng::for_index(a.seed, static_cast<std::uint64_t>(k));
    for (;;) {
      double sq = 0.0;
      for (int i = 0; i < a.n; ++i) {
        p.x[static_cast<std::size_t>(i)] = 2.0 * rng.uniform() - 1.0;
        sq += p.x[static_cast<std::size_t>(i)] * p.x[static_cast<std::size_t>(i)];
      }
      p.t = -rng.uniform();
      if (sq < 1.0 && p.t < 0.0 && cone.contains(p)) break;
    }
    const SandwichCheck chk = sandwich_check(cone, p);
    if (!chk.ok) ++violations;
    for (int i = 0; i < a.n; ++i) f << format17(p.x[static_cast<std::size_t>(i)]) << ",";
    f << format17(p.t) << "," << format17(chk.lower) << "," << format17(chk.dist) << ","
      << format17(chk.upper) << "," << (chk.ok ? 1 : 0) << "\n";
  }
  f.close();
  timer.stop();
  RunManifest man;
  man.command = cmdline;
  man.seed = a.seed;
  man.timings = timer.phases();
  man.scalars["violations"] = static_cast<double>(violations);
  man.flags["all_ok"] = violations == 0;
  man.add_output(a.out, "sandwich.csv");
  man.save(a.out + "/manifest.json");
  std::cout << (violations == 0 ? "sandwich holds" : "sandwich VIOLATED") << " on "
            << a.samples << " samples\n";
  require_numeric(violations == 0, "sandwich inequality violated");
}

inline void cmd_selfcheck() {
  auto ok = [](const std::string& name) { std::cout << "ok: " << name << "\n"; };

  require_numeric(std::abs(f_eta(2, 0.25, 0.5) - 0.5) < 1e-15, "selfcheck: f_eta log profile");
  require_numeric(std::abs(f_eta(3, 0.25, 0.5) - 2.0 / 3.0) < 1e-15,
                  "selfcheck: f_eta capacitary profile");
  ok("comparison profile closed forms");

  {
    const QuadRule gh = gauss_hermite(40);
    double mass1d = 0.0;
    for (double w : gh.weights) mass1d += w;
    const double mass = mass1d * mass1d / std::acos(-1.0); // n = 2 kernel mass
    require_numeric(std::abs(mass - 1.0) < 1e-10, "selfcheck: kernel mass");
    ok("gaussian kernel mass");
  }

  {
    Rng rng(12345);
    for (int k = 0; k < 200; ++k) {
      auto rnd = [&] {
        ParaPoint q(std::vector<double>{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1},
                    -rng.uniform());
        return q;
      };
      const ParaPoint A = rnd(), B = rnd(), C = rnd();
      const double ab = para_dist(A, B), ba = para_dist(B, A);
      require_numeric(std::abs(ab - ba) < 1e-14, "selfcheck: para_dist symmetry");
      require_numeric(para_dist(A, C) <= ab + para_dist(B, C) + 1e-12,
                      "selfcheck: para_dist triangle inequality");
    }
    ok("parabolic distance axioms");
  }

  {
    SolverConfig cfg;
    cfg.mode = SolverMode::radial;
    cfg.n = 1;
    cfg.h = 1.0 / 64.0;
    cfg.dt = 0.01;
    cfg.L = 1.0;
    cfg.boundary.kind = BoundaryKind::constant;
    cfg.boundary.g0 = 0.125;
    cfg.init.kind = InitKind::zero;
    cfg.max_time = 3.0;
    ScalarField u = initial_field(cfg);
    for (int k = 0; k < 300; ++k) u = step_lcp(u, cfg).u;
    const ContactMetrics m = extract_contact_metrics(u, contact_threshold(cfg.h));
    require_numeric(!m.empty && std::abs(m.circumradius - 0.5) <= 2.0 * cfg.h,
                    "selfcheck: slab free boundary off target");
    ok("slab obstacle benchmark");
  }

  {
    auto w = [](const std::vector<double>& x, double) { return x[0]; };
    auto gw = [](const std::vector<double>& x, double) {
      return std::vector<double>{1.0, 0.0 * x[1]};
    };
    const FrequencyPoint pt = frequency_closed_form(2, 0.125, w, gw);
    require_numeric(std::abs(pt.phi - 1.0) < 1e-6, "selfcheck: linear profile frequency");
    ok("frequency of a linear profile");
  }

  {
    const Envelope env(Envelope::Law::sqrtlog, 2, 0.1);
    for (double t = 1e-8; t < 0.4; t *= 3.0)
      require_numeric(env.inner(t) < env.outer(t), "selfcheck: envelope ordering");
    ok("envelope ordering");
  }

  {
    const std::vector<double> rad = dyadic_radii(0.3, 6);
    for (std::size_t k = 0; k + 1 < rad.size(); ++k)
      require_numeric(std::abs(rad[k + 1] - rad[k] * rad[k] / (2.0 * 0.3)) < 1e-15,
                      "selfcheck: dyadic radius squaring identity");
    ok("dyadic radius ladder");
  }

  {
    ScalarField f({3, 4}, 0.25, {-0.25, -0.5}, -0.125);
    for (std::int64_t i = 0; i < 12; ++i) f.values[static_cast<std::size_t>(i)] = std::sqrt(2.0) * i;
    std::stringstream buf;
    write_field_binary(f, buf);
    const ScalarField g = read_field_binary(buf);
    require_numeric(g.dims == f.dims && g.h == f.h && g.origin == f.origin && g.t == f.t &&
                        g.values == f.values,
                    "selfcheck: field binary round trip");
    ok("field binary round trip");
  }

  {
    RunManifest m;
    m.command = "selfcheck";
    m.seed = 7;
    m.timings = {{"phase", 0.25}};
    m.flags["demo"] = true;
    m.scalars["value"] = 1.0 / 3.0;
    const RunManifest back = RunManifest::from_json(m.to_json());
    require_numeric(back == m, "selfcheck: manifest round trip");
    ok("manifest json round trip");
  }

  std::cout << "selfcheck passed (9 checks)\n";
}

struct ReportArgs {
  std::string run_dir;
  std::string out; ///< default: run_dir + "/report"
};

inline void cmd_report(const ReportArgs& a, const std::string& cmdline) {
  require_input(fs::is_directory(a.run_dir), "--run-dir must be a directory");
  const std::string out = a.out.empty() ? a.run_dir + "/report" : a.out;
  std::vector<fs::path> manifests;
  for (auto it = fs::recursive_directory_iterator(a.run_dir); it != fs::recursive_directory_iterator(); ++it) {
    const fs::path rel = fs::relative(it->path(), a.run_dir);
    if (!rel.empty() && rel.begin()->string() == "report") {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().filename() == "manifest.json")
      manifests.push_back(it->path());
  }
  require_input(!manifests.empty(), "no manifest.json under '" + a.run_dir + "'");
  std::sort(manifests.begin(), manifests.end());
  ensure_dir(out);
  nlohmann::json bundle = nlohmann::json::array();
  auto csv = open_out(out, "report.csv");
  csv << "manifest,command,version,seed,outputs,total_seconds,verified\n";
  for (const auto& mp : manifests) {
    const RunManifest m = RunManifest::load(mp.string());
    bool verified = true;
    for (const auto& o : m.outputs) {
      const fs::path full = mp.parent_path() / o.path;
      if (!fs::exists(full) || fnv1a_file(full.string()) != o.checksum) {
        verified = false;
        break;
      }
    }
    double total = 0.0;
    for (const auto& [_, sec] : m.timings) total += sec;
    nlohmann::json j = m.to_json();
    j["manifest_path"] = fs::relative(mp, a.run_dir).string();
    j["verified"] = verified;
    bundle.push_back(std::move(j));
    csv << fs::relative(mp, a.run_dir).string() << "," << "\"" << m.command << "\"" << ","
        << m.version << "," << m.seed << "," << m.outputs.size() << "," << format17(total) << ","
        << (verified ? 1 : 0) << "\n";
  }
  csv.close();
  {
    auto f = open_out(out, "report.json");
    f << bundle.dump(2) << "\n";
  }
  RunManifest man;
  man.command = cmdline;
  man.add_output(out, "report.csv");
  man.add_output(out, "report.json");
  man.save(out + "/manifest.json");
  std::cout << "aggregated " << manifests.size() << " manifests into " << out << "\n";
}

} // namespace cli

/// Entry point behind main(): builds the command tree, dispatches, maps
/// errors to exit codes (0 success, 2 input/validation, 3 numeric failure).
inline int run(int argc, char** argv) {
  CLI::App app{"numerical laboratory for obstacle-problem collapse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version_string));
  const std::string cmdline = cli::joined_command(argc, argv);

  cli::SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "advance the obstacle problem to extinction");
  c_sim->add_option("--config", sim.config_path, "flat key = value config file")->required();
  c_sim->add_option("--out", sim.out, "output directory");
  c_sim->add_option("--zoom", sim.zoom, "radial zoom cascade stages (0 = plain run)");
  c_sim->callback([&] { cli::cmd_simulate(sim, cmdline); });

  cli::EigenArgs eig;
  CLI::App* c_eig = app.add_subcommand("eigen", "principal Dirichlet eigenvalue on the cone complement");
  c_eig->add_option("--n", eig.n, "dimension")->required();
  c_eig->add_option("--eta", eig.eta, "cone aperture")->required();
  c_eig->add_option("--R", eig.R, "truncation radius");
  c_eig->add_option("--N", eig.N, "grid intervals");
  c_eig->add_option("--out", eig.out, "output directory");
  c_eig->callback([&] { cli::cmd_eigen(eig, cmdline); });

  cli::CompetitorArgs comp;
  CLI::App* c_comp = app.add_subcommand("competitor", "variational upper bounds for the eigenvalue");
  c_comp->add_option("--n", comp.n, "dimension")->required();
  c_comp->add_option("--m", comp.m, "spine dimension")->required();
  c_comp->add_option("--eta-list", comp.eta_list, "comma list of apertures");
  c_comp->add_option("--mc-samples", comp.mc_samples, "Monte Carlo cross-check samples (0 = off)");
  c_comp->add_option("--seed", comp.seed, "RNG seed");
  c_comp->add_option("--out", comp.out, "output directory");
  c_comp->callback([&] { cli::cmd_competitor(comp, cmdline); });

  cli::FreqArgs freq;
  CLI::App* c_freq = app.add_subcommand("freq", "frequency curve from solver snapshots");
  c_freq->add_option("--input", freq.input, "snapshot directory (*.bin)")->required();
  c_freq->add_option("--p2", freq.p2, "blow-up matrix file or 'isotropic'");
  c_freq->add_option("--radii", freq.radii, "comma list filter of radii");
  c_freq->add_option("--anchor", freq.anchor, "singular point x,y");
  c_freq->add_option("--tstar", freq.tstar, "extinction time")->required();
  c_freq->add_flag("--no-cutoff", freq.no_cutoff, "skip the spatial cutoff");
  c_freq->add_option("--min-radius-cells", freq.min_radius_cells, "radius trust floor in cells");
  c_freq->add_option("--out", freq.out, "output directory");
  c_freq->callback([&] { cli::cmd_freq(freq, cmdline); });

  CLI::App* c_rates = app.add_subcommand("rates", "extinction-rate fits and envelope checks");
  c_rates->require_subcommand(1);

  cli::RatesFitArgs rfit;
  CLI::App* c_rfit = c_rates->add_subcommand("fit", "fit a rate model to a contact history");
  c_rfit->add_option("--history", rfit.history, "history CSV")->required();
  c_rfit->add_option("--model", rfit.model, "sqrtlog_2d | loglog_nd");
  c_rfit->add_option("--tstar", rfit.tstar, "extinction time or 'auto'");
  c_rfit->add_option("--min-lambda", rfit.min_lambda, "drop samples with smaller radius");
  c_rfit->add_option("--out", rfit.out, "output directory");
  c_rfit->callback([&] { cli::cmd_rates_fit(rfit, cmdline); });

  cli::RatesCheckArgs rchk;
  CLI::App* c_rchk = c_rates->add_subcommand("check", "envelope inclusion report");
  c_rchk->add_option("--history", rchk.history, "history CSV")->required();
  c_rchk->add_option("--theorem", rchk.theorem, "envelope law selector");
  c_rchk->add_option("--delta", rchk.delta, "envelope widening exponent");
  c_rchk->add_option("--n", rchk.n, "dimension");
  c_rchk->add_option("--tstar", rchk.tstar, "extinction time or 'auto'");
  c_rchk->add_option("--min-lambda", rchk.min_lambda, "drop samples with smaller radius");
  c_rchk->add_option("--out", rchk.out, "output directory");
  c_rchk->callback([&] { cli::cmd_rates_check(rchk, cmdline); });

  cli::RatesEnvelopeArgs renv;
  CLI::App* c_renv = c_rates->add_subcommand("envelope", "sample envelope curves on a time grid");
  c_renv->add_option("--theorem", renv.theorem, "envelope law selector");
  c_renv->add_option("--delta", renv.delta, "envelope widening exponent");
  c_renv->add_option("--n", renv.n, "dimension");
  c_renv->add_option("--c1", renv.c1, "inner constant");
  c_renv->add_option("--C1", renv.C1, "outer constant");
  c_renv->add_option("--t-grid", renv.t_grid, "lo,hi,count (log spaced)");
  c_renv->add_option("--out", renv.out, "output directory");
  c_renv->callback([&] { cli::cmd_rates_envelope(renv, cmdline); });

  CLI::App* c_geom = app.add_subcommand("geom", "cone geometry checks");
  c_geom->require_subcommand(1);

  cli::GeomArgs geo;
  CLI::App* c_sand = c_geom->add_subcommand("check-sandwich", "distance sandwich on random points");
  c_sand->add_option("--n", geo.n, "dimension")->required();
  c_sand->add_option("--m", geo.m, "spine dimension")->required();
  c_sand->add_option("--eta", geo.eta, "cone aperture")->required();
  c_sand->add_option("--samples", geo.samples, "sample count");
  c_sand->add_option("--seed", geo.seed, "RNG seed");
  c_sand->add_option("--out", geo.out, "output directory");
  c_sand->callback([&] { cli::cmd_geom_sandwich(geo, cmdline); });

  CLI::App* c_self = app.add_subcommand("selfcheck", "run the bundled quick examples");
  c_self->callback([] { cli::cmd_selfcheck(); });

  cli::ReportArgs rep;
  CLI::App* c_rep = app.add_subcommand("report", "aggregate run manifests");
  c_rep->add_option("--run-dir", rep.run_dir, "directory holding runs")->required();
  c_rep->add_option("--out", rep.out, "output directory (default <run-dir>/report)");
  c_rep->callback([&] { cli::cmd_report(rep, cmdline); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e); // --help / --version
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

} // namespace stefan
