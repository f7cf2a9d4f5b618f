#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "stefanlab/errors.hpp"
#include "stefanlab/obstacle.hpp"

using namespace stefan;

namespace {

// Dense linear complementarity oracle: find u >= 0 with A u - c >= 0 and
// u . (A u - c) = 0 by active-set iteration.  Each candidate support is
// solved by Gaussian elimination with partial pivoting; for the M-matrices
// assembled here the support settles in a handful of rounds.
std::vector<double> dense_lcp(const std::vector<std::vector<double>>& A,
                              const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  std::set<int> support;
  for (int i = 0; i < n; ++i) support.insert(i);
  std::vector<double> u(n, 0.0);
  for (int round = 0; round < 200; ++round) {
    const std::vector<int> idx(support.begin(), support.end());
    const int m = static_cast<int>(idx.size());
    std::fill(u.begin(), u.end(), 0.0);
    if (m > 0) {
      std::vector<std::vector<double>> M(m, std::vector<double>(m + 1, 0.0));
      for (int r = 0; r < m; ++r) {
        for (int s = 0; s < m; ++s) M[r][s] = A[idx[r]][idx[s]];
        M[r][m] = c[idx[r]];
      }
      for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
          if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[col], M[piv]);
        REQUIRE(std::abs(M[col][col]) > 1e-14);
        for (int r = col + 1; r < m; ++r) {
          const double f = M[r][col] / M[col][col];
          for (int s = col; s <= m; ++s) M[r][s] -= f * M[col][s];
        }
      }
      for (int r = m - 1; r >= 0; --r) {
        double v = M[r][m];
        for (int s = r + 1; s < m; ++s) v -= M[r][s] * u[idx[s]];
        u[idx[r]] = v / M[r][r];
      }
    }
    bool changed = false;
    for (int i : idx)
      if (u[i] < -1e-12) {
        support.erase(i);
        changed = true;
      }
    if (changed) continue;
    for (int i = 0; i < n; ++i) {
      if (support.count(i)) continue;
      double row = -c[i];
      for (int j = 0; j < n; ++j) row += A[i][j] * u[j];
      if (row < -1e-12) {
        support.insert(i);
        changed = true;
      }
    }
    if (!changed) {
      for (double& v : u) v = std::max(v, 0.0);
      return u;
    }
  }
  FAIL("dense LCP oracle did not settle");
  return u;
}

// Assembles the radial implicit-Euler step as a dense LCP (unknowns are the
// interior nodes 0..M-1; node M carries the Dirichlet value).
void assemble_radial(const ScalarField& u_prev, const SolverConfig& cfg,
                     std::vector<std::vector<double>>& A, std::vector<double>& c) {
  const int M = static_cast<int>(cfg.cells_per_axis());
  const double sigma = cfg.dt / (cfg.h * cfg.h);
  const double g_new = boundary_value(cfg, {cfg.L}, u_prev.t + cfg.dt);
  A.assign(M, std::vector<double>(M, 0.0));
  c.assign(M, 0.0);
  A[0][0] = 1.0 + 2.0 * cfg.n * sigma;
  A[0][1] = -2.0 * cfg.n * sigma;
  c[0] = u_prev.at(0) - cfg.dt;
  for (int i = 1; i < M; ++i) {
    const double drift = (cfg.n - 1.0) / (2.0 * i);
    A[i][i] = 1.0 + 2.0 * sigma;
    A[i][i - 1] = -sigma * (1.0 - drift);
    if (i + 1 < M) A[i][i + 1] = -sigma * (1.0 + drift);
    c[i] = u_prev.at(i) - cfg.dt;
    if (i + 1 == M) c[i] += sigma * (1.0 + drift) * g_new;
  }
}

// Assembles the cartesian implicit-Euler step over the interior lattice.
void assemble_cartesian(const ScalarField& u_prev, const SolverConfig& cfg,
                        std::vector<std::vector<double>>& A, std::vector<double>& c) {
  const int M = static_cast<int>(cfg.cells_per_axis());
  const double sigma = cfg.dt / (cfg.h * cfg.h);
  const double t_new = u_prev.t + cfg.dt;
  const int W = M - 1;
  const int N = W * W;
  auto flat = [W](int i, int j) { return (i - 1) * W + (j - 1); };
  A.assign(N, std::vector<double>(N, 0.0));
  c.assign(N, 0.0);
  for (int i = 1; i < M; ++i) {
    for (int j = 1; j < M; ++j) {
      const int I = flat(i, j);
      A[I][I] = 1.0 + 4.0 * sigma;
      c[I] = u_prev.at(i, j) - cfg.dt;
      const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int ii = i + di[k], jj = j + dj[k];
        if (ii == 0 || ii == M || jj == 0 || jj == M) {
          c[I] += sigma * boundary_value(cfg, {u_prev.coord(0, ii), u_prev.coord(1, jj)}, t_new);
        } else {
          A[I][flat(ii, jj)] = -sigma;
        }
      }
    }
  }
}

struct MonoReport {
  double min_ut = 1e300;
  double max_residual = 0.0;
};

MonoReport monotone_run(const SolverConfig& cfg) {
  MonoReport rep;
  ScalarField u = initial_field(cfg);
  const long long N = std::llround(cfg.max_time / cfg.dt);
  for (long long k = 1; k <= N; ++k) {
    StepResult r = step_lcp(u, cfg);
    rep.max_residual = std::max(rep.max_residual, r.residual);
    for (std::size_t i = 0; i < u.values.size(); ++i)
      rep.min_ut = std::min(rep.min_ut, (r.u.values[i] - u.values[i]) / cfg.dt);
    u = std::move(r.u);
  }
  return rep;
}

SolverConfig slab_config(double h, double dt, double max_time) {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 1;
  cfg.L = 1.0;
  cfg.h = h;
  cfg.dt = dt;
  cfg.max_time = max_time;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.125;
  cfg.init.kind = InitKind::zero;
  cfg.init.radius = 0.0;
  return cfg;
}

} // namespace

TEST_CASE("config validation rejects inconsistent setups", "[obstacle]") {
  SolverConfig cfg;
  REQUIRE_NOTHROW(cfg.validate());
  auto broken = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    return c;
  };
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.h = 0.0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.dt = -1.0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.tol = 0.0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.omega = 1.0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.omega = 2.0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.max_sweeps = 0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.max_time = 0.0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.n = 0; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) {
                      c.mode = SolverMode::cartesian2d;
                      c.n = 3;
                    }).validate(),
                    input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.boundary.g0 = -0.1; }).validate(),
                    input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.boundary.kappa = -1.0; }).validate(),
                    input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) {
                      c.boundary.kind = BoundaryKind::quadratic;
                      c.boundary.mu1 = 0.0;
                      c.boundary.mu2 = 0.0;
                    }).validate(),
                    input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.init.radius = 1.0; }).validate(),
                    input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.L = 0.005; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) { c.h = 0.015; }).validate(), input_error);
  REQUIRE_THROWS_AS(broken([](SolverConfig& c) {
                      c.L = 0.03;
                      c.h = 0.01;
                    }).validate(),
                    input_error); // only 3 cells
}

TEST_CASE("boundary data evaluates its three families", "[obstacle]") {
  SolverConfig cfg;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.25;
  REQUIRE(boundary_value(cfg, {1.0}, 5.0) == 0.25);
  cfg.boundary.kind = BoundaryKind::ramp;
  cfg.boundary.kappa = 2.0;
  REQUIRE(boundary_value(cfg, {1.0}, 0.5) == Catch::Approx(0.5).margin(1e-15));
  cfg.boundary.kind = BoundaryKind::quadratic;
  cfg.boundary.kappa = 0.0;
  REQUIRE(boundary_value(cfg, {0.5}, 0.0) == Catch::Approx(0.0625).margin(1e-16));
  cfg.mode = SolverMode::cartesian2d;
  cfg.boundary.mu1 = 1.0;
  cfg.boundary.mu2 = 0.5;
  REQUIRE(boundary_value(cfg, {0.5, 1.0}, 0.0) ==
          Catch::Approx(0.25 * (0.25 + 0.5)).margin(1e-15));
}

TEST_CASE("initial data families fill the grid as documented", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 2;
  cfg.L = 1.0;
  cfg.h = 0.125;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.4;
  cfg.init.kind = InitKind::cap;
  cfg.init.radius = 0.25;
  const ScalarField cap = initial_field(cfg);
  REQUIRE(cap.at(0) == 0.0);
  REQUIRE(cap.at(2) == 0.0); // r = 0.25 is still in the ice cap
  const double r = 0.5;
  REQUIRE(cap.at(4) == Catch::Approx(0.4 * std::pow((r - 0.25) / 0.75, 2)).margin(1e-15));
  REQUIRE(cap.at(8) == 0.4); // rim carries the boundary value

  cfg.init.kind = InitKind::positive;
  const ScalarField pos = initial_field(cfg);
  for (std::int64_t i = 0; i <= 8; ++i) REQUIRE(pos.at(i) == 0.4);

  cfg.init.kind = InitKind::zero;
  const ScalarField zero = initial_field(cfg);
  for (std::int64_t i = 0; i < 8; ++i) REQUIRE(zero.at(i) == 0.0);
  REQUIRE(zero.at(8) == 0.4);

  cfg.mode = SolverMode::cartesian2d;
  cfg.L = 0.5;
  cfg.init.kind = InitKind::cap;
  const ScalarField cart = initial_field(cfg);
  REQUIRE(cart.at(0, 0) == 0.4);                       // rim
  REQUIRE(cart.at(4, 4) == 0.0);                       // center ice
  REQUIRE(cart.dims[0] == 9);
  REQUIRE(cart.origin[0] == -0.5);
}

TEST_CASE("one implicit step matches a dense complementarity solve", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 2;
  cfg.L = 1.0;
  cfg.h = 1.0 / 16.0;
  cfg.dt = 1e-3;
  cfg.boundary.kind = BoundaryKind::ramp;
  cfg.boundary.g0 = 0.3;
  cfg.boundary.kappa = 0.5;
  cfg.init.kind = InitKind::cap;
  cfg.init.radius = 0.25;

  ScalarField u = initial_field(cfg);
  for (int step = 0; step < 3; ++step) {
    std::vector<std::vector<double>> A;
    std::vector<double> c;
    assemble_radial(u, cfg, A, c);
    const std::vector<double> ref = dense_lcp(A, c);
    const StepResult r = step_lcp(u, cfg);
    const int M = static_cast<int>(cfg.cells_per_axis());
    for (int i = 0; i < M; ++i) {
      INFO("step=" << step << " i=" << i);
      REQUIRE(r.u.at(i) == Catch::Approx(ref[i]).margin(1e-8));
    }
    REQUIRE(r.residual <= cfg.tol);
    u = r.u;
  }
}

TEST_CASE("one cartesian step matches a dense complementarity solve", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::cartesian2d;
  cfg.n = 2;
  cfg.L = 0.5;
  cfg.h = 1.0 / 12.0;
  cfg.dt = 1e-3;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.3;
  cfg.init.kind = InitKind::cap;
  cfg.init.radius = 0.2;

  ScalarField u = initial_field(cfg);
  std::vector<std::vector<double>> A;
  std::vector<double> c;
  assemble_cartesian(u, cfg, A, c);
  const std::vector<double> ref = dense_lcp(A, c);
  const StepResult r = step_lcp(u, cfg);
  const int M = static_cast<int>(cfg.cells_per_axis());
  const int W = M - 1;
  for (int i = 1; i < M; ++i)
    for (int j = 1; j < M; ++j) {
      INFO("i=" << i << " j=" << j);
      REQUIRE(r.u.at(i, j) == Catch::Approx(ref[(i - 1) * W + (j - 1)]).margin(1e-8));
    }
  REQUIRE(r.residual <= cfg.tol);
}

TEST_CASE("ice-free data solves the unconstrained heat step", "[obstacle]") {
  // With positive data the constraint never binds, so the LCP equals the
  // plain linear system (the oracle keeps every index in the support).
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 3;
  cfg.L = 1.0;
  cfg.h = 1.0 / 16.0;
  cfg.dt = 5e-4;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 1.0;
  cfg.init.kind = InitKind::positive;

  const ScalarField u = initial_field(cfg);
  std::vector<std::vector<double>> A;
  std::vector<double> c;
  assemble_radial(u, cfg, A, c);
  const std::vector<double> ref = dense_lcp(A, c);
  const StepResult r = step_lcp(u, cfg);
  for (int i = 0; i < 16; ++i) {
    REQUIRE(r.u.at(i) == Catch::Approx(ref[i]).margin(1e-8));
    REQUIRE(r.u.at(i) > 0.0);
  }
}

TEST_CASE("zero data is a fixed point of the step", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 2;
  cfg.L = 1.0;
  cfg.h = 1.0 / 32.0;
  cfg.dt = 1e-3;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.0;
  cfg.init.kind = InitKind::zero;
  const ScalarField u0 = initial_field(cfg);
  const StepResult r = step_lcp(u0, cfg);
  for (double v : r.u.values) REQUIRE(v == 0.0);
  REQUIRE(r.residual <= cfg.tol);
  REQUIRE(r.sweeps == 1);
}

TEST_CASE("solver enforces grid compatibility and reports stalls", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.h = 1.0 / 32.0;
  const ScalarField wrong({16}, cfg.h, {0.0}, 0.0);
  REQUIRE_THROWS_AS(step_lcp(wrong, cfg), input_error);

  // One sweep cannot reach a 1e-16 residual from cap data.
  SolverConfig stall = cfg;
  stall.max_sweeps = 1;
  stall.tol = 1e-16;
  stall.dt = 0.1;
  stall.boundary.kind = BoundaryKind::constant;
  stall.boundary.g0 = 0.5;
  stall.init.kind = InitKind::cap;
  stall.init.radius = 0.25;
  const ScalarField u = initial_field(stall);
  REQUIRE_THROWS_AS(step_lcp(u, stall), numeric_error);
}

TEST_CASE("stationary slab profile is reproduced to truncation error", "[obstacle]") {
  // u'' = 1 on the thawed side with u(1) fixed pins the interface at 1/2.
  for (double h : {1.0 / 64.0, 1.0 / 128.0}) {
    SolverConfig cfg = slab_config(h, 1e-3, 2.0);
    ScalarField u = initial_field(cfg);
    double max_res = 0.0;
    const long long N = std::llround(cfg.max_time / cfg.dt);
    for (long long k = 1; k <= N; ++k) {
      StepResult r = step_lcp(u, cfg);
      max_res = std::max(max_res, r.residual);
      u = std::move(r.u);
    }
    const ContactMetrics m = extract_contact_metrics(u, contact_threshold(h));
    INFO("h=" << h);
    REQUIRE(std::abs(m.inradius - 0.5) < 2.0 * h);
    REQUIRE(max_res <= cfg.tol);
    double sup = 0.0;
    for (std::int64_t i = 0; i < u.dims[0]; ++i) {
      const double x = u.coord(0, i);
      const double exact = x > 0.5 ? 0.5 * (x - 0.5) * (x - 0.5) : 0.0;
      sup = std::max(sup, std::abs(u.at(i) - exact));
    }
    REQUIRE(sup < 1e-10);
  }
}

TEST_CASE("canned configurations evolve monotonically in time", "[obstacle]") {
  std::vector<SolverConfig> configs;
  {
    SolverConfig c;
    c.mode = SolverMode::radial;
    c.n = 2;
    c.L = 1.0;
    c.h = 1.0 / 128.0;
    c.dt = 1e-4;
    c.max_time = 0.02;
    c.boundary.kind = BoundaryKind::constant;
    c.boundary.g0 = 0.35;
    c.init.kind = InitKind::cap;
    c.init.radius = 0.25;
    configs.push_back(c);
    c.n = 3;
    configs.push_back(c);
  }
  configs.push_back(slab_config(1.0 / 128.0, 1e-3, 0.2));
  {
    SolverConfig c;
    c.mode = SolverMode::radial;
    c.n = 2;
    c.L = 1.0;
    c.h = 1.0 / 128.0;
    c.dt = 1e-4;
    c.max_time = 0.02;
    c.boundary.kind = BoundaryKind::ramp;
    c.boundary.g0 = 0.3;
    c.boundary.kappa = 0.5;
    c.init.kind = InitKind::cap;
    c.init.radius = 0.3;
    configs.push_back(c);
  }
  {
    SolverConfig c;
    c.mode = SolverMode::cartesian2d;
    c.n = 2;
    c.L = 0.5;
    c.h = 1.0 / 64.0;
    c.dt = 2e-4;
    c.max_time = 0.02;
    c.boundary.kind = BoundaryKind::quadratic;
    c.boundary.g0 = 0.2;
    c.boundary.kappa = 0.5;
    c.boundary.mu1 = 1.0;
    c.boundary.mu2 = 0.6;
    c.init.kind = InitKind::zero;
    configs.push_back(c);
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const MonoReport rep = monotone_run(configs[i]);
    INFO("config " << i);
    REQUIRE(rep.min_ut >= -1e-9);
    REQUIRE(rep.max_residual <= configs[i].tol);
  }
}

TEST_CASE("larger boundary data dominates pointwise", "[obstacle]") {
  auto run_pair = [](SolverConfig lo, double hi_g0) {
    SolverConfig hi = lo;
    hi.boundary.g0 = hi_g0;
    ScalarField ul = initial_field(lo), uh = initial_field(hi);
    double worst = 1e300;
    const long long N = std::llround(lo.max_time / lo.dt);
    for (long long k = 1; k <= N; ++k) {
      ul = step_lcp(ul, lo).u;
      uh = step_lcp(uh, hi).u;
      for (std::size_t i = 0; i < ul.values.size(); ++i)
        worst = std::min(worst, uh.values[i] - ul.values[i]);
    }
    return worst;
  };
  {
    SolverConfig lo;
    lo.mode = SolverMode::radial;
    lo.n = 2;
    lo.L = 1.0;
    lo.h = 1.0 / 128.0;
    lo.dt = 1e-4;
    lo.max_time = 0.02;
    lo.boundary.kind = BoundaryKind::constant;
    lo.boundary.g0 = 0.3;
    lo.init.kind = InitKind::cap;
    lo.init.radius = 0.25;
    REQUIRE(run_pair(lo, 0.35) >= -1e-12);
  }
  {
    SolverConfig lo;
    lo.mode = SolverMode::cartesian2d;
    lo.n = 2;
    lo.L = 0.5;
    lo.h = 1.0 / 64.0;
    lo.dt = 2e-4;
    lo.max_time = 0.01;
    lo.boundary.kind = BoundaryKind::constant;
    lo.boundary.g0 = 0.1;
    lo.init.kind = InitKind::cap;
    lo.init.radius = 0.2;
    REQUIRE(run_pair(lo, 0.12) >= -1e-12);
  }
}

TEST_CASE("contact metrics interpolate the threshold crossing", "[obstacle]") {
  REQUIRE(contact_threshold(0.01) == Catch::Approx(1e-7).epsilon(1e-15));

  ScalarField u({5}, 0.25, {0.0}, 0.0);
  u.values = {0.0, 0.0, 0.2, 0.6, 1.0};
  const ContactMetrics m = extract_contact_metrics(u, 0.5);
  REQUIRE_FALSE(m.empty);
  REQUIRE(m.volume == Catch::Approx(0.75).margin(1e-15));
  // Crossing between r = 0.5 (u = 0.2) and r = 0.75 (u = 0.6).
  REQUIRE(m.circumradius == Catch::Approx(0.6875).margin(1e-12));
  REQUIRE(m.inradius == Catch::Approx(0.6875).margin(1e-12));

  // Ice not containing the anchor: inradius collapses to zero.
  ScalarField v({5}, 0.25, {0.0}, 0.0);
  v.values = {1.0, 0.0, 0.0, 1.0, 1.0};
  const ContactMetrics mv = extract_contact_metrics(v, 0.5);
  REQUIRE(mv.inradius == 0.0);
  REQUIRE(mv.circumradius == Catch::Approx(0.625).margin(1e-12));
  REQUIRE(mv.volume == Catch::Approx(0.5).margin(1e-15));

  // Empty set: flag plus zeroed radii.
  ScalarField w({5}, 0.25, {0.0}, 0.0);
  w.values = {1.0, 1.0, 1.0, 1.0, 1.0};
  const ContactMetrics mw = extract_contact_metrics(w, 0.5);
  REQUIRE(mw.empty);
  REQUIRE(mw.inradius == 0.0);
  REQUIRE(mw.circumradius == 0.0);
  REQUIRE(mw.volume == 0.0);

  // Single ice cell at the center of a plane grid.
  ScalarField g({5, 5}, 0.5, {-1.0, -1.0}, 0.0);
  g.values.assign(25, 1.0);
  g.at(2, 2) = 0.0;
  const ContactMetrics mg = extract_contact_metrics(g, 0.5);
  REQUIRE_FALSE(mg.empty);
  REQUIRE(mg.volume == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(mg.circumradius == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(mg.inradius == Catch::Approx(0.25).margin(1e-12));

  REQUIRE_THROWS_AS(extract_contact_metrics(u, 0.0), input_error);
  REQUIRE_THROWS_AS(extract_contact_metrics(u, 0.5, {0.0, 0.0}), input_error);
}

TEST_CASE("simulation tracks the collapse and refines extinction", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 2;
  cfg.L = 1.0;
  cfg.h = 1.0 / 64.0;
  cfg.dt = 5e-4;
  cfg.max_time = 0.5;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.35;
  cfg.init.kind = InitKind::cap;
  cfg.init.radius = 0.25;
  cfg.snapshot_stride = 10;

  const SimResult sim = simulate(cfg);
  REQUIRE(sim.history.t_star.has_value());
  const double t_star = *sim.history.t_star;
  REQUIRE(t_star > 0.0);
  REQUIRE(t_star <= cfg.max_time);

  const std::size_t rows = sim.history.t.size();
  REQUIRE(rows == static_cast<std::size_t>(sim.steps) + 1);
  // Step bracketing the refined extinction time.
  REQUIRE(t_star <= sim.history.t[rows - 1]);
  REQUIRE(t_star > sim.history.t[rows - 2]);
  // Ice shrinks monotonically; the last row is empty.
  for (std::size_t i = 1; i < rows; ++i) {
    REQUIRE(sim.history.volume[i] <= sim.history.volume[i - 1] + 1e-15);
    REQUIRE(sim.history.circumradius[i] <= sim.history.circumradius[i - 1] + 1e-9);
  }
  REQUIRE(sim.history.circumradius[rows - 1] == 0.0);
  REQUIRE(sim.history.volume[rows - 1] == 0.0);
  REQUIRE(sim.history.circumradius[0] == Catch::Approx(0.25).margin(2.0 * cfg.h));

  REQUIRE_FALSE(sim.snapshots.empty());
  REQUIRE(sim.snapshots.front().t == 0.0);
  REQUIRE(sim.snapshots.back().t == sim.history.t[rows - 1]);

  // Bitwise determinism across repeated runs.
  const SimResult again = simulate(cfg);
  REQUIRE(again.history.t_star == sim.history.t_star);
  REQUIRE(again.history.volume == sim.history.volume);
  REQUIRE(again.snapshots.back().values == sim.snapshots.back().values);
}

TEST_CASE("ice-free initial data ends the run immediately", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 2;
  cfg.L = 1.0;
  cfg.h = 1.0 / 32.0;
  cfg.dt = 1e-3;
  cfg.max_time = 0.1;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.35;
  cfg.init.kind = InitKind::positive;
  cfg.snapshot_stride = 5;
  const SimResult sim = simulate(cfg);
  REQUIRE(sim.steps == 0);
  REQUIRE(sim.history.t.size() == 1);
  REQUIRE_FALSE(sim.history.t_star.has_value());
  REQUIRE(sim.snapshots.size() == 1);
}

TEST_CASE("instability detector aborts on exploding boundary data", "[obstacle]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::radial;
  cfg.n = 2;
  cfg.L = 1.0;
  cfg.h = 1.0 / 32.0;
  cfg.dt = 1e-3;
  cfg.max_time = 0.1;
  cfg.boundary.kind = BoundaryKind::ramp;
  cfg.boundary.g0 = 0.125;
  cfg.boundary.kappa = 1e6; // rim value jumps 1000x within one step
  cfg.init.kind = InitKind::cap;
  cfg.init.radius = 0.25;
  REQUIRE_THROWS_AS(simulate(cfg), numeric_error);
}
