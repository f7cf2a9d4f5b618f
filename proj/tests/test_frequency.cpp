#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "stefanlab/core.hpp"
#include "stefanlab/errors.hpp"
#include "stefanlab/field.hpp"
#include "stefanlab/frequency.hpp"
#include "stefanlab/obstacle.hpp"

using namespace stefan;

namespace {

using Vec = std::vector<double>;

double sq_norm(const Vec& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

} // namespace

TEST_CASE("backward kernel has the right peak and decay", "[frequency]") {
  REQUIRE(gaussian_kernel({0.0, 0.0}, -0.25) == Catch::Approx(1.0 / M_PI).epsilon(1e-14));
  const double ratio = gaussian_kernel({1.0, 0.0}, -0.25) / gaussian_kernel({0.0, 0.0}, -0.25);
  REQUIRE(ratio == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
  REQUIRE_THROWS_AS(gaussian_kernel({1.0}, 0.0), input_error);
  REQUIRE_THROWS_AS(gaussian_kernel({1.0}, 0.5), input_error);
}

TEST_CASE("radial cutoff has plateau, support, and consistent derivative", "[frequency]") {
  REQUIRE(cutoff_xi(0.0) == 1.0);
  REQUIRE(cutoff_xi(0.25) == 1.0);
  REQUIRE(cutoff_xi(0.5) == 0.0);
  REQUIRE(cutoff_xi(0.8) == 0.0);
  REQUIRE(cutoff_xi(0.375) == Catch::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-14));
  REQUIRE(cutoff_xi(0.3) > cutoff_xi(0.4));
  for (double r : {0.3, 0.375, 0.45}) {
    const double fd = (cutoff_xi(r + 5e-7) - cutoff_xi(r - 5e-7)) / 1e-6;
    REQUIRE(cutoff_xi_deriv(r) == Catch::Approx(fd).margin(1e-5));
    REQUIRE(cutoff_xi_deriv(r) < 0.0);
  }
  REQUIRE(cutoff_xi_deriv(0.2) == 0.0);
  REQUIRE(cutoff_xi_deriv(0.6) == 0.0);
}

TEST_CASE("closed-form frequency reproduces exact values", "[frequency]") {
  auto w_lin = [](const Vec& x, double) { return x[0]; };
  auto grad_lin = [](const Vec& x, double) {
    Vec g(x.size(), 0.0);
    g[0] = 1.0;
    return g;
  };
  for (int n : {2, 3}) {
    for (double r : {0.125, 0.0625, 0.03125}) {
      INFO("n=" << n << " r=" << r);
      const FrequencyPoint lin = frequency_closed_form(n, r, w_lin, grad_lin);
      REQUIRE(lin.H == Catch::Approx(2.0 * r * r).epsilon(1e-12));
      REQUIRE(lin.D == Catch::Approx(2.0 * r * r).epsilon(1e-12));
      REQUIRE(lin.phi == Catch::Approx(1.0).margin(1e-13));

      // Caloric paraboloid |x|^2 / 2n + t.
      auto w_cal = [n](const Vec& x, double t) { return sq_norm(x) / (2.0 * n) + t; };
      auto grad_cal = [n](const Vec& x, double) {
        Vec g(x);
        for (double& c : g) c /= n;
        return g;
      };
      const FrequencyPoint cal = frequency_closed_form(n, r, w_cal, grad_cal);
      const double r4 = r * r * r * r;
      REQUIRE(cal.H == Catch::Approx(2.0 * r4 / n).epsilon(1e-12));
      REQUIRE(cal.D == Catch::Approx(4.0 * r4 / n).epsilon(1e-12));
      REQUIRE(cal.phi == Catch::Approx(2.0).margin(1e-13));
    }
  }
}

TEST_CASE("ancient caloric profiles sit at frequency two", "[frequency]") {
  for (int k = 0; k < 10; ++k) {
    const double nu = 0.1 + 0.08 * k;
    const AncientCaloricPolynomial q2(2, 0, 4.0 * nu, nu, {});
    auto w = [&](const Vec& x, double t) { return q2.eval(x, t); };
    auto g = [&](const Vec& x, double) { return Vec{2.0 * nu * x[0], 2.0 * nu * x[1]}; };
    const FrequencyPoint pt = frequency_closed_form(2, 0.0625 + 0.01 * k, w, g);
    REQUIRE(pt.phi == Catch::Approx(2.0).margin(1e-12));
  }
  // Kernel direction present: q = A t - nu_1 x_1^2 + nu (x_2^2 + x_3^2).
  const double nu = 0.7, nu1 = 0.3;
  const AncientCaloricPolynomial q3(3, 1, 4.0 * nu - 2.0 * nu1, nu, {nu1});
  auto w3 = [&](const Vec& x, double t) { return q3.eval(x, t); };
  auto g3 = [&](const Vec& x, double) {
    return Vec{-2.0 * nu1 * x[0], 2.0 * nu * x[1], 2.0 * nu * x[2]};
  };
  for (double r : {0.125, 0.03125}) {
    REQUIRE(frequency_closed_form(3, r, w3, g3).phi == Catch::Approx(2.0).margin(1e-12));
  }
}

TEST_CASE("pure monomials produce the Dirichlet ratio", "[frequency]") {
  // d^2 / (2d - 1) for x_1^d: 4/3 at d = 2, 9/5 at d = 3.
  auto w2 = [](const Vec& x, double) { return x[0] * x[0]; };
  auto g2 = [](const Vec& x, double) { return Vec{2.0 * x[0], 0.0}; };
  REQUIRE(frequency_closed_form(2, 0.125, w2, g2).phi ==
          Catch::Approx(4.0 / 3.0).margin(1e-12));
  auto w3 = [](const Vec& x, double) { return x[0] * x[0] * x[0]; };
  auto g3 = [](const Vec& x, double) { return Vec{3.0 * x[0] * x[0], 0.0}; };
  REQUIRE(frequency_closed_form(2, 0.0625, w3, g3).phi ==
          Catch::Approx(9.0 / 5.0).margin(1e-12));
  // Harmonic polynomials are caloric, so the ratio equals the degree.
  auto wh = [](const Vec& x, double) { return x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]; };
  auto gh = [](const Vec& x, double) {
    return Vec{3.0 * x[0] * x[0] - 3.0 * x[1] * x[1], -6.0 * x[0] * x[1]};
  };
  REQUIRE(frequency_closed_form(2, 0.125, wh, gh).phi == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("cutoff is invisible on functions supported in the plateau", "[frequency]") {
  // w = (1/16 - |x|^2)_+^2 x_1 vanishes outside B_{1/4}.
  auto w = [](const Vec& x, double) {
    const double c = 0.0625 - sq_norm(x);
    return c > 0.0 ? c * c * x[0] : 0.0;
  };
  auto g = [](const Vec& x, double) {
    const double c = 0.0625 - sq_norm(x);
    Vec out(x.size(), 0.0);
    if (c <= 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i] = -4.0 * x[0] * x[i] * c;
    }
    out[0] += c * c;
    return out;
  };
  for (double r : {0.125, 0.0625}) {
    const FrequencyPoint plain = frequency_closed_form(2, r, w, g, false);
    const FrequencyPoint cut = frequency_closed_form(2, r, w, g, true);
    REQUIRE(plain.phi == cut.phi);
    REQUIRE(plain.H == cut.H);
    REQUIRE(plain.D == cut.D);
  }
}

TEST_CASE("closed-form route rejects bad arguments", "[frequency]") {
  auto w = [](const Vec& x, double) { return x[0]; };
  auto g = [](const Vec& x, double) { return Vec(x.size(), 0.0); };
  auto g_bad = [](const Vec&, double) { return Vec{1.0, 2.0, 3.0}; };
  REQUIRE_THROWS_AS(frequency_closed_form(0, 0.1, w, g), input_error);
  REQUIRE_THROWS_AS(frequency_closed_form(5, 0.1, w, g), input_error);
  REQUIRE_THROWS_AS(frequency_closed_form(2, 0.0, w, g), input_error);
  REQUIRE_THROWS_AS(frequency_closed_form(2, 1.0, w, g), input_error);
  REQUIRE_THROWS_AS(frequency_closed_form(2, 0.1, w, g_bad), input_error);
}

TEST_CASE("discrete gradients are exact on bilinear fields", "[frequency]") {
  ScalarField u({7, 9}, 0.25, {-0.75, -1.0}, 0.3);
  const double a = 0.2, b = -0.7, c = 1.1, d = 0.5;
  for (std::int64_t i = 0; i < 7; ++i)
    for (std::int64_t j = 0; j < 9; ++j) {
      const double x = u.coord(0, i), y = u.coord(1, j);
      u.at(i, j) = a + b * x + c * y + d * x * y;
    }
  const auto [gx, gy] = grad_fields(u);
  for (std::int64_t i : {0L, 3L, 6L})
    for (std::int64_t j : {0L, 4L, 8L}) {
      const double x = u.coord(0, i), y = u.coord(1, j);
      REQUIRE(gx.at(i, j) == Catch::Approx(b + d * y).margin(1e-13));
      REQUIRE(gy.at(i, j) == Catch::Approx(c + d * x).margin(1e-13));
    }
  REQUIRE(gx.t == u.t);
  const ScalarField r1({5}, 0.1, {0.0}, 0.0);
  REQUIRE_THROWS_AS(grad_fields(r1), input_error);
}

TEST_CASE("window recenters, subtracts the profile, and keeps time", "[frequency]") {
  ScalarField u({9, 9}, 0.25, {-1.0, -1.0}, -0.125);
  const double a = 0.3, b = 0.8, c = -0.4, d = 0.2;
  for (std::int64_t i = 0; i < 9; ++i)
    for (std::int64_t j = 0; j < 9; ++j) {
      const double x = u.coord(0, i), y = u.coord(1, j);
      u.at(i, j) = a + b * x + c * y + d * x * y;
    }
  const BlowupPolynomial p2 = BlowupPolynomial::isotropic(2);
  const Vec anchor = {0.25, -0.25};
  const ScalarField w = window_field(u, anchor, p2, 0.5);
  REQUIRE(w.dims[0] == 5);
  REQUIRE(w.dims[1] == 5);
  REQUIRE(w.origin[0] == Catch::Approx(-0.5).margin(1e-15));
  REQUIRE(w.t == u.t);
  for (std::int64_t i : {0L, 2L, 4L})
    for (std::int64_t j : {0L, 2L, 4L}) {
      const double x = w.coord(0, i), y = w.coord(1, j);
      const Vec probe = {anchor[0] + x, anchor[1] + y};
      const Vec local = {x, y};
      const double expect =
          (a + b * probe[0] + c * probe[1] + d * probe[0] * probe[1]) - p2.eval(local);
      REQUIRE(w.at(i, j) == Catch::Approx(expect).margin(1e-13));
    }
  REQUIRE_THROWS_AS(window_field(u, {0.0}, p2, 0.5), input_error);
  REQUIRE_THROWS_AS(window_field(u, anchor, p2, 0.3), input_error); // K = 1
  const ScalarField r1({5}, 0.1, {0.0}, 0.0);
  REQUIRE_THROWS_AS(window_field(r1, anchor, p2, 0.5), input_error);
}

TEST_CASE("field route matches the closed form on a compact bump", "[frequency]") {
  auto w_fn = [](const Vec& x, double) {
    const double c = 0.0625 - sq_norm(x);
    return c > 0.0 ? c * c * x[0] : 0.0;
  };
  auto g_fn = [](const Vec& x, double) {
    const double c = 0.0625 - sq_norm(x);
    Vec out(x.size(), 0.0);
    if (c <= 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -4.0 * x[0] * x[i] * c;
    out[0] += c * c;
    return out;
  };
  const double h = 1.0 / 128.0;
  const std::int64_t K = 68; // half width 0.53125 covers B_{1/2}
  ScalarField w({2 * K + 1, 2 * K + 1}, h, {-h * K, -h * K}, -1.0);
  for (std::int64_t i = 0; i <= 2 * K; ++i)
    for (std::int64_t j = 0; j <= 2 * K; ++j) {
      w.at(i, j) = w_fn({w.coord(0, i), w.coord(1, j)}, 0.0);
    }
  const double r = 0.0625;
  const FrequencyPoint plain_ref = frequency_closed_form(2, r, w_fn, g_fn, false);
  const FrequencyPoint plain = frequency_of_field(w, r, false);
  REQUIRE(std::abs(plain.phi - plain_ref.phi) / plain_ref.phi < 1e-4);
  const FrequencyPoint cut_ref = frequency_closed_form(2, r, w_fn, g_fn, true);
  const FrequencyPoint cut = frequency_of_field(w, r, true);
  REQUIRE(std::abs(cut.phi - cut_ref.phi) / cut_ref.phi < 5e-3);
}

TEST_CASE("field route rejects unusable grids", "[frequency]") {
  const ScalarField r1({5}, 0.1, {0.0}, 0.0);
  REQUIRE_THROWS_AS(frequency_of_field(r1, 0.1), input_error);
  ScalarField off({9, 9}, 0.25, {0.0, 0.0}, 0.0);
  REQUIRE_THROWS_AS(frequency_of_field(off, 0.1, false), input_error);
  ScalarField small({9, 9}, 0.05, {-0.2, -0.2}, 0.0);
  small.values.assign(81, 1.0);
  REQUIRE_THROWS_AS(frequency_of_field(small, 0.1, true), input_error);
  REQUIRE_NOTHROW(frequency_of_field(small, 0.1, false));
  REQUIRE_THROWS_AS(frequency_of_field(small, 0.0, false), input_error);
  REQUIRE_THROWS_AS(frequency_of_field(small, 1.0, false), input_error);
  ScalarField zero({9, 9}, 0.25, {-1.0, -1.0}, 0.0);
  REQUIRE_THROWS_AS(frequency_of_field(zero, 0.1, false), numeric_error);
}

TEST_CASE("frequency curve serializes with a fixed header", "[frequency]") {
  FrequencyCurve c;
  c.r = {0.5, 0.25};
  c.H = {1.0, 0.5};
  c.D = {2.0, 1.5};
  c.phi = {2.0, 3.0};
  std::ostringstream os;
  c.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  REQUIRE(line == "r,H,D,phi");
  std::getline(is, line);
  REQUIRE(line == "0.5,1,2,2");
}

namespace {

// Synthetic snapshot family: the blow-up profile plus harmonic
// perturbations whose frequency is their degree, exactly.
std::vector<ScalarField> harmonic_snapshots(double t_star, const std::vector<double>& radii,
                                            double c2, double c3) {
  const double h = 1.0 / 128.0;
  const std::int64_t K = 77; // half width 0.6015625
  const BlowupPolynomial p2 = BlowupPolynomial::isotropic(2);
  std::vector<ScalarField> snaps;
  for (double r : radii) {
    ScalarField u({2 * K + 1, 2 * K + 1}, h, {-h * K, -h * K}, t_star - r * r);
    for (std::int64_t i = 0; i <= 2 * K; ++i) {
      for (std::int64_t j = 0; j <= 2 * K; ++j) {
        const double x = u.coord(0, i), y = u.coord(1, j);
        const Vec p = {x, y};
        u.at(i, j) = p2.eval(p) + c2 * (x * x - y * y) + c3 * (x * x * x - 3.0 * x * y * y);
      }
    }
    snaps.push_back(std::move(u));
  }
  return snaps;
}

} // namespace

TEST_CASE("limit frequency recovers the perturbation degree", "[frequency]") {
  const double t_star = 0.5;
  const std::vector<double> radii = {0.125, 3.0 / 32.0, 0.0625, 3.0 / 64.0, 0.03125};
  const BlowupPolynomial p2 = BlowupPolynomial::isotropic(2);

  SECTION("quadratic-dominated tail") {
    auto snaps = harmonic_snapshots(t_star, radii, 0.05, 0.02);
    // Decoys outside the usable range: past extinction and below resolution.
    ScalarField late = snaps.front();
    late.t = t_star + 0.01;
    snaps.push_back(late);
    ScalarField tiny = snaps.front();
    tiny.t = t_star - std::pow(2.0 / 128.0, 2);
    snaps.push_back(tiny);

    const LambdaStarEstimate est =
        estimate_lambda_star(snaps, t_star, {0.0, 0.0}, p2, 4, false);
    REQUIRE(est.curve.r.size() == 5);
    for (std::size_t i = 1; i < est.curve.r.size(); ++i) {
      REQUIRE(est.curve.r[i] < est.curve.r[i - 1]);
      REQUIRE(est.curve.phi[i] < est.curve.phi[i - 1]);
    }
    // Closed-form mixture of degrees 2 and 3 at the resolved radii.
    auto predicted = [&](double r) {
      const double H = 0.04 * std::pow(r, 4) + 0.0768 * std::pow(r, 6);
      const double D = 0.08 * std::pow(r, 4) + 0.2304 * std::pow(r, 6);
      return D / H;
    };
    for (std::size_t i = 2; i < 5; ++i) { // r <= 1/16: truncation negligible
      INFO("r=" << est.curve.r[i]);
      REQUIRE(est.curve.phi[i] == Catch::Approx(predicted(est.curve.r[i])).margin(3e-3));
    }
    REQUIRE_FALSE(est.nonmonotone_tail);
    REQUIRE(est.lambda_star > 2.0);
    REQUIRE(est.lambda_star < 2.006);
  }

  SECTION("pure cubic perturbation") {
    const auto snaps = harmonic_snapshots(t_star, radii, 0.0, 0.05);
    const LambdaStarEstimate est =
        estimate_lambda_star(snaps, t_star, {0.0, 0.0}, p2, 4, false);
    for (std::size_t i = 2; i < 5; ++i) {
      REQUIRE(est.curve.phi[i] == Catch::Approx(3.0).margin(5e-3));
    }
    REQUIRE(est.lambda_star == Catch::Approx(3.0).margin(2e-3));
  }

  SECTION("filters that empty the list throw") {
    const auto snaps = harmonic_snapshots(t_star, radii, 0.05, 0.0);
    REQUIRE_THROWS_AS(estimate_lambda_star({}, t_star, {0.0, 0.0}, p2, 4, false), input_error);
    REQUIRE_THROWS_AS(estimate_lambda_star(snaps, t_star, {0.0, 0.0}, p2, 4000, false),
                      input_error);
  }
}

TEST_CASE("collapse pipeline lands between the quadratic and cubic rates", "[frequency]") {
  SolverConfig cfg;
  cfg.mode = SolverMode::cartesian2d;
  cfg.n = 2;
  cfg.L = 0.5;
  cfg.h = 1.0 / 128.0;
  cfg.dt = 5e-5;
  cfg.max_time = 0.5;
  cfg.boundary.kind = BoundaryKind::constant;
  cfg.boundary.g0 = 0.12;
  cfg.init.kind = InitKind::cap;
  cfg.init.radius = 0.2;
  cfg.snapshot_stride = 20;

  const SimResult sim = simulate(cfg);
  REQUIRE(sim.history.t_star.has_value());
  const double t_star = *sim.history.t_star;
  REQUIRE(t_star > 0.014);
  REQUIRE(t_star < 0.017);
  REQUIRE(sim.steps == 304);
  REQUIRE(sim.snapshots.size() == 17);

  const LambdaStarEstimate est = estimate_lambda_star(
      sim.snapshots, t_star, {0.0, 0.0}, BlowupPolynomial::isotropic(2));
  REQUIRE(est.lambda_star >= 2.0);
  REQUIRE(est.lambda_star <= 3.0);
  REQUIRE(est.lambda_star == Catch::Approx(2.577966).epsilon(1e-4));
  REQUIRE_FALSE(est.nonmonotone_tail);
}
