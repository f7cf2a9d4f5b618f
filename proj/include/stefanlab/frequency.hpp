#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "stefanlab/core.hpp"
#include "stefanlab/errors.hpp"
#include "stefanlab/field.hpp"
#include "stefanlab/quadrature.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

/// Backward heat kernel weight G(x,t) = (-4 pi t)^{-n/2} exp(|x|^2 / (4t)),
/// unit mass in x for every fixed t < 0.
inline double gaussian_kernel(const std::vector<double>& x, double t) {
  require_input(t < 0.0, "gaussian_kernel: t must be negative");
  double sq = 0.0;
  for (double c : x) sq += c * c;
  const double n = static_cast<double>(x.size());
  return std::pow(-4.0 * std::acos(-1.0) * t, -0.5 * n) * std::exp(sq / (4.0 * t));
}

/// Smooth radial cutoff: 1 on B_{1/4}, 0 outside B_{1/2}, the standard bump
/// exp(1 - 1/(1 - z^2)) with z = (|x| - 1/4)/(1/4) in between.
inline double cutoff_xi(double radius) {
  if (radius <= 0.25) return 1.0;
  if (radius >= 0.5) return 0.0;
  const double z = (radius - 0.25) / 0.25;
  return std::exp(1.0 - 1.0 / (1.0 - z * z));
}

/// d xi / d |x|.
inline double cutoff_xi_deriv(double radius) {
  if (radius <= 0.25 || radius >= 0.5) return 0.0;
  const double z = (radius - 0.25) / 0.25;
  const double om = 1.0 - z * z;
  return cutoff_xi(radius) * (-2.0 * z / (om * om)) * 4.0;
}

struct FrequencyPoint {
  double H = 0.0;
  double D = 0.0;
  double phi = 0.0;
};

/**
 * H, D, phi at radius r for a closed-form w(x, t) with gradient:
 *   H = int w^2 G on the slice t = -r^2,   D = 2 r^2 int |grad w|^2 G,
 * by tensor Gauss-Hermite quadrature after x = 2r u (the substitution turns
 * G dx into the Gauss-Hermite weight exactly).  With apply_cutoff the
 * functionals act on w xi, with grad(w xi) expanded analytically.
 */
inline FrequencyPoint frequency_closed_form(
    int n, double r, const std::function<double(const std::vector<double>&, double)>& w,
    const std::function<std::vector<double>(const std::vector<double>&, double)>& grad_w,
    bool apply_cutoff = false, int points = 40) {
  require_input(n >= 1 && n <= 4, "frequency_closed_form: n must be 1..4");
  require_input(r > 0.0 && r < 1.0, "frequency_closed_form: r must lie in (0, 1)");
  const QuadRule rule = gauss_hermite(points);
  const double norm = std::pow(std::acos(-1.0), -0.5 * n);
  const double t = -r * r;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  KahanSum hsum, dsum;
  const std::size_t P = rule.nodes.size();
  for (;;) {
    double wt = norm;
    for (int a = 0; a < n; ++a) {
      wt *= rule.weights[idx[static_cast<std::size_t>(a)]];
      x[static_cast<std::size_t>(a)] = 2.0 * r * rule.nodes[idx[static_cast<std::size_t>(a)]];
    }
    const double wv = w(x, t);
    std::vector<double> g = grad_w(x, t);
    require_input(static_cast<int>(g.size()) == n, "frequency_closed_form: gradient rank");
    double value = wv, grad_sq = 0.0;
    if (apply_cutoff) {
      double radius = 0.0;
      for (double c : x) radius += c * c;
      radius = std::sqrt(radius);
      const double xi = cutoff_xi(radius);
      const double dxi = cutoff_xi_deriv(radius);
      value = wv * xi;
      for (int a = 0; a < n; ++a) {
        const double dir = radius > 0.0 ? x[static_cast<std::size_t>(a)] / radius : 0.0;
        const double ga = xi * g[static_cast<std::size_t>(a)] + wv * dxi * dir;
        grad_sq += ga * ga;
      }
    } else {
      for (int a = 0; a < n; ++a) grad_sq += g[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(a)];
    }
    hsum.add(wt * value * value);
    dsum.add(wt * grad_sq);
    int a = n - 1;
    for (; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < P) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
    if (a < 0) break;
  }
  FrequencyPoint out;
  out.H = hsum.value();
  out.D = 2.0 * r * r * dsum.value();
  require_numeric(out.H > 1e-14, "frequency_closed_form: H degenerate");
  out.phi = out.D / out.H;
  return out;
}

/// Central-difference gradient of a rank-2 field (one-sided on the rim).
inline std::pair<ScalarField, ScalarField> grad_fields(const ScalarField& w) {
  require_input(w.rank() == 2, "grad_fields: rank-2 fields only");
  ScalarField gx(w.dims, w.h, w.origin, w.t), gy(w.dims, w.h, w.origin, w.t);
  const std::int64_t R = w.dims[0], C = w.dims[1];
  for (std::int64_t i = 0; i < R; ++i) {
    for (std::int64_t j = 0; j < C; ++j) {
      const std::int64_t il = std::max<std::int64_t>(i - 1, 0), ih = std::min(i + 1, R - 1);
      const std::int64_t jl = std::max<std::int64_t>(j - 1, 0), jh = std::min(j + 1, C - 1);
      gx.at(i, j) = (w.at(ih, j) - w.at(il, j)) / (w.h * static_cast<double>(ih - il));
      gy.at(i, j) = (w.at(i, jh) - w.at(i, jl)) / (w.h * static_cast<double>(jh - jl));
    }
  }
  return {std::move(gx), std::move(gy)};
}

/**
 * H, D, phi for a discrete rank-2 slice w at t = -r^2.  Integrals use a
 * radial Gauss-Legendre rule in s = rho^2/4r^2 with the Gaussian absorbed
 * into the weight e^{-s} (panels uniform in s: for polynomial-like w the
 * integrand is analytic there, whereas paneling the variable v = e^{-s}
 * uniformly stalls on the log-singular Dirichlet integrand near v = 0) and
 * a trapezoid rule in the angle; w and its precomputed central-difference
 * gradient are sampled bilinearly.  The cutoff and its gradient are applied
 * analytically.  Sampling truncates at the grid edge; with the cutoff the
 * integrand vanishes beyond |x| = 1/2 anyway, so the grid must cover that
 * ball.
 */
inline FrequencyPoint frequency_of_field(const ScalarField& w, double r,
                                         bool apply_cutoff = true, int radial_panels = 48,
                                         int angular = 256) {
  require_input(w.rank() == 2, "frequency_of_field: rank-2 fields only");
  require_input(r > 0.0 && r < 1.0, "frequency_of_field: r must lie in (0, 1)");
  const double reach0 = std::min(-w.origin[0], -w.origin[1]);
  const double reach1 = std::min(w.origin[0] + w.h * static_cast<double>(w.dims[0] - 1),
                                 w.origin[1] + w.h * static_cast<double>(w.dims[1] - 1));
  const double reach = std::min(reach0, reach1);
  require_input(reach > 0.0, "frequency_of_field: grid must surround the origin");
  if (apply_cutoff) {
    require_input(reach >= 0.5, "frequency_of_field: cutoff needs the grid to cover B_{1/2}");
  }
  const auto grads = grad_fields(w);
  const QuadRule rule = gauss_legendre(12);
  const double rho_max = apply_cutoff ? 0.5 : reach;
  const double s_max = rho_max * rho_max / (4.0 * r * r);
  KahanSum hsum, dsum;
  std::vector<double> xq(2, 0.0);
  auto slice_mean = [&](double s, KahanSum& hacc, KahanSum& dacc, double weight) {
    const double rho = 2.0 * r * std::sqrt(std::max(0.0, s));
    KahanSum hang, dang;
    for (int a = 0; a < angular; ++a) {
      const double th = 2.0 * std::acos(-1.0) * a / angular;
      xq[0] = rho * std::cos(th);
      xq[1] = rho * std::sin(th);
      const double wv = w.sample(xq);
      double g0 = grads.first.sample(xq), g1 = grads.second.sample(xq);
      double value = wv;
      if (apply_cutoff) {
        const double xi = cutoff_xi(rho);
        const double dxi = cutoff_xi_deriv(rho);
        const double d0 = rho > 0.0 ? xq[0] / rho : 0.0;
        const double d1 = rho > 0.0 ? xq[1] / rho : 0.0;
        const double h0 = xi * g0 + wv * dxi * d0;
        const double h1 = xi * g1 + wv * dxi * d1;
        value = wv * xi;
        g0 = h0;
        g1 = h1;
      }
      hang.add(value * value);
      dang.add(g0 * g0 + g1 * g1);
    }
    hacc.add(weight * hang.value() / angular);
    dacc.add(weight * dang.value() / angular);
  };
  // Composite GL in s over (0, s_max) with the cutoff kink separated.
  std::vector<double> cuts = {0.0, s_max};
  const double s_kink = 1.0 / (64.0 * r * r); // rho = 1/4
  if (apply_cutoff && s_kink < s_max) cuts.push_back(s_kink);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const int panels = std::max(4, radial_panels / static_cast<int>(cuts.size() - 1));
    const double step = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = a + step * p;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = lo + 0.5 * step * (rule.nodes[q] + 1.0);
        slice_mean(s, hsum, dsum, 0.5 * step * rule.weights[q] * std::exp(-s));
      }
    }
  }
  FrequencyPoint out;
  out.H = hsum.value();
  out.D = 2.0 * r * r * dsum.value();
  require_numeric(out.H > 1e-14, "frequency_of_field: H degenerate");
  out.phi = out.D / out.H;
  return out;
}

struct FrequencyCurve {
  std::vector<double> r; ///< decreasing
  std::vector<double> H;
  std::vector<double> D;
  std::vector<double> phi;

  void write_csv(std::ostream& os) const {
    os << "r,H,D,phi\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << format17(r[i]) << "," << format17(H[i]) << "," << format17(D[i]) << ","
         << format17(phi[i]) << "\n";
    }
  }
};

/// Recenters a snapshot at the anchor and subtracts the blow-up polynomial:
/// w(x) = u(anchor + x) - p2(x) on a square window of the given half-width.
inline ScalarField window_field(const ScalarField& u, const std::vector<double>& anchor,
                                const BlowupPolynomial& p2, double half_width) {
  require_input(u.rank() == 2, "window_field: rank-2 snapshots only");
  require_input(anchor.size() == 2, "window_field: anchor rank mismatch");
  const std::int64_t K = std::llround(half_width / u.h);
  require_input(K >= 2, "window_field: window too small for the grid");
  ScalarField w({2 * K + 1, 2 * K + 1}, u.h, {-u.h * static_cast<double>(K), -u.h * static_cast<double>(K)}, u.t);
  std::vector<double> x(2, 0.0), probe(2, 0.0);
  for (std::int64_t i = 0; i <= 2 * K; ++i) {
    for (std::int64_t j = 0; j <= 2 * K; ++j) {
      x[0] = w.coord(0, i);
      x[1] = w.coord(1, j);
      probe[0] = anchor[0] + x[0];
      probe[1] = anchor[1] + x[1];
      w.at(i, j) = u.sample(probe) - p2.eval(x);
    }
  }
  return w;
}

struct LambdaStarEstimate {
  FrequencyCurve curve;
  double lambda_star = 0.0;
  bool nonmonotone_tail = false;
};

/**
 * Frequency curve across snapshots approaching extinction: each snapshot at
 * time t_k < T* contributes radius r_k = sqrt(T* - t_k) and the slice
 * w = u(anchor + .) - p2, so the snapshot sits exactly at slice time -r_k^2
 * in the singularity frame.  Radii under min_radius_cells grid cells are
 * dropped (sub-grid free boundary data is noise).  lambda_star is phi at the
 * smallest kept radius; a non-monotone last three phi values set the flag.
 */
inline LambdaStarEstimate estimate_lambda_star(const std::vector<ScalarField>& snapshots,
                                               double t_star,
                                               const std::vector<double>& anchor,
                                               const BlowupPolynomial& p2,
                                               int min_radius_cells = 4,
                                               bool apply_cutoff = true) {
  require_input(!snapshots.empty(), "estimate_lambda_star: no snapshots");
  LambdaStarEstimate out;
  std::vector<std::pair<double, const ScalarField*>> keep;
  for (const auto& snap : snapshots) {
    const double gap = t_star - snap.t;
    if (gap <= 0.0) continue;
    const double r = std::sqrt(gap);
    if (r < min_radius_cells * snap.h || r >= 1.0) continue;
    keep.emplace_back(r, &snap);
  }
  require_input(!keep.empty(), "estimate_lambda_star: no usable radii above grid resolution");
  std::sort(keep.begin(), keep.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [r, snap] : keep) {
    const ScalarField w = window_field(*snap, anchor, p2, 0.5 + 4.0 * snap->h);
    const FrequencyPoint pt = frequency_of_field(w, r, apply_cutoff);
    out.curve.r.push_back(r);
    out.curve.H.push_back(pt.H);
    out.curve.D.push_back(pt.D);
    out.curve.phi.push_back(pt.phi);
  }
  out.lambda_star = out.curve.phi.back();
  const std::size_t N = out.curve.phi.size();
  if (N >= 3) {
    const double a = out.curve.phi[N - 3], b = out.curve.phi[N - 2], c = out.curve.phi[N - 1];
    out.nonmonotone_tail = !((a >= b && b >= c) || (a <= b && b <= c));
  }
  return out;
}

} // namespace stefan
