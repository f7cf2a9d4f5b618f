#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "stefanlab/errors.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] (Newton on the recurrence).
inline QuadRule gauss_legendre(int n) {
  require_input(n >= 1 && n <= 512, "gauss_legendre: order out of range");
  QuadRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

/// Gauss-Hermite rule for weight exp(-x^2) on the real line.
inline QuadRule gauss_hermite(int n) {
  require_input(n >= 1 && n <= 512, "gauss_hermite: order out of range");
  QuadRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double pim4 = 0.7511255444649425; // pi^{-1/4}
  double x = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Standard initial guesses for the largest roots, then step down.
    if (i == 0)
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
    else if (i == 2)
      x = 1.86 * x - 0.86 * q.nodes[n - 1];
    else if (i == 3)
      x = 1.91 * x - 0.91 * q.nodes[n - 2];
    else
      x = 2.0 * x - q.nodes[n - i + 1];

    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[n - 1 - i] = x;
    q.nodes[i] = -x;
    q.weights[n - 1 - i] = 2.0 / (pp * pp);
    q.weights[i] = q.weights[n - 1 - i];
  }
  return q;
}

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` panels.
inline double integrate_panels(const std::function<double(double)>& f, double a, double b,
                               int panels, const QuadRule& rule) {
  require_input(panels >= 1, "integrate_panels: need at least one panel");
  KahanSum sum;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * w;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      double x = lo + 0.5 * w * (rule.nodes[k] + 1.0);
      sum.add(0.5 * w * rule.weights[k] * f(x));
    }
  }
  return sum.value();
}

/// Integral of f over [a, b] split at the given interior breakpoints,
/// with geometric panel refinement toward each breakpoint.
inline double integrate_split(const std::function<double(double)>& f, double a, double b,
                              std::vector<double> breaks, int panels_per_piece,
                              const QuadRule& rule) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  KahanSum sum;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double lo = std::max(breaks[i], a), hi = std::min(breaks[i + 1], b);
    if (hi - lo <= 0.0) continue;
    sum.add(integrate_panels(f, lo, hi, panels_per_piece, rule));
  }
  return sum.value();
}

/// Golden-section minimization of a unimodal-per-piece function on [a, b];
/// returns the argmin.  `xtol` is an absolute tolerance on the argument.
inline double golden_minimize(const std::function<double(double)>& f, double a, double b,
                              double xtol = 1e-13) {
  const double invphi = 0.6180339887498948482;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int iter = 0; iter < 200 && (b - a) > xtol; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

} // namespace stefan
