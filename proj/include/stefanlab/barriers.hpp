#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stefanlab/errors.hpp"

namespace stefan {

/// Radial cutoff profile of the comparison family: 0 at r = eta, 1 at r = 1.
/// k = 2 is logarithmic, k >= 3 is the capacitary power profile.
/// Domain: eta in (0, 1), r in [eta, 1] (a small slack is tolerated).
inline double f_eta(int k, double eta, double r) {
  require_input(k >= 2, "f_eta: k must be >= 2");
  require_input(eta > 0.0 && eta < 1.0, "f_eta: eta must lie in (0, 1)");
  require_input(r >= eta * (1.0 - 1e-12) && r <= 1.0 + 1e-12, "f_eta: r outside [eta, 1]");
  r = std::min(std::max(r, eta), 1.0);
  if (k == 2) return 1.0 + std::log(r) / std::abs(std::log(eta));
  const double rk = std::pow(r, k - 2);
  const double ek = std::pow(eta, k - 2);
  return (rk - ek) / (rk * (1.0 - ek));
}

/// Doubly geometric radius ladder: radii[k] = 2^(1 - 2^k) * r0, so
/// r0, r0/2, r0/8, r0/128, ... with ratio 2^(-2^k) between steps and the
/// squaring identity radii[k+1] = radii[k]^2 / (2 r0).
inline std::vector<double> dyadic_radii(double r0, int kmax) {
  require_input(r0 > 0.0, "dyadic_radii: r0 must be positive");
  require_input(kmax >= 0 && kmax <= 9, "dyadic_radii: kmax out of range (values underflow past 9)");
  std::vector<double> out(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    const int exponent = 1 - (1 << k);
    out[k] = std::ldexp(r0, exponent);
  }
  return out;
}

/// One term of the iterated growth bound: M_k = c0 * c^k * 2^(-sum_{j<k} 2^j eps_j).
/// The log2 value is always meaningful; `value` underflows to 0 for deep k.
struct AccumTerm {
  double log2_value = 0.0;
  double value = 0.0;
};

inline std::vector<AccumTerm> lower_bound_accumulator(double c0, double c,
                                                      const std::vector<double>& eps) {
  require_input(c0 > 0.0, "lower_bound_accumulator: c0 must be positive");
  require_input(c > 0.0 && c <= 1.0, "lower_bound_accumulator: c must lie in (0, 1]");
  for (double e : eps)
    require_input(e >= 0.0, "lower_bound_accumulator: eps entries must be nonnegative");
  std::vector<AccumTerm> out(eps.size() + 1);
  const double log2c0 = std::log2(c0);
  const double log2c = std::log2(c);
  double weighted = 0.0; // sum_{j<k} 2^j eps_j
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].log2_value = log2c0 + static_cast<double>(k) * log2c - weighted;
    out[k].value = std::exp2(out[k].log2_value);
    if (k < eps.size()) weighted += std::ldexp(eps[k], static_cast<int>(k));
  }
  return out;
}

/// Parameters for the slowly varying rate/modulus family.  Each member has a
/// documented default; factories validate only what their branch uses.
struct RateParams {
  double gamma = 0.4;   ///< exponent of the doubly-log modulus (plane case), in (0, 1/2)
  double eps = 0.0;     ///< log-power modulus exponent; 0 selects 0.9*min(1, 2/(n-2))
  double eps0 = 0.1;    ///< log-power exponent of the intermediate stratum
  double alpha0 = 0.1;  ///< Hoelder exponent of the thin stratum, in (0, 1)
  double alpha = 0.1;   ///< growth-rate exponent for the isolated stratum, in (0, 1/2)
  double theta = 0.5;   ///< interpolation exponent for middle strata, in (0, 1)
  double C = 1.0;       ///< prefactor of the log/log-log rate, positive
};

/// One-parameter decay law r -> value on (0, 1/2].  Values are clamped to 1
/// from above: the log-power branches exceed 1 for r close to 1/2, and the
/// family is only meaningful as a modulus bounded by 1.
class RateFunction {
public:
  enum class Kind { omega, sigma, tau };

  /// Interior regularity modulus: doubly-log decay in the plane,
  /// log-power decay in higher dimension.
  static RateFunction omega(int n, RateParams p = {}) {
    validate_common(n, 0, p);
    RateFunction f;
    f.kind_ = Kind::omega;
    f.n_ = n;
    f.p_ = fill_eps(n, p);
    return f;
  }

  /// Expansion error modulus; the branch is selected by the kernel
  /// dimension m of the quadratic blowup.
  static RateFunction sigma(int n, int m, RateParams p = {}) {
    require_input(m >= 0 && m <= n - 1, "sigma: kernel dimension must lie in [0, n-1]");
    validate_common(n, m, p);
    RateFunction f;
    f.kind_ = Kind::sigma;
    f.n_ = n;
    f.m_ = m;
    f.p_ = fill_eps(n, p);
    return f;
  }

  /// Monotone growth rate near the singular time; m in [0, n-2].
  static RateFunction tau(int n, int m, RateParams p = {}) {
    require_input(m >= 0 && m <= n - 2, "tau: kernel dimension must lie in [0, n-2]");
    validate_common(n, m, p);
    require_input(p.alpha > 0.0 && p.alpha < 0.5, "tau: alpha must lie in (0, 1/2)");
    require_input(p.theta > 0.0 && p.theta < 1.0, "tau: theta must lie in (0, 1)");
    require_input(p.C > 0.0, "tau: C must be positive");
    RateFunction f;
    f.kind_ = Kind::tau;
    f.n_ = n;
    f.m_ = m;
    f.p_ = fill_eps(n, p);
    return f;
  }

  double operator()(double r) const {
    require_input(r > 0.0 && r <= 0.5, "RateFunction: r must lie in (0, 1/2]");
    const double L = std::abs(std::log(r));
    double v = 0.0;
    switch (kind_) {
      case Kind::omega:
        v = (n_ == 2) ? std::exp2(-std::pow(L, p_.gamma)) : std::pow(L, -p_.eps);
        break;
      case Kind::sigma:
        if (m_ == n_ - 1)
          v = std::pow(r, p_.alpha0);
        else if (m_ >= 1)
          v = std::pow(L, -p_.eps0);
        else
          v = (n_ == 2) ? std::exp2(-std::pow(L, p_.gamma)) : std::pow(L, -p_.eps);
        break;
      case Kind::tau:
        if (m_ == 0)
          v = (n_ == 2) ? std::exp(-std::pow(L, 0.5 + p_.alpha)) : std::exp(-std::pow(L, p_.alpha));
        else if (m_ == n_ - 2)
          v = std::exp(-p_.C * L / std::log(L > 2.0 ? L : 2.0));
        else
          v = std::exp(-std::pow(L, 1.0 - p_.theta));
        break;
    }
    return std::min(v, 1.0);
  }

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int m() const { return m_; }
  const RateParams& params() const { return p_; }

private:
  static void validate_common(int n, int /*m*/, const RateParams& p) {
    require_input(n >= 2, "RateFunction: n must be >= 2");
    require_input(p.gamma > 0.0 && p.gamma < 0.5, "RateFunction: gamma must lie in (0, 1/2)");
    require_input(p.alpha0 > 0.0 && p.alpha0 < 1.0, "RateFunction: alpha0 must lie in (0, 1)");
    require_input(p.eps0 > 0.0, "RateFunction: eps0 must be positive");
    if (n >= 3 && p.eps != 0.0)
      require_input(p.eps > 0.0 && p.eps < 2.0 / (n - 2),
                    "RateFunction: eps must lie in (0, 2/(n-2))");
  }

  static RateParams fill_eps(int n, RateParams p) {
    if (p.eps == 0.0) p.eps = 0.9 * std::min(1.0, n > 2 ? 2.0 / (n - 2) : 1.0);
    return p;
  }

  Kind kind_ = Kind::omega;
  int n_ = 2;
  int m_ = 0;
  RateParams p_{};
};

/// Reference extinction rate of the shrinking-ball solution:
/// sqrt(t) * exp(-sqrt(|log t|/2)) in the plane,
/// sqrt(t) * |log t|^(-1/(n-2)) for n >= 3.
inline double radial_extinction_rate(int n, double t) {
  require_input(n >= 2, "radial_extinction_rate: n must be >= 2");
  require_input(t > 0.0 && t < 1.0, "radial_extinction_rate: t must lie in (0, 1)");
  const double L = std::abs(std::log(t));
  if (n == 2) return std::sqrt(t) * std::exp(-std::sqrt(0.5 * L));
  return std::sqrt(t) * std::pow(L, -1.0 / (n - 2));
}

/// Two-sided localization band for the free boundary at time-to-collapse t:
/// inner(t) < |x| < outer(t).
class Envelope {
public:
  enum class Law {
    sqrtlog,      ///< stretched sqrt-log pinch, delta-widened on both sides
    loglog,       ///< log-power outer bound (n >= 3), stretched-exponential inner
    sqrtlog_band  ///< two-sided sqrt-log band with rate constants c1 <= C1
  };

  Envelope(Law law, int n, double delta, double c1 = 1.0, double C1 = 1.0)
      : law_(law), n_(n), delta_(delta), c1_(c1), C1_(C1) {
    require_input(n >= 2, "Envelope: n must be >= 2");
    require_input(c1 > 0.0 && C1 > 0.0, "Envelope: constants must be positive");
    switch (law_) {
      case Law::sqrtlog:
        require_input(delta > 0.0 && delta < 0.5, "Envelope: delta must lie in (0, 1/2)");
        break;
      case Law::loglog:
        require_input(n >= 3, "Envelope: log-power law needs n >= 3");
        require_input(delta > 0.0 && delta < 1.0 / (n - 2),
                      "Envelope: delta must lie in (0, 1/(n-2))");
        break;
      case Law::sqrtlog_band:
        require_input(c1 <= C1, "Envelope: band requires c1 <= C1");
        break;
    }
  }

  double inner(double t) const {
    check_t(t);
    const double L = std::abs(std::log(t));
    switch (law_) {
      case Law::sqrtlog:
        return c1_ * std::sqrt(t) * std::exp(-std::pow(L, 0.5 + delta_));
      case Law::loglog:
        return c1_ * std::sqrt(t) * std::exp(-std::pow(L, delta_));
      case Law::sqrtlog_band:
        return c1_ * std::sqrt(t) * std::exp(-C1_ * std::sqrt(L));
    }
    return 0.0;
  }

  double outer(double t) const {
    check_t(t);
    const double L = std::abs(std::log(t));
    switch (law_) {
      case Law::sqrtlog:
        return C1_ * std::sqrt(t) * std::exp(-std::pow(L, 0.5 - delta_));
      case Law::loglog:
        return C1_ * std::sqrt(t) * std::pow(L, -1.0 / (n_ - 2) + delta_);
      case Law::sqrtlog_band:
        return C1_ * std::sqrt(t) * std::exp(-c1_ * std::sqrt(L));
    }
    return 0.0;
  }

  Law law() const { return law_; }
  int n() const { return n_; }
  double delta() const { return delta_; }
  double c1() const { return c1_; }
  double C1() const { return C1_; }

  static Law parse_law(const std::string& s) {
    if (s == "1.1" || s == "sqrtlog") return Law::sqrtlog;
    if (s == "1.2" || s == "loglog") return Law::loglog;
    if (s == "band" || s == "sqrtlog_band") return Law::sqrtlog_band;
    throw input_error("Envelope: unknown law selector '" + s + "'");
  }

private:
  static void check_t(double t) {
    require_input(t > 0.0 && t < 0.5, "Envelope: t must lie in (0, 1/2)");
  }

  Law law_;
  int n_;
  double delta_;
  double c1_;
  double C1_;
};

} // namespace stefan
