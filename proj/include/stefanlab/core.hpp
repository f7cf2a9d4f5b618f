#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stefanlab/errors.hpp"
#include "stefanlab/linalg.hpp"

namespace stefan {

/// Space-time point (x, t) with x in R^n, n >= 2.
struct ParaPoint {
  std::vector<double> x;
  double t = 0.0;

  ParaPoint() = default;
  ParaPoint(std::vector<double> x_, double t_) : x(std::move(x_)), t(t_) {
    require_input(x.size() >= 2, "ParaPoint: dimension must be >= 2");
  }

  int n() const { return static_cast<int>(x.size()); }

  double space_norm() const {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  }
};

/// Parabolic distance: sqrt(|x - y|^2 + |t - s|).
inline double para_dist(const ParaPoint& p, const ParaPoint& q) {
  require_input(p.n() == q.n(), "para_dist: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < p.n(); ++i) {
    double d = p.x[i] - q.x[i];
    s += d * d;
  }
  return std::sqrt(s + std::abs(p.t - q.t));
}

/// Backward cylinder B_r(x0) x (t0 - r^2, t0]: open ball in space,
/// half-open interval in time including the top slice.
struct ParaCylinder {
  ParaPoint center;
  double radius = 0.0;

  ParaCylinder(ParaPoint c, double r) : center(std::move(c)), radius(r) {
    require_input(radius > 0.0, "ParaCylinder: radius must be positive");
  }

  bool contains(const ParaPoint& p) const {
    require_input(p.n() == center.n(), "ParaCylinder: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < p.n(); ++i) {
      double d = p.x[i] - center.x[i];
      s += d * d;
    }
    if (s >= radius * radius) return false;
    return p.t <= center.t && p.t > center.t - radius * radius;
  }
};

/**
 * Quadratic profile p(x) = (1/2) x . A x with A symmetric positive
 * semidefinite and unit trace.  Construction rejects matrices with an
 * eigenvalue below -1e-10 or |trace - 1| > 1e-10.  The kernel dimension
 * (eigenvalues below 1e-9 * lambda_max) classifies the profile's flat
 * directions and always lies in [0, n-1].
 */
class BlowupPolynomial {
public:
  BlowupPolynomial(std::vector<double> matrix, int n) : n_(n), a_(std::move(matrix)) {
    require_input(n >= 1, "BlowupPolynomial: n must be >= 1");
    require_input(static_cast<int>(a_.size()) == n * n, "BlowupPolynomial: matrix size mismatch");
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        require_input(std::abs(a_[i * n + j] - a_[j * n + i]) <= 1e-12,
                      "BlowupPolynomial: matrix must be symmetric");
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += a_[i * n + i];
    require_input(std::abs(tr - 1.0) <= 1e-10, "BlowupPolynomial: trace must equal 1");
    eigen_ = jacobi_eigen(a_, n);
    require_input(eigen_.values.front() >= -1e-10,
                  "BlowupPolynomial: matrix must be positive semidefinite");
    const double lmax = eigen_.values.back();
    kernel_dim_ = 0;
    for (double lam : eigen_.values)
      if (lam < 1e-9 * lmax) ++kernel_dim_;
    require_input(kernel_dim_ <= n - 1, "BlowupPolynomial: matrix cannot vanish (trace is 1)");
  }

  double eval(std::span<const double> x) const {
    require_input(static_cast<int>(x.size()) == n_, "BlowupPolynomial: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += x[i] * a_[i * n_ + j] * x[j];
    return 0.5 * s;
  }

  int n() const { return n_; }
  int kernel_dim() const { return kernel_dim_; }
  const std::vector<double>& matrix() const { return a_; }
  const std::vector<double>& eigenvalues() const { return eigen_.values; }
  const std::vector<double>& eigenvectors() const { return eigen_.vectors; }

  /// Isotropic profile |x|^2 / (2n).
  static BlowupPolynomial isotropic(int n) {
    std::vector<double> a(n * n, 0.0);
    for (int i = 0; i < n; ++i) a[i * n + i] = 1.0 / n;
    return BlowupPolynomial(std::move(a), n);
  }

private:
  int n_;
  std::vector<double> a_;
  SymEigen eigen_;
  int kernel_dim_ = 0;
};

/**
 * Ancient quadratic caloric profile adapted to a kernel of dimension m:
 *
 *   q(x, t) = A t + nu * (x_{m+1}^2 + ... + x_n^2) - sum_{i<=m} nu_i x_i^2
 *
 * with A >= 0, nu >= 0 and the caloric balance A - 2(n-m) nu + 2 sum nu_i = 0
 * enforced to 1e-12.
 */
class AncientCaloricPolynomial {
public:
  AncientCaloricPolynomial(int n, int m, double A, double nu, std::vector<double> nu_i)
      : n_(n), m_(m), A_(A), nu_(nu), nu_i_(std::move(nu_i)) {
    require_input(n >= 2, "AncientCaloricPolynomial: n must be >= 2");
    require_input(m >= 0 && m <= n - 2, "AncientCaloricPolynomial: m must lie in [0, n-2]");
    require_input(static_cast<int>(nu_i_.size()) == m, "AncientCaloricPolynomial: nu_i size mismatch");
    require_input(A >= 0.0, "AncientCaloricPolynomial: A must be nonnegative");
    require_input(nu >= 0.0, "AncientCaloricPolynomial: nu must be nonnegative");
    const double balance = A_ - 2.0 * (n - m) * nu_ + 2.0 * sum_nu_i();
    require_input(std::abs(balance) <= 1e-12,
                  "AncientCaloricPolynomial: caloric balance violated: " + std::to_string(balance));
  }

  double eval(std::span<const double> x, double t) const {
    require_input(static_cast<int>(x.size()) == n_, "AncientCaloricPolynomial: dimension mismatch");
    double s = A_ * t;
    for (int i = 0; i < m_; ++i) s -= nu_i_[i] * x[i] * x[i];
    for (int i = m_; i < n_; ++i) s += nu_ * x[i] * x[i];
    return s;
  }

  /// Heat-operator residual d_t q - Lap q; identically the caloric balance.
  double caloric_residual() const { return A_ - 2.0 * (n_ - m_) * nu_ + 2.0 * sum_nu_i(); }

  int n() const { return n_; }
  int m() const { return m_; }
  double A() const { return A_; }
  double nu() const { return nu_; }
  const std::vector<double>& nu_i() const { return nu_i_; }

private:
  double sum_nu_i() const { return std::accumulate(nu_i_.begin(), nu_i_.end(), 0.0); }

  int n_;
  int m_;
  double A_;
  double nu_;
  std::vector<double> nu_i_;
};

/**
 * Space-time cone domain with an m-dimensional spine:
 *
 *   D = { (xbar, ybar, t) : |ybar| > eta |t|^(1/2) and |ybar| > eta |xbar| }
 *
 * where xbar collects the first m coordinates and ybar the remaining n - m.
 * For m = 0 the second condition is vacuous and ybar = x.  eta in (0, 1/4).
 */
class ConeDomain {
public:
  ConeDomain(int n, int m, double eta) : n_(n), m_(m), eta_(eta) {
    require_input(n >= 2, "ConeDomain: n must be >= 2");
    require_input(m >= 0 && m <= n - 2, "ConeDomain: m must lie in [0, n-2]");
    require_input(eta > 0.0 && eta < 0.25, "ConeDomain: eta must lie in (0, 1/4)");
  }

  int n() const { return n_; }
  int m() const { return m_; }
  double eta() const { return eta_; }

  /// Spine radius |xbar| of a point.
  double spine_norm(const ParaPoint& p) const {
    check_dim(p);
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += p.x[i] * p.x[i];
    return std::sqrt(s);
  }

  /// Transverse radius |ybar| of a point.
  double transverse_norm(const ParaPoint& p) const {
    check_dim(p);
    double s = 0.0;
    for (int i = m_; i < n_; ++i) s += p.x[i] * p.x[i];
    return std::sqrt(s);
  }

  bool contains(const ParaPoint& p) const {
    return contains(spine_norm(p), transverse_norm(p), p.t);
  }

  /// Membership from the reduced coordinates (|xbar|, |ybar|, t).
  bool contains(double spine, double transverse, double t) const {
    if (transverse <= eta_ * std::sqrt(std::abs(t))) return false;
    if (m_ >= 1 && transverse <= eta_ * spine) return false;
    return true;
  }

private:
  void check_dim(const ParaPoint& p) const {
    require_input(p.n() == n_, "ConeDomain: dimension mismatch");
  }

  int n_;
  int m_;
  double eta_;
};

} // namespace stefan
