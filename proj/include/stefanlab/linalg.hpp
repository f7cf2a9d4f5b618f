#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "stefanlab/errors.hpp"

namespace stefan {

/// Eigendecomposition of a small dense symmetric matrix.
struct SymEigen {
  std::vector<double> values;  ///< ascending
  std::vector<double> vectors; ///< column k (row-major n*n) is the k-th eigenvector
};

/// Cyclic Jacobi for symmetric matrices (intended for n <= 8).
/// Rotations are applied in fixed (p, q) order, so the result is deterministic.
inline SymEigen jacobi_eigen(std::vector<double> a, int n) {
  require_input(n >= 1 && static_cast<int>(a.size()) == n * n, "jacobi_eigen: bad matrix size");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      require_input(std::abs(a[i * n + j] - a[j * n + i]) <= 1e-12 * (1.0 + std::abs(a[i * n + j])),
                    "jacobi_eigen: matrix is not symmetric");

  std::vector<double> v(n * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  const double tol = 1e-15 * std::max(scale, 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (std::sqrt(off) <= tol) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::abs(apq) <= tol * 1e-2) continue;
        double app = a[p * n + p], aqq = a[q * n + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEigen out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a[i * n + i];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return out.values[i] < out.values[j]; });
  std::vector<double> sorted_vals(n);
  std::vector<double> sorted_vecs(n * n);
  for (int k = 0; k < n; ++k) {
    sorted_vals[k] = out.values[order[k]];
    for (int r = 0; r < n; ++r) sorted_vecs[r * n + k] = v[r * n + order[k]];
  }
  out.values = std::move(sorted_vals);
  out.vectors = std::move(sorted_vecs);
  return out;
}

/// Symmetric tridiagonal matrix: diagonal d[0..n-1], off-diagonal e[0..n-2].
struct SymTridiag {
  std::vector<double> d;
  std::vector<double> e;
  int size() const { return static_cast<int>(d.size()); }
};

/// Number of eigenvalues strictly below x (Sturm count via LDL recurrence).
inline int sturm_count(const SymTridiag& t, double x) {
  const int n = t.size();
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < n; ++i) {
    double e2 = (i == 0) ? 0.0 : t.e[i - 1] * t.e[i - 1];
    q = t.d[i] - x - (i == 0 ? 0.0 : e2 / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

/// k-th smallest eigenvalue (k = 0 is the smallest) by bisection.
inline double tridiag_eigenvalue(const SymTridiag& t, int k) {
  const int n = t.size();
  require_input(k >= 0 && k < n, "tridiag_eigenvalue: index out of range");
  double lo = t.d[0], hi = t.d[0];
  for (int i = 0; i < n; ++i) {
    double r = (i > 0 ? std::abs(t.e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.e[i]) : 0.0);
    lo = std::min(lo, t.d[i] - r);
    hi = std::max(hi, t.d[i] + r);
  }
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count(t, mid) > k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

/// Solves (T - shift I) x = b with partial pivoting; T symmetric tridiagonal.
inline std::vector<double> tridiag_shifted_solve(const SymTridiag& t, double shift,
                                                 std::vector<double> b) {
  const int n = t.size();
  std::vector<double> dl(n, 0.0), dd(n, 0.0), du(n, 0.0), du2(n, 0.0);
  for (int i = 0; i < n; ++i) {
    dd[i] = t.d[i] - shift;
    if (i > 0) dl[i] = t.e[i - 1];
    if (i + 1 < n) du[i] = t.e[i];
  }
  // LU with row swaps (dgtsv-style).
  for (int i = 0; i < n - 1; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i + 1])) {
      if (dd[i] == 0.0) dd[i] = 1e-300;
      double m = dl[i + 1] / dd[i];
      dd[i + 1] -= m * du[i];
      b[i + 1] -= m * b[i];
      dl[i + 1] = 0.0;
    } else {
      double m = dd[i] / dl[i + 1];
      std::swap(dd[i], dl[i + 1]);
      double tmp = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = tmp - m * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -m * du[i + 1];
      }
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= m * b[i];
      dl[i + 1] = 0.0;
    }
  }
  if (dd[n - 1] == 0.0) dd[n - 1] = 1e-300;
  std::vector<double> x(n);
  x[n - 1] = b[n - 1] / dd[n - 1];
  if (n >= 2) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2];
  for (int i = n - 3; i >= 0; --i)
    x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
  return x;
}

/// Smallest eigenpair of a symmetric tridiagonal matrix:
/// bisection for the value, inverse iteration for the vector.
struct TridiagEigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

inline TridiagEigenPair tridiag_smallest_eigenpair(const SymTridiag& t) {
  const int n = t.size();
  TridiagEigenPair out;
  out.value = tridiag_eigenvalue(t, 0);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(t.d[i]));
  const double shift = out.value - 1e-12 * std::max(scale, 1.0);
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int iter = 0; iter < 4; ++iter) {
    v = tridiag_shifted_solve(t, shift, std::move(v));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    require_numeric(norm > 0.0 && std::isfinite(norm), "inverse iteration broke down");
    for (double& x : v) x /= norm;
  }
  // Fix sign: make the largest-magnitude entry positive.
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0.0)
    for (double& x : v) x = -x;
  out.vector = std::move(v);
  return out;
}

} // namespace stefan
