#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "lasn/errors.hpp"
#include "lasn/matrix.hpp"

namespace lasn {

/// Eigenvalues sorted descending; eigenvector columns aligned with them.
struct EigResult {
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;
};

namespace detail {

inline double offdiag_mass(const DenseMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

/// Spectral decomposition of a symmetric matrix by cyclic Jacobi sweeps.
/// Converged when the off-diagonal Frobenius mass drops below 1e-12 * ||S||_F.
/// Eigenvector sign convention: first nonzero component positive, so results
/// are deterministic and serializable.
inline EigResult sym_eig(const DenseMatrix& s) {
  if (s.rows != s.cols) throw DimensionError("sym_eig: matrix not square");
  const int n = s.rows;
  const double norm = frobenius_norm(s);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-12 * std::max(1.0, norm))
        throw DimensionError("sym_eig: matrix not symmetric");

  DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const double stop = 1e-12 * norm;
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && detail::offdiag_mass(a) > stop; ++sweep) {
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p), arq = a(r, q);
            a(r, p) = a(p, r) = c * arp - sn * arq;
            a(r, q) = a(q, r) = sn * arp + c * arq;
          }
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - sn * vrq;
          v(r, q) = sn * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });

  EigResult res;
  res.eigenvalues.resize(n);
  res.eigenvectors = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    res.eigenvalues[j] = a(src, src);
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      if (v(i, src) != 0.0) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) res.eigenvectors(i, j) = sign * v(i, src);
  }
  return res;
}

struct CgResult {
  std::vector<double> x;
  int iters = 0;
  double residual_norm = 0.0;
  bool truncated = false;
};

/// Conjugate gradient for an abstract SPD operator, started from zero.
/// Stops when the true residual ||apply(x) - b|| falls to tol; hitting
/// max_iter returns the best iterate with the truncated flag set.
inline CgResult cg_solve(const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                         const std::vector<double>& b, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be positive");
  const std::size_t n = b.size();

  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  auto check_finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) throw SolverError("cg_solve: non-finite value encountered");
  };

  CgResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r = b;
  res.residual_norm = norm(r);
  if (res.residual_norm <= tol) return res;

  std::vector<double> p = r;
  double rs = res.residual_norm * res.residual_norm;

  while (res.iters < max_iter) {
    std::vector<double> ap = apply(p);
    check_finite(ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!std::isfinite(pap) || pap <= 0.0)
      throw SolverError("cg_solve: operator not positive definite on search direction");
    const double alpha = rs / pap;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    check_finite(res.x);
    ++res.iters;

    double rs_new = 0.0;
    for (double x : r) rs_new += x * x;
    if (std::sqrt(rs_new) <= tol) {
      // Recurrence says converged; confirm against the true residual and
      // restart if roundoff drifted it above tol.
      std::vector<double> ax = apply(res.x);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
      rs_new = 0.0;
      for (double x : r) rs_new += x * x;
      res.residual_norm = std::sqrt(rs_new);
      if (res.residual_norm <= tol) return res;
      p = r;
      rs = rs_new;
      continue;
    }
    const double beta = rs_new / rs;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs = rs_new;
  }

  std::vector<double> ax = apply(res.x);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - ax[i];
    s += d * d;
  }
  res.residual_norm = std::sqrt(s);
  res.truncated = res.residual_norm > tol;
  return res;
}

/// Largest absolute eigenvalue by power iteration with the deterministic
/// all-ones start vector.
inline double spectral_norm(const DenseMatrix& s, double tol = 1e-10) {
  if (s.rows != s.cols) throw DimensionError("spectral_norm: matrix not square");
  const int n = s.rows;
  if (n == 0) return 0.0;
  const double scale = std::max(1.0, frobenius_norm(s));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale)
        throw DimensionError("spectral_norm: matrix not symmetric");

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double est = 0.0;
  const int max_iters = 10000;
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> w = matvec(s, v);
    double nw = 0.0;
    for (double x : w) nw += x * x;
    nw = std::sqrt(nw);
    if (nw == 0.0) return 0.0;
    const double prev = est;
    est = nw;  // ||S v|| with unit v
    for (int i = 0; i < n; ++i) v[i] = w[i] / nw;
    if (it > 0 && std::abs(est - prev) <= tol * std::max(1.0, est)) break;
  }
  return est;
}

}  // namespace lasn
