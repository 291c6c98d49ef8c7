#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/kernel.hpp"
#include "lasn/linalg.hpp"
#include "lasn/matrix.hpp"
#include "lasn/snewton.hpp"

namespace lasn {

/// Brute-force reference solutions. Everything here favors accuracy over
/// speed and is meant for desk-scale checks only.

struct DualSolution {
  std::vector<double> lambda;
  double objective = 0.0;  // lambda^T e - 0.5 lambda^T Q lambda - ||lambda||^2/(4C)
  int sweeps = 0;
  bool converged = false;
};

/// Cyclic coordinate ascent on the unbiased dual
///   max_{lambda >= 0}  lambda^T e - 0.5 lambda^T Q lambda - ||lambda||^2 / (4C)
/// with exact per-coordinate maximization. Q must come from bias-augmented
/// features (Q_ij = y_i y_j (kappa(x_i,x_j) + 1)); the equality constraint of
/// the biased dual has no counterpart here.
inline DualSolution solve_dual_cd(const DenseMatrix& q, double c, double tol = 1e-10,
                                  int max_sweeps = 100000) {
  if (q.rows != q.cols) throw DimensionError("solve_dual_cd: Q not square");
  const int n = q.rows;

  DualSolution sol;
  sol.lambda.assign(n, 0.0);
  std::vector<double> q_lambda(n, 0.0);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      const double grad_i = 1.0 - q_lambda[i] - sol.lambda[i] / (2.0 * c);
      const double denom = q(i, i) + 1.0 / (2.0 * c);
      const double target = std::max(0.0, sol.lambda[i] + grad_i / denom);
      const double delta = target - sol.lambda[i];
      if (delta != 0.0) {
        sol.lambda[i] = target;
        const double* qi = q.row(i);
        for (int t = 0; t < n; ++t) q_lambda[t] += delta * qi[t];
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    ++sol.sweeps;
    if (max_change < tol) {
      sol.converged = true;
      break;
    }
  }

  double lq = 0.0, lsq = 0.0, lsum = 0.0;
  for (int i = 0; i < n; ++i) {
    lq += sol.lambda[i] * q_lambda[i];
    lsq += sol.lambda[i] * sol.lambda[i];
    lsum += sol.lambda[i];
  }
  sol.objective = lsum - 0.5 * lq - lsq / (4.0 * c);
  return sol;
}

/// w = sum_i lambda_i y_i x_i over the (augmented) feature rows.
inline std::vector<double> recover_primal_w(const std::vector<double>& lambda,
                                            const DenseMatrix& features,
                                            const std::vector<double>& labels) {
  if (static_cast<int>(lambda.size()) != features.rows)
    throw DimensionError("recover_primal_w: lambda length != sample count");
  std::vector<double> w(features.cols, 0.0);
  for (int i = 0; i < features.rows; ++i) {
    const double coef = lambda[i] * labels[i];
    if (coef == 0.0) continue;
    const double* xi = features.row(i);
    for (int j = 0; j < features.cols; ++j) w[j] += coef * xi[j];
  }
  return w;
}

/// Max violation across the KKT system of the unbiased problem:
/// stationarity, complementarity, and sign feasibility, with
/// xi_i = max(0, 1 - y_i x_i^T w) and mu = 2C xi - lambda.
inline double kkt_residual(const std::vector<double>& w, const std::vector<double>& lambda,
                           const DenseMatrix& features, const std::vector<double>& labels,
                           double c) {
  const int n = features.rows;
  double res = 0.0;

  std::vector<double> recovered = recover_primal_w(lambda, features, labels);
  for (int j = 0; j < features.cols; ++j) res = std::max(res, std::abs(w[j] - recovered[j]));

  for (int i = 0; i < n; ++i) {
    const double* xi_row = features.row(i);
    double s = 0.0;
    for (int j = 0; j < features.cols; ++j) s += xi_row[j] * w[j];
    const double slack = 1.0 - labels[i] * s;          // 1 - y_i x_i^T w
    const double xi = std::max(0.0, slack);            // primal-feasible by construction
    const double mu = 2.0 * c * xi - lambda[i];
    res = std::max(res, std::abs(mu * xi));            // mu_i xi_i = 0
    res = std::max(res, std::abs(lambda[i] * (xi - slack)));  // lambda_i (xi_i - 1 + y_i x_i^T w) = 0
    res = std::max(res, -mu);                          // mu >= 0
    res = std::max(res, -lambda[i]);                   // lambda >= 0
    res = std::max(res, slack - xi);                   // xi >= 1 - y_i x_i^T w
  }
  return res;
}

/// Pivoted symmetric square root of a PSD matrix: K = F F^T with columns
/// chosen by diagonal pivoting. An alternative full-rank decomposition used
/// to exercise decomposition invariance.
inline DenseMatrix pivoted_cholesky_psd(const DenseMatrix& k, double rel_tol = 1e-12) {
  if (k.rows != k.cols) throw DimensionError("pivoted_cholesky_psd: matrix not square");
  const int n = k.rows;
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = k(i, i);
  double max0 = 0.0;
  for (double v : diag) max0 = std::max(max0, v);

  DenseMatrix f(n, n);  // trailing columns stay zero when rank < n
  std::vector<int> pivots;
  for (int col = 0; col < n; ++col) {
    int piv = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (diag[i] > best) {
        best = diag[i];
        piv = i;
      }
    }
    if (best <= rel_tol * std::max(max0, 1e-300)) break;

    const double root = std::sqrt(best);
    for (int i = 0; i < n; ++i) {
      double s = k(i, piv);
      for (int t = 0; t < col; ++t) s -= f(i, t) * f(piv, t);
      f(i, col) = s / root;
    }
    f(piv, col) = root;  // exact for the pivot row
    for (int i = 0; i < n; ++i) diag[i] = std::max(0.0, diag[i] - f(i, col) * f(i, col));
    diag[piv] = 0.0;
    pivots.push_back(piv);
  }
  return f;
}

struct EquivalenceReport {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double objective_rel_gap = 0.0;
  double w_inf_diff = 0.0;     // solver w vs. dual-recovered w
  double kkt = 0.0;            // KKT residual at the dual solution
  bool labels_match = false;   // linear route vs. kernel route, all test points
  int label_mismatches = 0;
  bool alt_decomposition_labels_match = false;  // eig factor vs. pivoted root
  std::vector<double> linear_labels;
  std::vector<double> kernel_labels;
};

/// Executes the equivalence theorem on a small instance: the exact
/// full-kernel decomposition route (linear SVM on F_r via the Newton solver)
/// against the kernel dual route (coordinate ascent on Q), comparing
/// objectives, weights, and test labels. Also re-runs the linear route on a
/// pivoted-root decomposition to exercise decomposition invariance.
inline EquivalenceReport check_equivalence(const Dataset& train, const Dataset& test,
                                           const KernelSpec& spec, double c,
                                           const SolverConfig& base_config = SolverConfig{}) {
  const int n = static_cast<int>(train.n_samples());
  const int m = static_cast<int>(test.n_samples());
  if (n + m > 500)
    throw std::invalid_argument("check_equivalence: limited to n + m <= 500 samples");
  if (n == 0) throw std::invalid_argument("check_equivalence: empty training set");

  std::vector<SparseVector> all;
  all.reserve(n + m);
  all.insert(all.end(), train.samples.begin(), train.samples.end());
  all.insert(all.end(), test.samples.begin(), test.samples.end());

  const DenseMatrix k_full = gram_block(spec, all, all);
  EigResult eig = sym_eig(k_full);
  const double top = std::max(eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front(), 0.0);
  if (!eig.eigenvalues.empty() && eig.eigenvalues.back() < -1e-8 * std::max(top, 1.0))
    throw std::invalid_argument("check_equivalence: kernel matrix not PSD to tolerance");

  const int nm = n + m;
  DenseMatrix factor(nm, nm);
  for (int j = 0; j < nm; ++j) {
    const double root = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
    for (int i = 0; i < nm; ++i) factor(i, j) = eig.eigenvectors(i, j) * root;
  }

  SolverConfig config = base_config;
  config.C = c;

  auto linear_route = [&](const DenseMatrix& fac, std::vector<double>* w_out,
                          double* obj_out) -> std::vector<double> {
    DenseMatrix f_r(n, fac.cols);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < fac.cols; ++j) f_r(i, j) = fac(i, j);
    FeatureBlock aug = augment_bias(FeatureBlock{f_r, FeatureRole::train});
    SolverReport rep = solve(aug.matrix, train.labels, config);
    if (w_out) *w_out = rep.w;
    if (obj_out) *obj_out = objective(rep.w, aug.matrix, train.labels, c);
    std::vector<double> labels(m);
    for (int e = 0; e < m; ++e) {
      double s = rep.w[fac.cols];  // bias column
      for (int j = 0; j < fac.cols; ++j) s += fac(n + e, j) * rep.w[j];
      labels[e] = s >= 0.0 ? 1.0 : -1.0;
    }
    return labels;
  };

  EquivalenceReport rep;
  std::vector<double> w_lin;
  rep.linear_labels = linear_route(factor, &w_lin, &rep.primal_objective);

  // Kernel route: dual on Q_ij = y_i y_j (K_ij + 1); the +1 mirrors the bias
  // column of the linear route.
  DenseMatrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      q(i, j) = train.labels[i] * train.labels[j] * (k_full(i, j) + 1.0);
  DualSolution dual = solve_dual_cd(q, c);
  rep.dual_objective = dual.objective;
  rep.objective_rel_gap = std::abs(rep.primal_objective - rep.dual_objective) /
                          std::max(1.0, std::abs(rep.primal_objective));

  rep.kernel_labels.resize(m);
  for (int e = 0; e < m; ++e) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += dual.lambda[i] * train.labels[i] * (k_full(i, n + e) + 1.0);
    rep.kernel_labels[e] = s >= 0.0 ? 1.0 : -1.0;
  }

  rep.label_mismatches = 0;
  for (int e = 0; e < m; ++e)
    if (rep.linear_labels[e] != rep.kernel_labels[e]) ++rep.label_mismatches;
  rep.labels_match = rep.label_mismatches == 0;

  // Weight comparison in the augmented eigen-factor coordinates.
  DenseMatrix aug_fr(n, nm + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nm; ++j) aug_fr(i, j) = factor(i, j);
    aug_fr(i, nm) = 1.0;
  }
  std::vector<double> w_dual = recover_primal_w(dual.lambda, aug_fr, train.labels);
  rep.w_inf_diff = 0.0;
  for (int j = 0; j <= nm; ++j)
    rep.w_inf_diff = std::max(rep.w_inf_diff, std::abs(w_lin[j] - w_dual[j]));
  rep.kkt = kkt_residual(w_dual, dual.lambda, aug_fr, train.labels, c);

  const DenseMatrix pivoted = pivoted_cholesky_psd(k_full);
  std::vector<double> alt_labels = linear_route(pivoted, nullptr, nullptr);
  rep.alt_decomposition_labels_match = alt_labels == rep.linear_labels;

  return rep;
}

}  // namespace lasn
