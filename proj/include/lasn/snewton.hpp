#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lasn/errors.hpp"
#include "lasn/linalg.hpp"
#include "lasn/matrix.hpp"
#include "lasn/nystrom.hpp"

namespace lasn {

struct SolverConfig {
  double C = 1.0;
  double delta = 1e-6;   // stop when ||grad f|| <= delta
  double sigma = 1e-4;   // line-search sufficient-decrease constant, in (0,1)
  double rho = 0.5;      // backtracking factor, in (0,1)
  double eta0 = 0.1;     // forcing-term constants: mu_j = min(eta0, eta1*||grad||)
  double eta1 = 0.1;
  int max_newton_iters = 200;
  int max_cg_iters = 0;  // 0: use the feature dimension
};

struct NewtonIterRecord {
  double grad_norm = 0.0;
  int active_set_size = 0;
  int cg_iters = 0;
  double cg_residual = 0.0;  // ||V d + grad||
  double cg_bound = 0.0;     // mu_j * ||grad||
  double step_size = 0.0;
  double objective = 0.0;         // f after the step
  double objective_decrease = 0.0;  // accepted f(w + alpha d) - f(w), always < 0
};

struct SolverReport {
  std::vector<double> w;
  int newton_iters = 0;
  bool converged = false;
  double final_grad_norm = 0.0;
  std::vector<NewtonIterRecord> iterations;
};

/// Appends the constant-1 bias column.
inline FeatureBlock augment_bias(const FeatureBlock& features) {
  const DenseMatrix& x = features.matrix;
  FeatureBlock out;
  out.role = features.role;
  out.matrix = DenseMatrix(x.rows, x.cols + 1);
  for (int i = 0; i < x.rows; ++i) {
    const double* src = x.row(i);
    double* dst = out.matrix.row(i);
    for (int j = 0; j < x.cols; ++j) dst[j] = src[j];
    dst[x.cols] = 1.0;
  }
  return out;
}

/// f(w) = 0.5 ||w||^2 + C sum_i max(1 - y_i x_i^T w, 0)^2
inline double objective(const std::vector<double>& w, const DenseMatrix& features,
                        const std::vector<double>& labels, double c) {
  if (features.cols != static_cast<int>(w.size()))
    throw DimensionError("objective: w length != feature dimension");
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (int i = 0; i < features.rows; ++i) {
    const double* xi = features.row(i);
    double s = 0.0;
    for (int j = 0; j < features.cols; ++j) s += xi[j] * w[j];
    const double margin = 1.0 - labels[i] * s;
    if (margin > 0.0) loss += margin * margin;
  }
  return 0.5 * reg + c * loss;
}

/// grad f(w) = w - 2C sum_{i in I} (1 - y_i x_i^T w) y_i x_i, with I the
/// strict active set at w.
inline std::vector<double> gradient(const std::vector<double>& w, const DenseMatrix& features,
                                    const std::vector<double>& labels, double c) {
  if (features.cols != static_cast<int>(w.size()))
    throw DimensionError("gradient: w length != feature dimension");
  std::vector<double> g = w;
  for (int i = 0; i < features.rows; ++i) {
    const double* xi = features.row(i);
    double s = 0.0;
    for (int j = 0; j < features.cols; ++j) s += xi[j] * w[j];
    const double margin = 1.0 - labels[i] * s;
    if (margin > 0.0) {
      const double coef = -2.0 * c * margin * labels[i];
      for (int j = 0; j < features.cols; ++j) g[j] += coef * xi[j];
    }
  }
  return g;
}

/// V h = h + 2C sum_{i in I} x_i (x_i^T h), two passes over active rows only;
/// the k x k matrix is never formed.
inline std::vector<double> hessian_apply(const DenseMatrix& features,
                                         const std::vector<int>& active_set, double c,
                                         const std::vector<double>& h) {
  if (features.cols != static_cast<int>(h.size()))
    throw DimensionError("hessian_apply: h length != feature dimension");
  std::vector<double> out = h;
  const double two_c = 2.0 * c;
  for (int i : active_set) {
    const double* xi = features.row(i);
    double t = 0.0;
    for (int j = 0; j < features.cols; ++j) t += xi[j] * h[j];
    t *= two_c;
    for (int j = 0; j < features.cols; ++j) out[j] += t * xi[j];
  }
  return out;
}

/// Globalized semismooth Newton for the unbiased L2-loss linear SVM: inexact
/// CG on a generalized-Hessian element, Armijo backtracking from the unit
/// step, started at w = 0.
inline SolverReport solve(const DenseMatrix& features, const std::vector<double>& labels,
                          const SolverConfig& config) {
  const int n = features.rows;
  const int dim = features.cols;
  if (static_cast<int>(labels.size()) != n)
    throw DimensionError("solve: labels length != sample count");
  if (!(config.C > 0.0) || !(config.delta > 0.0) || !(config.sigma > 0.0 && config.sigma < 1.0) ||
      !(config.rho > 0.0 && config.rho < 1.0) || !(config.eta0 > 0.0) || !(config.eta1 > 0.0))
    throw std::invalid_argument("solve: config out of range");
  const double c = config.C;
  const int max_cg = config.max_cg_iters > 0 ? config.max_cg_iters : dim;

  SolverReport rep;
  rep.w.assign(dim, 0.0);

  std::vector<double> scores(n, 0.0);  // X w, maintained incrementally
  std::vector<double> margins(n);      // 1 - y_i * scores_i
  double f = 0.0;
  for (int i = 0; i < n; ++i) {
    margins[i] = 1.0 - labels[i] * scores[i];
    if (margins[i] > 0.0) f += margins[i] * margins[i];
  }
  f *= c;

  std::vector<double> g(dim), d, xd(n);
  std::vector<int> active;
  active.reserve(n);

  for (int iter = 0; iter <= config.max_newton_iters; ++iter) {
    active.clear();
    for (double& v : g) v = 0.0;
    for (int i = 0; i < n; ++i) {
      margins[i] = 1.0 - labels[i] * scores[i];
      if (margins[i] > 0.0) {
        active.push_back(i);
        const double coef = -2.0 * c * margins[i] * labels[i];
        const double* xi = features.row(i);
        for (int j = 0; j < dim; ++j) g[j] += coef * xi[j];
      }
    }
    for (int j = 0; j < dim; ++j) g[j] += rep.w[j];

    double gnorm = 0.0;
    for (double v : g) gnorm += v * v;
    gnorm = std::sqrt(gnorm);
    if (!std::isfinite(gnorm)) throw SolverError("solve: non-finite gradient");
    rep.final_grad_norm = gnorm;

    if (gnorm <= config.delta) {
      rep.converged = true;
      return rep;
    }
    if (iter == config.max_newton_iters) break;

    const double mu = std::min(config.eta0, config.eta1 * gnorm);
    std::vector<double> rhs(dim);
    for (int j = 0; j < dim; ++j) rhs[j] = -g[j];
    CgResult cg = cg_solve(
        [&](const std::vector<double>& h) { return hessian_apply(features, active, c, h); }, rhs,
        mu * gnorm, max_cg);
    d = std::move(cg.x);

    double gd = 0.0, d_sq = 0.0, wd = 0.0;
    for (int j = 0; j < dim; ++j) {
      gd += g[j] * d[j];
      d_sq += d[j] * d[j];
      wd += rep.w[j] * d[j];
    }
    for (int i = 0; i < n; ++i) {
      const double* xi = features.row(i);
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += xi[j] * d[j];
      xd[i] = s;
    }

    // Armijo test on the objective DIFFERENCE. Near convergence the decrease
    // sits far below one ulp of f itself; per-sample loss differences
    // c*(m + m_new) keep it measurable at any scale.
    double alpha = 1.0;
    double delta_f = 0.0;
    bool accepted = false;
    for (int m = 0; m <= 60; ++m) {
      double loss_diff = 0.0;
      for (int i = 0; i < n; ++i) {
        const double change = -alpha * labels[i] * xd[i];
        const double margin = margins[i];
        const double margin_new = margin + change;
        if (margin > 0.0) {
          loss_diff += margin_new > 0.0 ? change * (margin + margin_new) : -margin * margin;
        } else if (margin_new > 0.0) {
          loss_diff += margin_new * margin_new;
        }
      }
      delta_f = alpha * wd + 0.5 * alpha * alpha * d_sq + c * loss_diff;
      if (delta_f <= config.sigma * alpha * gd) {
        accepted = true;
        break;
      }
      alpha *= config.rho;
    }
    if (!accepted) throw SolverError("solve: line search exceeded 60 backtracks");

    for (int j = 0; j < dim; ++j) rep.w[j] += alpha * d[j];
    for (int i = 0; i < n; ++i) scores[i] += alpha * xd[i];
    f += delta_f;
    ++rep.newton_iters;

    NewtonIterRecord rec;
    rec.grad_norm = gnorm;
    rec.active_set_size = static_cast<int>(active.size());
    rec.cg_iters = cg.iters;
    rec.cg_residual = cg.residual_norm;
    rec.cg_bound = mu * gnorm;
    rec.step_size = alpha;
    rec.objective = f;
    rec.objective_decrease = delta_f;
    rep.iterations.push_back(rec);
  }
  rep.converged = false;
  return rep;
}

}  // namespace lasn
