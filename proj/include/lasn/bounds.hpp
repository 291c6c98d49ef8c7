#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/kernel.hpp"
#include "lasn/landmark.hpp"
#include "lasn/linalg.hpp"
#include "lasn/matrix.hpp"
#include "lasn/nystrom.hpp"
#include "lasn/snewton.hpp"

namespace lasn {

/// Everything the approximation-error bounds consume. Eigenvalue lists are
/// descending; C0 is the aggregate cost C * n; rho bounds the kernel
/// diagonals and G the training scores of both models.
struct BoundInputs {
  std::vector<double> exact_eigenvalues;   // of K_rr, length n
  std::vector<double> approx_eigenvalues;  // top-k of K_tilde_rr
  double xi_f = 0.0;
  double xi_2 = 0.0;
  int k = 0;
  double C0 = 0.0;
  double rho = 0.0;
  double G = 0.0;
};

struct BoundReport {
  double e_f = 0.0;
  double e_2 = 0.0;
  double tr_A = 0.0;
  double lemma_ff = 0.0;   // feature-gap bound
  double prop_wf = 0.0;    // weight-gap bound from the measured feature gap
  double theorem3 = 0.0;   // weight-gap bound through the feature-gap bound
  double measured_gap = 0.0;     // ||F^(k) R - F_tilde||_F after alignment
  double w_diff_sq = 0.0;        // ||R^T w - w_tilde||^2
};

/// (xi_f, xi_2): Frobenius and spectral gaps between the exact and the
/// Nystrom-approximated kernel matrix. Desk scale.
inline std::pair<double, double> compute_gaps(const DenseMatrix& k_rr,
                                              const DenseMatrix& k_rr_tilde,
                                              double spectral_tol = 1e-10) {
  if (k_rr.rows != k_rr_tilde.rows || k_rr.cols != k_rr_tilde.cols)
    throw DimensionError("compute_gaps: shapes disagree");
  const DenseMatrix diff = subtract(k_rr, k_rr_tilde);
  return {frobenius_norm(diff), spectral_norm(diff, spectral_tol)};
}

/// e_f = sqrt(sum_{i>k} lambda_i^2) + xi_f,  e_2 = lambda_{k+1} + xi_2
/// (lambda_{k+1} = 0 when k = n).
inline std::pair<double, double> compute_e(const std::vector<double>& lambda, int k, double xi_f,
                                           double xi_2) {
  double tail_sq = 0.0;
  for (std::size_t i = static_cast<std::size_t>(k); i < lambda.size(); ++i)
    tail_sq += lambda[i] * lambda[i];
  const double next = static_cast<std::size_t>(k) < lambda.size() ? lambda[k] : 0.0;
  return {std::sqrt(tail_sq) + xi_f, next + xi_2};
}

/// A_ii = max(1/lt_i + 1/l_i, 3/lt_i - 1/l_i) per retained index; any
/// non-positive eigenvalue degenerates the whole trace to +inf.
inline std::pair<std::vector<double>, double> compute_A(const std::vector<double>& lambda_topk,
                                                        const std::vector<double>& tilde_topk) {
  const std::size_t k = std::min(lambda_topk.size(), tilde_topk.size());
  std::vector<double> a(k, std::numeric_limits<double>::infinity());
  double trace = 0.0;
  bool degenerate = false;
  for (std::size_t i = 0; i < k; ++i) {
    const double l = lambda_topk[i];
    const double lt = tilde_topk[i];
    if (l <= 0.0 || lt <= 0.0) {
      degenerate = true;
      continue;
    }
    a[i] = std::max(1.0 / lt + 1.0 / l, 3.0 / lt - 1.0 / l);
    trace += a[i];
  }
  if (degenerate) trace = std::numeric_limits<double>::infinity();
  return {std::move(a), trace};
}

/// Right-hand side of the feature-gap lemma:
///   k e_f^{1/4} + lambda_1 tr(A)
///   + k e_2 tr(Lt_(k)^{-1}) (e_f^{1/4} + tr(L_(k)^2)^{1/4})
inline double lemma_ff_bound(const BoundInputs& in) {
  const auto [e_f, e_2] = compute_e(in.exact_eigenvalues, in.k, in.xi_f, in.xi_2);
  const double lambda1 = in.exact_eigenvalues.empty() ? 0.0 : in.exact_eigenvalues.front();

  std::vector<double> lambda_topk(in.exact_eigenvalues.begin(),
                                  in.exact_eigenvalues.begin() +
                                      std::min<std::size_t>(in.k, in.exact_eigenvalues.size()));
  const auto [a_diag, tr_a] = compute_A(lambda_topk, in.approx_eigenvalues);
  (void)a_diag;

  double inv_trace = 0.0;
  bool degenerate = false;
  for (std::size_t i = 0; i < std::min<std::size_t>(in.k, in.approx_eigenvalues.size()); ++i) {
    if (in.approx_eigenvalues[i] <= 0.0) {
      degenerate = true;
      break;
    }
    inv_trace += 1.0 / in.approx_eigenvalues[i];
  }
  if (degenerate || !std::isfinite(tr_a)) return std::numeric_limits<double>::infinity();

  double sq_trace = 0.0;
  for (double l : lambda_topk) sq_trace += l * l;

  const double kd = static_cast<double>(in.k);
  const double ef_q = std::pow(std::max(e_f, 0.0), 0.25);
  return kd * ef_q + lambda1 * tr_a +
         kd * e_2 * inv_trace * (ef_q + std::pow(std::max(sq_trace, 0.0), 0.25));
}

inline double bound_prefactor(const BoundInputs& in) {
  return 4.0 * in.C0 * in.C0 * in.G * (in.G + 1.0) * std::sqrt(std::max(in.rho, 0.0));
}

/// ||w - w_tilde||^2 <= prefactor * (feature-gap lemma value).
inline double theorem3_bound(const BoundInputs& in) {
  return bound_prefactor(in) * lemma_ff_bound(in);
}

/// ||w - w_tilde||^2 <= prefactor * measured ||F^(k) - F_tilde||.
inline double prop_wf_bound(const BoundInputs& in, double measured_gap) {
  return bound_prefactor(in) * measured_gap;
}

/// (rho, G) from the finite feature maps: rho bounds the per-sample kernel
/// diagonals (squared row norms), G the absolute training scores of the two
/// trained models.
inline std::pair<double, double> estimate_assumption_constants(const DenseMatrix& f_exact,
                                                               const DenseMatrix& f_tilde,
                                                               const std::vector<double>& w_exact,
                                                               const std::vector<double>& w_tilde) {
  double rho = 0.0, g = 0.0;
  for (int i = 0; i < f_exact.rows; ++i) {
    const double* row = f_exact.row(i);
    double sq = 0.0, score = 0.0;
    for (int j = 0; j < f_exact.cols; ++j) {
      sq += row[j] * row[j];
      score += row[j] * w_exact[j];
    }
    rho = std::max(rho, sq);
    g = std::max(g, std::abs(score));
  }
  for (int i = 0; i < f_tilde.rows; ++i) {
    const double* row = f_tilde.row(i);
    double sq = 0.0, score = 0.0;
    for (int j = 0; j < f_tilde.cols; ++j) {
      sq += row[j] * row[j];
      score += row[j] * w_tilde[j];
    }
    rho = std::max(rho, sq);
    g = std::max(g, std::abs(score));
  }
  return {rho, g};
}

namespace detail {

/// Thin SVD of a square matrix via eigendecompositions, accurate enough for
/// the desk-scale Procrustes alignment below.
struct SquareSvd {
  DenseMatrix u, v;
  std::vector<double> sigma;
};

inline SquareSvd svd_square(const DenseMatrix& g) {
  const int k = g.rows;
  const DenseMatrix gtg = matmul(transpose(g), g);
  EigResult eig = sym_eig(gtg);

  SquareSvd out;
  out.v = eig.eigenvectors;
  out.sigma.resize(k);
  out.u = DenseMatrix(k, k);

  double sig_max = 0.0;
  for (int j = 0; j < k; ++j) {
    out.sigma[j] = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
    sig_max = std::max(sig_max, out.sigma[j]);
  }
  const double tol = std::max(sig_max, 1.0) * 1e-12;

  int filled = 0;
  for (int j = 0; j < k; ++j) {
    if (out.sigma[j] <= tol) break;
    for (int i = 0; i < k; ++i) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += g(i, t) * out.v(t, j);
      out.u(i, j) = s / out.sigma[j];
    }
    ++filled;
  }
  // Orthonormal completion of U for the null space, Gram-Schmidt against the
  // standard basis.
  for (int j = filled; j < k; ++j) {
    for (int cand = 0; cand < k; ++cand) {
      std::vector<double> col(k, 0.0);
      col[cand] = 1.0;
      for (int t = 0; t < j; ++t) {
        double proj = 0.0;
        for (int i = 0; i < k; ++i) proj += out.u(i, t) * col[i];
        for (int i = 0; i < k; ++i) col[i] -= proj * out.u(i, t);
      }
      double norm = 0.0;
      for (double v : col) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (int i = 0; i < k; ++i) out.u(i, j) = col[i] / norm;
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Orthogonal R minimizing ||A R - B||_F (feature maps agree only up to an
/// orthogonal transformation, so gaps are measured after this alignment).
inline DenseMatrix procrustes_rotation(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw DimensionError("procrustes_rotation: shapes disagree");
  const DenseMatrix g = matmul(transpose(a), b);
  detail::SquareSvd svd = detail::svd_square(g);
  return matmul(svd.u, transpose(svd.v));
}

/// One full bound experiment on a desk-scale dataset: trains the exact
/// rank-k model and the Nystrom model (both unbiased), measures the aligned
/// feature and weight gaps, and evaluates every bound of the error analysis.
struct BoundExperiment {
  BoundInputs inputs;
  BoundReport report;
  bool prop_wf_holds = false;
  bool theorem3_consistent = false;  // lemma_ff >= gap implies theorem3 >= prop_wf
};

inline BoundExperiment run_bound_experiment(const Dataset& train_data, const KernelSpec& spec,
                                            double c, int k, std::uint64_t seed,
                                            const SolverConfig& base_config = SolverConfig{}) {
  const int n = static_cast<int>(train_data.n_samples());
  if (n > 2000) throw std::invalid_argument("run_bound_experiment: limited to n <= 2000");
  if (k < 1 || k > n) throw std::invalid_argument("run_bound_experiment: k out of range");

  const DenseMatrix k_rr = gram_block(spec, train_data.samples, train_data.samples);

  LandmarkSet landmarks = kmeans_landmarks(train_data, k, 5, 20000, seed);
  const std::vector<SparseVector> centers = landmarks_as_sparse(landmarks);
  const DenseMatrix k_ll = gram_block(spec, centers, centers);
  const DenseMatrix k_rl = gram_block(spec, train_data.samples, centers);
  const NystromMap map = build_mapping(k_ll);
  const DenseMatrix f_tilde = virtual_features(k_rl, map).matrix;          // n x k
  const DenseMatrix k_rr_tilde = matmul_transb(f_tilde, f_tilde);         // n x n

  BoundExperiment exp;
  exp.inputs.k = k;
  exp.inputs.C0 = c * static_cast<double>(n);
  std::tie(exp.inputs.xi_f, exp.inputs.xi_2) = compute_gaps(k_rr, k_rr_tilde);

  exp.inputs.exact_eigenvalues = sym_eig(k_rr).eigenvalues;
  {
    const EigResult tilde_eig = sym_eig(k_rr_tilde);
    exp.inputs.approx_eigenvalues.assign(tilde_eig.eigenvalues.begin(),
                                         tilde_eig.eigenvalues.begin() + k);
  }

  const DenseMatrix f_exact = exact_rank_k_features(k_rr, k).matrix;  // n x k

  SolverConfig config = base_config;
  config.C = c;
  const std::vector<double> w_exact = solve(f_exact, train_data.labels, config).w;
  const std::vector<double> w_tilde = solve(f_tilde, train_data.labels, config).w;

  const DenseMatrix rot = procrustes_rotation(f_exact, f_tilde);
  exp.report.measured_gap = frobenius_norm(subtract(matmul(f_exact, rot), f_tilde));

  std::vector<double> w_aligned = matvec(transpose(rot), w_exact);
  double diff_sq = 0.0;
  for (int j = 0; j < k; ++j) {
    const double d = w_aligned[j] - w_tilde[j];
    diff_sq += d * d;
  }
  exp.report.w_diff_sq = diff_sq;

  std::tie(exp.inputs.rho, exp.inputs.G) =
      estimate_assumption_constants(f_exact, f_tilde, w_exact, w_tilde);

  std::tie(exp.report.e_f, exp.report.e_2) =
      compute_e(exp.inputs.exact_eigenvalues, k, exp.inputs.xi_f, exp.inputs.xi_2);
  {
    std::vector<double> lambda_topk(exp.inputs.exact_eigenvalues.begin(),
                                    exp.inputs.exact_eigenvalues.begin() + k);
    exp.report.tr_A = compute_A(lambda_topk, exp.inputs.approx_eigenvalues).second;
  }
  exp.report.lemma_ff = lemma_ff_bound(exp.inputs);
  exp.report.prop_wf = prop_wf_bound(exp.inputs, exp.report.measured_gap);
  exp.report.theorem3 = theorem3_bound(exp.inputs);

  exp.prop_wf_holds = exp.report.w_diff_sq <= exp.report.prop_wf;
  exp.theorem3_consistent =
      !(exp.report.lemma_ff >= exp.report.measured_gap) || exp.report.theorem3 >= exp.report.prop_wf;
  return exp;
}

}  // namespace lasn
