#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/matrix.hpp"
#include "lasn/sparse.hpp"

namespace lasn {

enum class KernelKind { rbf, polynomial, sigmoid, linear };

/// The rbf exponent can be read two ways: exp(-d^2/gamma) ("divide", the
/// convention the gamma heuristic below is built for) or exp(-gamma d^2)
/// ("multiply"). Both are selectable; divide is the default.
enum class RbfConvention { divide, multiply };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double gamma = 1.0;
  int degree = 2;
  double alpha = 1.0;
  double beta = 0.0;
  RbfConvention rbf_convention = RbfConvention::divide;
};

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::sigmoid: return "sigmoid";
    case KernelKind::linear: return "linear";
  }
  return "?";
}

inline const char* to_string(RbfConvention c) {
  return c == RbfConvention::divide ? "divide" : "multiply";
}

inline double kernel_eval(const KernelSpec& spec, const SparseVector& x, const SparseVector& y) {
  switch (spec.kind) {
    case KernelKind::rbf: {
      const double d2 = squared_distance(x, y);
      return spec.rbf_convention == RbfConvention::divide ? std::exp(-d2 / spec.gamma)
                                                          : std::exp(-spec.gamma * d2);
    }
    case KernelKind::polynomial:
      return std::pow(1.0 + dot(x, y), spec.degree);
    case KernelKind::sigmoid:
      return std::tanh(spec.alpha * dot(x, y) + spec.beta);
    case KernelKind::linear:
      return dot(x, y);
  }
  return 0.0;
}

/// Average squared distance over the unordered pairs of the first
/// min(n, cap) samples, via the identity
///   sum_{i<j} ||x_i-x_j||^2 = m * sum_i ||x_i||^2 - ||sum_i x_i||^2
/// so the cost is O(m * nnz), not O(m^2). All points identical gives 1.
inline double gamma_heuristic(const Dataset& train, int cap = 20000) {
  if (cap < 2) throw std::invalid_argument("gamma_heuristic: cap must be >= 2");
  if (train.n_samples() < 2) throw std::invalid_argument("gamma_heuristic: need at least 2 samples");
  const std::size_t m = std::min<std::size_t>(train.n_samples(), static_cast<std::size_t>(cap));

  double sum_sq = 0.0;
  std::vector<double> total(train.n_features, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    sum_sq += squared_norm(train.samples[i]);
    add_scaled(train.samples[i], 1.0, total);
  }
  double total_sq = 0.0;
  for (double v : total) total_sq += v * v;

  const double md = static_cast<double>(m);
  const double pair_sum = md * sum_sq - total_sq;
  const double gamma = 2.0 * pair_sum / (md * (md - 1.0));
  // Cancellation can leave a tiny residue where the exact value is zero.
  if (!(gamma > 1e-12 * std::max(1.0, 2.0 * sum_sq / (md - 1.0)))) return 1.0;
  return gamma;
}

/// |A| x |B| kernel matrix. Passing the same vector for A and B yields an
/// exactly symmetric result, each unordered pair evaluated once.
inline DenseMatrix gram_block(const KernelSpec& spec, const std::vector<SparseVector>& a,
                              const std::vector<SparseVector>& b) {
  const int ra = static_cast<int>(a.size());
  const int cb = static_cast<int>(b.size());
  DenseMatrix g(ra, cb);
  if (&a == &b) {
    for (int i = 0; i < ra; ++i) {
      for (int j = i; j < cb; ++j) {
        const double v = kernel_eval(spec, a[i], b[j]);
        g(i, j) = v;
        g(j, i) = v;
      }
    }
  } else {
    for (int i = 0; i < ra; ++i)
      for (int j = 0; j < cb; ++j) g(i, j) = kernel_eval(spec, a[i], b[j]);
  }
  return g;
}

}  // namespace lasn
