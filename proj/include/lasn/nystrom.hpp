#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lasn/linalg.hpp"
#include "lasn/matrix.hpp"

namespace lasn {

/// Eigenvalues of K_ll below this are treated as zero; the matching columns
/// of the mapping matrix are zeroed instead of dividing by a vanishing root.
inline constexpr double kEigenvalueDropThreshold = 1e-6;

struct NystromMap {
  DenseMatrix mapping;              // k x k, column j zero when retained[j] is false
  std::vector<bool> retained;       // per eigenvalue, descending order
  std::vector<double> eigenvalues;  // of K_ll, descending

  int k() const { return mapping.rows; }
};

enum class FeatureRole { train, test, exact_rank_k };

struct FeatureBlock {
  DenseMatrix matrix;  // rows = samples
  FeatureRole role = FeatureRole::train;
};

/// M = V Lambda^{-1/2} from the spectral decomposition of K_ll, with
/// eigenvalues under the drop threshold contributing zero columns.
inline NystromMap build_mapping(const DenseMatrix& k_ll) {
  EigResult eig = sym_eig(k_ll);
  const int k = k_ll.rows;

  NystromMap map;
  map.eigenvalues = eig.eigenvalues;
  map.retained.resize(k);
  map.mapping = DenseMatrix(k, k);
  for (int j = 0; j < k; ++j) {
    const double lambda = eig.eigenvalues[j];
    map.retained[j] = lambda >= kEigenvalueDropThreshold;
    if (map.retained[j]) {
      const double inv_root = 1.0 / std::sqrt(lambda);
      for (int i = 0; i < k; ++i) map.mapping(i, j) = eig.eigenvectors(i, j) * inv_root;
    }
  }
  return map;
}

/// F = K_xl * M: virtual features for the rows of K_xl.
inline FeatureBlock virtual_features(const DenseMatrix& k_xl, const NystromMap& map,
                                     FeatureRole role = FeatureRole::train) {
  if (k_xl.cols != map.k()) throw DimensionError("virtual_features: K_xl columns != landmark count");
  return FeatureBlock{matmul(k_xl, map.mapping), role};
}

/// Best rank-k factor of a PSD matrix: top-k eigenvectors scaled by the
/// square roots of their eigenvalues (negative roundoff clamped to zero).
/// Desk-scale only.
inline FeatureBlock exact_rank_k_features(const DenseMatrix& k_rr, int k) {
  if (k < 1 || k > k_rr.rows) throw std::invalid_argument("exact_rank_k_features: k out of range");
  EigResult eig = sym_eig(k_rr);
  const int n = k_rr.rows;

  FeatureBlock block;
  block.role = FeatureRole::exact_rank_k;
  block.matrix = DenseMatrix(n, k);
  for (int j = 0; j < k; ++j) {
    const double root = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
    for (int i = 0; i < n; ++i) block.matrix(i, j) = eig.eigenvectors(i, j) * root;
  }
  return block;
}

}  // namespace lasn
