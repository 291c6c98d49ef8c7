#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace lasn {

/// One sample in LIBSVM sparse form: 1-based feature ids, strictly increasing,
/// paired with finite values.
struct SparseVector {
  std::vector<int> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  int max_index() const { return indices.empty() ? 0 : indices.back(); }

  bool operator==(const SparseVector&) const = default;
};

/// <a, b> by two-pointer index merge; no densification.
inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] == b.indices[j]) {
      s += a.values[i] * b.values[j];
      ++i;
      ++j;
    } else if (a.indices[i] < b.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

/// <a, d> against a dense vector indexed from feature id 1. Ids beyond the
/// dense length contribute nothing (the dense vector is zero there).
inline double dot(const SparseVector& a, const std::vector<double>& dense) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.indices.size(); ++t) {
    const int id = a.indices[t];
    if (id <= static_cast<int>(dense.size())) s += a.values[t] * dense[id - 1];
  }
  return s;
}

inline double squared_norm(const SparseVector& a) {
  double s = 0.0;
  for (double v : a.values) s += v * v;
  return s;
}

/// ||a - b||^2 by index merge; accumulates squared differences directly so
/// identical inputs give exactly zero.
inline double squared_distance(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] == b.indices[j]) {
      const double d = a.values[i] - b.values[j];
      s += d * d;
      ++i;
      ++j;
    } else if (a.indices[i] < b.indices[j]) {
      s += a.values[i] * a.values[i];
      ++i;
    } else {
      s += b.values[j] * b.values[j];
      ++j;
    }
  }
  for (; i < a.indices.size(); ++i) s += a.values[i] * a.values[i];
  for (; j < b.indices.size(); ++j) s += b.values[j] * b.values[j];
  return s;
}

/// y[id-1] += c * a for every stored (id, a); y must be long enough.
inline void add_scaled(const SparseVector& a, double c, std::vector<double>& y) {
  for (std::size_t t = 0; t < a.indices.size(); ++t) y[a.indices[t] - 1] += c * a.values[t];
}

/// Dense -> sparse, dropping exact zeros.
inline SparseVector to_sparse(const std::vector<double>& dense) {
  SparseVector v;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      v.indices.push_back(static_cast<int>(i) + 1);
      v.values.push_back(dense[i]);
    }
  }
  return v;
}

}  // namespace lasn
