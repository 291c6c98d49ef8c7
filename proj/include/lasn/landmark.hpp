#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/rng.hpp"
#include "lasn/sparse.hpp"

namespace lasn {

struct LandmarkSet {
  std::vector<std::vector<double>> centers;  // k dense vectors of dimension p
  int k = 0;
  std::uint64_t seed = 0;
  int iterations_run = 0;
  /// Within-cluster squared distance after each completed Lloyd iteration
  /// (best assignment against the current centers); non-increasing.
  std::vector<double> cost_history;
};

/// Fast approximate k-means over the first min(n, cap) samples: uniform
/// distinct seeding, at most max_iters Lloyd iterations (fewer on a fixed
/// point), squared Euclidean distance. Empty clusters are reseeded to the
/// sample currently farthest from its assigned center. Deterministic given
/// (dataset, k, max_iters, cap, seed).
inline LandmarkSet kmeans_landmarks(const Dataset& train, int k, int max_iters, int cap,
                                    std::uint64_t seed) {
  const int m = static_cast<int>(std::min<std::size_t>(train.n_samples(),
                                                       static_cast<std::size_t>(std::max(cap, 0))));
  if (k < 1 || k > m)
    throw std::invalid_argument("kmeans_landmarks: k out of range [1, min(n, cap)]");
  const int p = train.n_features;

  auto densify = [&](const SparseVector& sv) {
    std::vector<double> c(p, 0.0);
    add_scaled(sv, 1.0, c);
    return c;
  };

  LandmarkSet out;
  out.k = k;
  out.seed = seed;

  Rng rng(seed);
  const std::vector<int> init = rng.sample_without_replacement(m, k);
  out.centers.reserve(k);
  for (int c = 0; c < k; ++c) out.centers.push_back(densify(train.samples[init[c]]));

  std::vector<double> sample_sq(m);
  for (int i = 0; i < m; ++i) sample_sq[i] = squared_norm(train.samples[i]);

  std::vector<double> center_sq(k);
  auto refresh_center_sq = [&] {
    for (int c = 0; c < k; ++c) {
      double s = 0.0;
      for (double v : out.centers[c]) s += v * v;
      center_sq[c] = s;
    }
  };
  refresh_center_sq();

  std::vector<int> assign(m, -1), prev_assign;
  std::vector<double> assign_dist(m, 0.0);

  for (int iter = 0; iter < max_iters; ++iter) {
    prev_assign = assign;
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sample_sq[i] + center_sq[c] - 2.0 * dot(train.samples[i], out.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
      assign_dist[i] = best_d;
    }
    if (iter > 0 && assign == prev_assign) break;  // fixed point

    std::vector<int> count(k, 0);
    std::vector<std::vector<double>> sum(k, std::vector<double>(p, 0.0));
    for (int i = 0; i < m; ++i) {
      add_scaled(train.samples[i], 1.0, sum[assign[i]]);
      ++count[assign[i]];
    }

    std::vector<int> empties;
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) {
        empties.push_back(c);
      } else {
        for (int j = 0; j < p; ++j) out.centers[c][j] = sum[c][j] / count[c];
      }
    }
    if (!empties.empty()) {
      std::vector<int> by_dist(m);
      std::iota(by_dist.begin(), by_dist.end(), 0);
      std::stable_sort(by_dist.begin(), by_dist.end(),
                       [&](int a, int b) { return assign_dist[a] > assign_dist[b]; });
      for (std::size_t e = 0; e < empties.size(); ++e)
        out.centers[empties[e]] = densify(train.samples[by_dist[e]]);
    }
    refresh_center_sq();
    ++out.iterations_run;

    double cost = 0.0;
    for (int i = 0; i < m; ++i) {
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c)
        best_d = std::min(best_d,
                          sample_sq[i] + center_sq[c] - 2.0 * dot(train.samples[i], out.centers[c]));
      cost += std::max(best_d, 0.0);
    }
    out.cost_history.push_back(cost);
  }
  return out;
}

/// Landmark centers as sparse vectors, ready for Gram-block evaluation.
inline std::vector<SparseVector> landmarks_as_sparse(const LandmarkSet& set) {
  std::vector<SparseVector> out;
  out.reserve(set.centers.size());
  for (const auto& c : set.centers) out.push_back(to_sparse(c));
  return out;
}

}  // namespace lasn
