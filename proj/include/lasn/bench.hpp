#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/kernel.hpp"
#include "lasn/landmark.hpp"
#include "lasn/matrix.hpp"
#include "lasn/nystrom.hpp"
#include "lasn/rng.hpp"
#include "lasn/snewton.hpp"

namespace lasn {

/// Summary over the repeated measurements of one stage: mean and standard
/// deviation mirror how repeated runs are reported; min is the noise-robust
/// statistic used for slope fits.
struct StageStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;

  static StageStats of(const std::vector<double>& samples) {
    StageStats s;
    s.min = samples.front();
    for (double v : samples) {
      s.mean += v;
      s.min = std::min(s.min, v);
    }
    s.mean /= static_cast<double>(samples.size());
    for (double v : samples) s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(s.stddev / static_cast<double>(samples.size()));
    return s;
  }
};

/// Wall-clock timing of the training stages for one landmark count.
struct StageTiming {
  int k = 0;
  StageStats kmeans, gram, eig, product, solve;
};

namespace detail {

inline double tick() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace detail

/// Times each stage of the training pipeline for every requested k.
inline std::vector<StageTiming> bench_pipeline(const Dataset& data, const std::vector<int>& ks,
                                               int repeats, double c, std::uint64_t seed) {
  std::vector<StageTiming> out;
  for (int k : ks) {
    std::vector<double> t_kmeans, t_gram, t_eig, t_product, t_solve;
    for (int rep = 0; rep < repeats; ++rep) {
      double t0 = detail::tick();
      LandmarkSet landmarks = kmeans_landmarks(data, k, 5, 20000, seed + rep);
      double t1 = detail::tick();

      const std::vector<SparseVector> centers = landmarks_as_sparse(landmarks);
      const DenseMatrix k_ll = gram_block(KernelSpec{}, centers, centers);
      const DenseMatrix k_rl = gram_block(KernelSpec{}, data.samples, centers);
      double t2 = detail::tick();

      const NystromMap map = build_mapping(k_ll);
      double t3 = detail::tick();

      FeatureBlock features = virtual_features(k_rl, map);
      double t4 = detail::tick();

      features = augment_bias(features);
      SolverConfig config;
      config.C = c;
      solve(features.matrix, data.labels, config);
      double t5 = detail::tick();

      t_kmeans.push_back(t1 - t0);
      t_gram.push_back(t2 - t1);
      t_eig.push_back(t3 - t2);
      t_product.push_back(t4 - t3);
      t_solve.push_back(t5 - t4);
    }
    StageTiming timing;
    timing.k = k;
    timing.kmeans = StageStats::of(t_kmeans);
    timing.gram = StageStats::of(t_gram);
    timing.eig = StageStats::of(t_eig);
    timing.product = StageStats::of(t_product);
    timing.solve = StageStats::of(t_solve);
    out.push_back(timing);
  }
  return out;
}

/// Least-squares slope of log(t) against log(k).
inline double loglog_slope(const std::vector<double>& ks, const std::vector<double>& ts) {
  const std::size_t n = ks.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(ks[i]);
    const double y = std::log(std::max(ts[i], 1e-12));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nd = static_cast<double>(n);
  return (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
}

/// Time of one generalized-Hessian application as a function of the active
/// set size; the operator touches active rows only, so the cost is linear
/// in |I|.
struct HessianScalingPoint {
  int active_size = 0;
  double seconds = 0.0;  // min over repeats
};

inline std::vector<HessianScalingPoint> bench_hessian_scaling(int n_rows, int dim,
                                                              const std::vector<int>& active_sizes,
                                                              int repeats, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix features(n_rows, dim);
  for (double& v : features.data) v = rng.normal();
  std::vector<double> h(dim);
  for (double& v : h) v = rng.normal();

  std::vector<HessianScalingPoint> out;
  for (int sz : active_sizes) {
    std::vector<int> active(sz);
    for (int i = 0; i < sz; ++i) active[i] = i;
    double best = 0.0;
    volatile double sink = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      const double t0 = detail::tick();
      std::vector<double> v = hessian_apply(features, active, 1.0, h);
      const double t1 = detail::tick();
      sink = sink + v[0];
      best = rep == 0 ? t1 - t0 : std::min(best, t1 - t0);
    }
    out.push_back({sz, best});
  }
  return out;
}

}  // namespace lasn
