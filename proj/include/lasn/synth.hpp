#pragma once

#include <cstdint>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/rng.hpp"

namespace lasn {

/// Two seeded Gaussian blobs with means at +/- separation/sqrt(p) per
/// coordinate, alternating labels. Used by the bench command and the test
/// harness; not part of the training pipeline.
inline Dataset make_blobs(int n, int p, std::uint64_t seed, double separation = 2.0) {
  Rng rng(seed);
  Dataset ds;
  ds.n_features = p;
  ds.samples.reserve(n);
  ds.labels.reserve(n);
  const double shift = separation / std::sqrt(static_cast<double>(p));
  for (int i = 0; i < n; ++i) {
    const double label = (i % 2 == 0) ? 1.0 : -1.0;
    SparseVector sv;
    sv.indices.reserve(p);
    sv.values.reserve(p);
    for (int j = 0; j < p; ++j) {
      sv.indices.push_back(j + 1);
      sv.values.push_back(rng.normal() + label * shift);
    }
    ds.samples.push_back(std::move(sv));
    ds.labels.push_back(label);
  }
  return ds;
}

}  // namespace lasn
