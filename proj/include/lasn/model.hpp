#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lasn/dataset.hpp"
#include "lasn/errors.hpp"
#include "lasn/kernel.hpp"
#include "lasn/landmark.hpp"
#include "lasn/nystrom.hpp"
#include "lasn/snewton.hpp"

namespace lasn {

struct TrainOptions {
  double C = 10.0;
  int k = 1;
  std::uint64_t seed = 0;
  KernelSpec kernel;
  bool auto_gamma = true;  // replace kernel.gamma with the heuristic (rbf only)
  SolverConfig solver;     // solver.C is overwritten with C
  int kmeans_max_iters = 5;
  int kmeans_cap = 20000;
};

/// Wall-clock seconds of the training stages, in pipeline order.
struct TrainTimings {
  double kmeans = 0.0;
  double gram = 0.0;
  double eig = 0.0;
  double product = 0.0;
  double solve = 0.0;
};

struct LasnModel {
  KernelSpec kernel;
  LandmarkSet landmarks;
  DenseMatrix mapping;          // k x k
  std::vector<double> weights;  // k+1, bias last
  double C = 0.0;
  int k = 0;
  int n_features = 0;
  std::uint64_t seed = 0;
  std::string gamma_source;  // "heuristic" or "explicit"
  int format_version = 1;
};

struct Prediction {
  std::vector<double> labels;  // in {-1,+1}
  std::vector<double> scores;
};

namespace detail {

inline void now_seconds(double& slot) {
  slot = static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                 std::chrono::steady_clock::now().time_since_epoch())
                                 .count()) *
         1e-9;
}

}  // namespace detail

/// Full training pipeline: k-means landmarks, Gram blocks, mapping matrix,
/// virtual features, bias augmentation, semismooth Newton solve.
/// Deterministic given the dataset and options (including the seed).
inline std::pair<LasnModel, SolverReport> train(const Dataset& train_data, const TrainOptions& opts,
                                                TrainTimings* timings = nullptr) {
  const int n = static_cast<int>(train_data.n_samples());
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  for (double l : train_data.labels)
    if (l != 1.0 && l != -1.0)
      throw std::invalid_argument("train: labels must be in {-1,+1}; run normalize_labels first");
  if (opts.k < 1 || opts.k > n) throw std::invalid_argument("train: k out of range [1, n]");

  LasnModel model;
  model.kernel = opts.kernel;
  if (opts.auto_gamma && opts.kernel.kind == KernelKind::rbf) {
    model.kernel.gamma = gamma_heuristic(train_data, opts.kmeans_cap);
    model.gamma_source = "heuristic";
  } else {
    model.gamma_source = "explicit";
  }
  if (model.kernel.kind == KernelKind::rbf && !(model.kernel.gamma > 0.0))
    throw std::invalid_argument("train: rbf kernel requires gamma > 0");
  if (model.kernel.kind == KernelKind::polynomial && model.kernel.degree < 1)
    throw std::invalid_argument("train: polynomial kernel requires degree >= 1");
  model.C = opts.C;
  model.k = opts.k;
  model.seed = opts.seed;
  model.n_features = train_data.n_features;

  double t0 = 0.0, t1 = 0.0;
  detail::now_seconds(t0);
  model.landmarks =
      kmeans_landmarks(train_data, opts.k, opts.kmeans_max_iters, opts.kmeans_cap, opts.seed);
  detail::now_seconds(t1);
  if (timings) timings->kmeans = t1 - t0;

  t0 = t1;
  const std::vector<SparseVector> centers = landmarks_as_sparse(model.landmarks);
  const DenseMatrix k_ll = gram_block(model.kernel, centers, centers);
  const DenseMatrix k_rl = gram_block(model.kernel, train_data.samples, centers);
  detail::now_seconds(t1);
  if (timings) timings->gram = t1 - t0;

  t0 = t1;
  const NystromMap map = build_mapping(k_ll);
  model.mapping = map.mapping;
  detail::now_seconds(t1);
  if (timings) timings->eig = t1 - t0;

  t0 = t1;
  FeatureBlock features = virtual_features(k_rl, map, FeatureRole::train);
  features = augment_bias(features);
  detail::now_seconds(t1);
  if (timings) timings->product = t1 - t0;

  t0 = t1;
  SolverConfig config = opts.solver;
  config.C = opts.C;
  SolverReport report = solve(features.matrix, train_data.labels, config);
  detail::now_seconds(t1);
  if (timings) timings->solve = t1 - t0;

  model.weights = report.w;
  return {std::move(model), std::move(report)};
}

/// Scores are [K_el * M, 1] * w; labels are their signs with sign(0) = +1.
inline Prediction predict(const LasnModel& model, const Dataset& test) {
  if (model.mapping.rows != model.k || model.mapping.cols != model.k ||
      static_cast<int>(model.weights.size()) != model.k + 1 ||
      static_cast<int>(model.landmarks.centers.size()) != model.k)
    throw DimensionError("predict: model dimensions inconsistent");

  const std::vector<SparseVector> centers = landmarks_as_sparse(model.landmarks);
  const DenseMatrix k_el = gram_block(model.kernel, test.samples, centers);
  const DenseMatrix f_e = matmul(k_el, model.mapping);

  Prediction pred;
  const int m = f_e.rows;
  pred.scores.resize(m);
  pred.labels.resize(m);
  for (int i = 0; i < m; ++i) {
    double s = model.weights[model.k];  // bias
    const double* fi = f_e.row(i);
    for (int j = 0; j < model.k; ++j) s += fi[j] * model.weights[j];
    pred.scores[i] = s;
    pred.labels[i] = s >= 0.0 ? 1.0 : -1.0;
  }
  return pred;
}

inline double accuracy(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("accuracy: label vectors differ in length");
  if (predicted.empty()) throw std::invalid_argument("accuracy: empty label vectors");
  std::size_t equal = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++equal;
  return 100.0 * static_cast<double>(equal) / static_cast<double>(predicted.size());
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void emit_row(std::ostream& out, const double* row, int count) {
  for (int j = 0; j < count; ++j) {
    if (j) out << ' ';
    out << fmt17(row[j]);
  }
  out << '\n';
}

}  // namespace detail

/// Versioned line-oriented text format; every real carries 17 significant
/// digits so a round trip is bit-exact.
inline void save(const LasnModel& model, std::ostream& out) {
  out << "LASN " << model.format_version << '\n';
  const KernelSpec& ks = model.kernel;
  out << "kernel " << to_string(ks.kind);
  out << " gamma=" << detail::fmt17(ks.kind == KernelKind::rbf ? ks.gamma : 0.0);
  out << " degree=" << (ks.kind == KernelKind::polynomial ? ks.degree : 0);
  out << " alpha=" << detail::fmt17(ks.kind == KernelKind::sigmoid ? ks.alpha : 0.0);
  out << " beta=" << detail::fmt17(ks.kind == KernelKind::sigmoid ? ks.beta : 0.0);
  out << " conv=" << to_string(ks.rbf_convention) << '\n';
  out << "dims k=" << model.k << " p=" << model.n_features << " C=" << detail::fmt17(model.C)
      << " seed=" << model.seed << '\n';
  for (int c = 0; c < model.k; ++c)
    detail::emit_row(out, model.landmarks.centers[c].data(), model.n_features);
  for (int r = 0; r < model.k; ++r) detail::emit_row(out, model.mapping.row(r), model.k);
  detail::emit_row(out, model.weights.data(), model.k + 1);
}

namespace detail {

inline std::vector<double> parse_row(const std::string& line, int expected, const char* what) {
  std::vector<double> row;
  row.reserve(expected);
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    std::size_t end = line.find(' ', pos);
    if (end == std::string::npos) end = line.size();
    double v;
    if (!parse_double(std::string_view(line).substr(pos, end - pos), v))
      throw FormatError(std::string("model file: bad number in ") + what);
    row.push_back(v);
    pos = end;
  }
  if (static_cast<int>(row.size()) != expected)
    throw FormatError(std::string("model file: dimension inconsistency in ") + what + ": expected " +
                      std::to_string(expected) + " values, got " + std::to_string(row.size()));
  return row;
}

}  // namespace detail

inline LasnModel load(std::istream& in) {
  auto next_line = [&](std::string& line, const char* what) {
    if (!std::getline(in, line))
      throw FormatError(std::string("model file truncated: missing ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  std::string line;
  next_line(line, "header");
  if (line.rfind("LASN ", 0) != 0) throw FormatError("model file: bad magic, expected 'LASN <version>'");
  int version = 0;
  if (!detail::parse_int(std::string_view(line).substr(5), version))
    throw FormatError("model file: unreadable version");
  if (version != 1)
    throw FormatError("model file: unsupported format version " + std::to_string(version) +
                      " (supported: 1)");

  LasnModel model;
  model.format_version = version;

  next_line(line, "kernel line");
  {
    std::istringstream ls(line);
    std::string tag, kind, field;
    ls >> tag >> kind;
    if (tag != "kernel") throw FormatError("model file: expected kernel line");
    if (kind == "rbf") model.kernel.kind = KernelKind::rbf;
    else if (kind == "polynomial") model.kernel.kind = KernelKind::polynomial;
    else if (kind == "sigmoid") model.kernel.kind = KernelKind::sigmoid;
    else if (kind == "linear") model.kernel.kind = KernelKind::linear;
    else throw FormatError("model file: unknown kernel kind '" + kind + "'");
    while (ls >> field) {
      const std::size_t eq = field.find('=');
      if (eq == std::string::npos) throw FormatError("model file: bad kernel field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "conv") {
        if (val == "divide") model.kernel.rbf_convention = RbfConvention::divide;
        else if (val == "multiply") model.kernel.rbf_convention = RbfConvention::multiply;
        else throw FormatError("model file: bad conv value '" + val + "'");
      } else if (key == "degree") {
        if (!detail::parse_int(val, model.kernel.degree))
          throw FormatError("model file: bad degree value");
      } else {
        double v;
        if (!detail::parse_double(val, v)) throw FormatError("model file: bad " + key + " value");
        if (key == "gamma") model.kernel.gamma = v;
        else if (key == "alpha") model.kernel.alpha = v;
        else if (key == "beta") model.kernel.beta = v;
        else throw FormatError("model file: unknown kernel field '" + key + "'");
      }
    }
  }

  next_line(line, "dims line");
  {
    std::istringstream ls(line);
    std::string tag, field;
    ls >> tag;
    if (tag != "dims") throw FormatError("model file: expected dims line");
    bool have_k = false, have_p = false, have_c = false, have_seed = false;
    while (ls >> field) {
      const std::size_t eq = field.find('=');
      if (eq == std::string::npos) throw FormatError("model file: bad dims field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "k") {
        have_k = detail::parse_int(val, model.k);
      } else if (key == "p") {
        have_p = detail::parse_int(val, model.n_features);
      } else if (key == "C") {
        have_c = detail::parse_double(val, model.C);
      } else if (key == "seed") {
        unsigned long long s = 0;
        const char* first = val.data();
        auto [p, ec] = std::from_chars(first, first + val.size(), s);
        have_seed = ec == std::errc() && p == first + val.size();
        model.seed = s;
      }
    }
    if (!have_k || !have_p || !have_c || !have_seed)
      throw FormatError("model file: dims line missing k/p/C/seed");
    if (model.k < 1 || model.n_features < 0)
      throw FormatError("model file: dimension inconsistency in dims line");
  }

  model.landmarks.k = model.k;
  model.landmarks.seed = model.seed;
  model.landmarks.centers.reserve(model.k);
  for (int c = 0; c < model.k; ++c) {
    next_line(line, "landmark row");
    model.landmarks.centers.push_back(detail::parse_row(line, model.n_features, "landmark row"));
  }
  model.mapping = DenseMatrix(model.k, model.k);
  for (int r = 0; r < model.k; ++r) {
    next_line(line, "mapping row");
    const std::vector<double> row = detail::parse_row(line, model.k, "mapping row");
    for (int j = 0; j < model.k; ++j) model.mapping(r, j) = row[j];
  }
  next_line(line, "weight row");
  model.weights = detail::parse_row(line, model.k + 1, "weight row");
  model.gamma_source = "loaded";
  return model;
}

}  // namespace lasn
