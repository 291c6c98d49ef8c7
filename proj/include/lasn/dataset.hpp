#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lasn/errors.hpp"
#include "lasn/sparse.hpp"

namespace lasn {

/// How raw labels were mapped onto {-1,+1}: the numerically larger raw label
/// becomes +1. Counts taken at normalization time.
struct LabelMapping {
  double raw_negative = -1.0;
  double raw_positive = +1.0;
  std::size_t count_negative = 0;
  std::size_t count_positive = 0;
  bool identity() const { return raw_negative == -1.0 && raw_positive == 1.0; }
};

struct Dataset {
  std::vector<SparseVector> samples;
  std::vector<double> labels;
  int n_features = 0;
  std::optional<LabelMapping> mapping;  // set by normalize_labels

  std::size_t n_samples() const { return samples.size(); }
};

struct SplitSpec {
  double train_fraction = 0.6;
};

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

inline bool parse_int(std::string_view tok, int& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

inline void append_shortest(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, p);
}

}  // namespace detail

/// Parse LIBSVM text: one sample per non-empty line, "<label> id:value ...",
/// ids 1-based and strictly increasing. Labels are kept raw; run
/// normalize_labels afterwards. Errors carry the offending line number.
inline Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos) continue;

    auto next_token = [&](std::string_view& tok) -> bool {
      if (pos == std::string::npos || pos >= line.size()) return false;
      std::size_t end = line.find_first_of(" \t", pos);
      if (end == std::string::npos) end = line.size();
      tok = std::string_view(line).substr(pos, end - pos);
      pos = line.find_first_not_of(" \t", end);
      return true;
    };

    std::string_view tok;
    next_token(tok);
    double label;
    if (!detail::parse_double(tok, label))
      throw ParseError(lineno, "non-numeric label '" + std::string(tok) + "'");
    if (!std::isfinite(label)) throw ParseError(lineno, "non-finite label");

    SparseVector sv;
    int prev_index = 0;
    while (next_token(tok)) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(lineno, "malformed pair '" + std::string(tok) + "'");
      int index;
      if (!detail::parse_int(tok.substr(0, colon), index))
        throw ParseError(lineno, "malformed pair '" + std::string(tok) + "'");
      if (index <= 0) throw ParseError(lineno, "non-positive index " + std::to_string(index));
      if (index <= prev_index)
        throw ParseError(lineno, "non-increasing index " + std::to_string(index));
      double value;
      if (!detail::parse_double(tok.substr(colon + 1), value))
        throw ParseError(lineno, "malformed pair '" + std::string(tok) + "'");
      if (!std::isfinite(value))
        throw ParseError(lineno, "non-finite value at index " + std::to_string(index));
      sv.indices.push_back(index);
      sv.values.push_back(value);
      prev_index = index;
    }

    ds.n_features = std::max(ds.n_features, sv.max_index());
    ds.samples.push_back(std::move(sv));
    ds.labels.push_back(label);
  }
  return ds;
}

inline Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

/// Map the two raw label values onto {-1,+1}: larger -> +1, smaller -> -1.
/// Exactly two distinct values are required.
inline Dataset normalize_labels(const Dataset& raw) {
  std::vector<double> distinct;
  for (double l : raw.labels)
    if (std::find(distinct.begin(), distinct.end(), l) == distinct.end()) distinct.push_back(l);
  if (distinct.size() != 2) {
    std::string msg = std::to_string(distinct.size()) + " distinct labels {";
    std::sort(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      if (i) msg += ", ";
      detail::append_shortest(msg, distinct[i]);
    }
    msg += "}, expected exactly 2";
    throw std::invalid_argument(msg);
  }

  LabelMapping m;
  m.raw_negative = std::min(distinct[0], distinct[1]);
  m.raw_positive = std::max(distinct[0], distinct[1]);

  Dataset out = raw;
  for (double& l : out.labels) {
    if (l == m.raw_positive) {
      l = +1.0;
      ++m.count_positive;
    } else {
      l = -1.0;
      ++m.count_negative;
    }
  }
  out.mapping = m;
  return out;
}

/// First floor(fraction * n) samples (file order) become the training part,
/// the remainder the test part. No shuffling.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& d, SplitSpec s) {
  if (!(s.train_fraction > 0.0 && s.train_fraction <= 1.0))
    throw std::invalid_argument("train_fraction must be in (0,1]");
  const std::size_t n = d.n_samples();
  // + 1e-9 so that products like 0.6*5 (= 2.999...96 in binary) floor to the
  // intended integer.
  const auto n_train =
      static_cast<std::size_t>(std::floor(s.train_fraction * static_cast<double>(n) + 1e-9));

  Dataset train, test;
  train.n_features = test.n_features = d.n_features;
  train.mapping = test.mapping = d.mapping;
  train.samples.assign(d.samples.begin(), d.samples.begin() + n_train);
  train.labels.assign(d.labels.begin(), d.labels.begin() + n_train);
  test.samples.assign(d.samples.begin() + n_train, d.samples.end());
  test.labels.assign(d.labels.begin() + n_train, d.labels.end());
  return {std::move(train), std::move(test)};
}

/// Canonical emission: integral labels printed as integers, values in
/// shortest round-trip form, single-space separated, one newline per sample.
inline void emit_libsvm(const Dataset& d, std::ostream& out) {
  std::string buf;
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    buf.clear();
    const double l = d.labels[i];
    if (l == std::floor(l) && std::abs(l) < 9.007199254740992e15) {
      buf += std::to_string(static_cast<long long>(l));
    } else {
      detail::append_shortest(buf, l);
    }
    const SparseVector& sv = d.samples[i];
    for (std::size_t t = 0; t < sv.nnz(); ++t) {
      buf += ' ';
      buf += std::to_string(sv.indices[t]);
      buf += ':';
      detail::append_shortest(buf, sv.values[t]);
    }
    buf += '\n';
    out << buf;
  }
}

inline std::string emit_libsvm(const Dataset& d) {
  std::ostringstream out;
  emit_libsvm(d, out);
  return out.str();
}

}  // namespace lasn
