// Copyright 2026 The vocab-bridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Token vocabularies and dense embedding tables, plus the plain-text
// interchange formats for both (word2vec text format and one-token-per-line
// vocabulary files).

#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vocab_bridge/error.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr std::string_view kDefaultContinuationPrefix = "##";

/// Ordered set of unique tokens with a dense 0-based id for each.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> tokens,
                      std::string continuation_prefix =
                          std::string(kDefaultContinuationPrefix))
      : tokens_(std::move(tokens)),
        continuation_prefix_(std::move(continuation_prefix)) {
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      const std::string& t = tokens_[i];
      if (!valid_token(t)) {
        throw Error(ErrorCode::kInvalidToken,
                    "token is empty or contains whitespace", std::nullopt, t,
                    i);
      }
      if (!index_.emplace(t, i).second) {
        throw Error(ErrorCode::kDuplicateToken, "duplicate token '" + t + "'",
                    std::nullopt, t, i);
      }
    }
  }

  static bool valid_token(std::string_view t) {
    if (t.empty()) return false;
    for (char c : t) {
      if (text::is_space(c)) return false;
    }
    return true;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& continuation_prefix() const noexcept {
    return continuation_prefix_;
  }

  std::optional<std::size_t> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view token) const { return find(token).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ &&
           a.continuation_prefix_ == b.continuation_prefix_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string continuation_prefix_{kDefaultContinuationPrefix};
};

inline constexpr double kUnitNormTolerance = 1e-9;
inline constexpr double kZeroNormThreshold = 1e-12;

/// Vocabulary-indexed dense matrix, one row per token. Immutable once built.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(Vocabulary vocab, RowMatrix rows, bool normalized = false)
      : vocab_(std::move(vocab)), rows_(std::move(rows)), normalized_(normalized) {
    if (rows_.cols() < 1) {
      throw Error(ErrorCode::kDimMismatch, "embedding dimension must be positive");
    }
    if (static_cast<std::size_t>(rows_.rows()) != vocab_.size()) {
      throw Error(ErrorCode::kDimMismatch,
                  "row count " + std::to_string(rows_.rows()) +
                      " != vocabulary size " + std::to_string(vocab_.size()));
    }
    if (!rows_.allFinite()) {
      throw Error(ErrorCode::kNonFiniteValue, "embedding contains NaN or Inf");
    }
    if (normalized_) {
      for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
        if (std::abs(rows_.row(i).norm() - 1.0) > kUnitNormTolerance) {
          throw Error(ErrorCode::kInvalidArgument,
                      "row marked normalized does not have unit norm",
                      std::nullopt, vocab_.token(static_cast<std::size_t>(i)));
        }
      }
    }
  }

  const Vocabulary& vocab() const noexcept { return vocab_; }
  const RowMatrix& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  bool normalized() const noexcept { return normalized_; }

  auto row(std::size_t id) const { return rows_.row(static_cast<Eigen::Index>(id)); }

  /// Row for `token`; throws TokenNotFound when absent.
  auto row(std::string_view token) const {
    auto id = vocab_.find(token);
    if (!id) {
      throw Error(ErrorCode::kTokenNotFound,
                  "token '" + std::string(token) + "' not in embedding",
                  std::nullopt, std::string(token));
    }
    return row(*id);
  }

 private:
  Vocabulary vocab_;
  RowMatrix rows_;
  bool normalized_ = false;
};

struct LoadReport {
  std::size_t duplicate_count = 0;
  std::vector<std::string> duplicates;
};

/// Parses word2vec text format. Duplicate tokens keep the first occurrence.
inline EmbeddingMatrix read_embeddings(std::istream& in,
                                       LoadReport* report = nullptr) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedHeader, "missing header line", 1);
  }
  auto header = text::split_whitespace(text::strip_cr(line));
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !text::parse_size(header[0], count) ||
      !text::parse_size(header[1], dim) || dim == 0) {
    throw Error(ErrorCode::kMalformedHeader,
                "expected '<count> <dim>' with dim > 0", 1);
  }

  std::vector<std::string> tokens;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  tokens.reserve(count);
  values.reserve(count * dim);
  LoadReport local;
  std::size_t body_rows = 0;
  std::size_t line_no = 1;
  std::vector<double> row(dim);

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::strip_cr(line);
    auto fields = text::split_whitespace(view);
    if (fields.empty()) continue;
    ++body_rows;
    if (body_rows > count) {
      throw Error(ErrorCode::kCountMismatch,
                  "more rows than the header count " + std::to_string(count),
                  line_no);
    }
    if (fields.size() != dim + 1) {
      throw Error(ErrorCode::kArityMismatch,
                  "expected " + std::to_string(dim) + " values, found " +
                      std::to_string(fields.size() - 1),
                  line_no);
    }
    for (std::size_t j = 0; j < dim; ++j) {
      double v = 0.0;
      if (!text::parse_double(fields[j + 1], v)) {
        throw Error(ErrorCode::kMalformedLine,
                    "cannot parse value '" + std::string(fields[j + 1]) + "'",
                    line_no);
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "non-finite value '" + std::string(fields[j + 1]) + "'",
                    line_no);
      }
      row[j] = v;
    }
    std::string token(fields[0]);
    if (!seen.emplace(token, tokens.size()).second) {
      ++local.duplicate_count;
      local.duplicates.push_back(token);
      continue;
    }
    tokens.push_back(std::move(token));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (body_rows != count) {
    throw Error(ErrorCode::kCountMismatch,
                "header declares " + std::to_string(count) + " rows, found " +
                    std::to_string(body_rows),
                line_no + 1);
  }

  RowMatrix m(static_cast<Eigen::Index>(tokens.size()),
              static_cast<Eigen::Index>(dim));
  if (!values.empty()) {
    m = Eigen::Map<const RowMatrix>(values.data(), m.rows(), m.cols());
  }
  if (report) *report = std::move(local);
  return EmbeddingMatrix(Vocabulary(std::move(tokens)), std::move(m));
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                       LoadReport* report = nullptr) {
  auto in = text::open_input(path);
  return read_embeddings(in, report);
}

inline void write_embeddings(const EmbeddingMatrix& m, std::ostream& out) {
  out << m.size() << ' ' << m.dim() << '\n';
  const auto& rows = m.rows();
  std::string line;
  for (std::size_t i = 0; i < m.size(); ++i) {
    line = m.vocab().token(i);
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      line += ' ';
      line += text::format_significant(rows(static_cast<Eigen::Index>(i), j));
    }
    line += '\n';
    out << line;
  }
}

inline void save_embeddings(const EmbeddingMatrix& m,
                            const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_embeddings(m, out);
  text::finish_output(out, path);
}

/// Unit-L2 copy of `m`. Throws ZeroRow naming the first token whose norm is
/// below 1e-12.
inline EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  RowMatrix rows = m.rows();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double n = rows.row(i).norm();
    if (n < kZeroNormThreshold) {
      const auto& tok = m.vocab().token(static_cast<std::size_t>(i));
      throw Error(ErrorCode::kZeroRow, "zero vector for token '" + tok + "'",
                  std::nullopt, tok);
    }
    rows.row(i) /= n;
  }
  return EmbeddingMatrix(m.vocab(), std::move(rows), true);
}

/// Returns `m` itself if already normalized, otherwise a normalized copy.
inline EmbeddingMatrix ensure_normalized(const EmbeddingMatrix& m) {
  return m.normalized() ? m : normalize_rows(m);
}

/// Rows for `tokens`, in request order.
inline EmbeddingMatrix subset(const EmbeddingMatrix& m,
                              std::span<const std::string> tokens) {
  RowMatrix rows(static_cast<Eigen::Index>(tokens.size()),
                 static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto id = m.vocab().find(tokens[i]);
    if (!id) {
      throw Error(ErrorCode::kMissingToken,
                  "token '" + tokens[i] + "' at position " + std::to_string(i) +
                      " not in embedding",
                  std::nullopt, tokens[i], i);
    }
    rows.row(static_cast<Eigen::Index>(i)) = m.row(*id);
  }
  return EmbeddingMatrix(
      Vocabulary({tokens.begin(), tokens.end()}, m.vocab().continuation_prefix()),
      std::move(rows), m.normalized());
}

/// One token per line; the line number (from 0) is the id.
inline Vocabulary read_vocabulary(std::istream& in,
                                  std::string continuation_prefix =
                                      std::string(kDefaultContinuationPrefix)) {
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = text::strip_cr(line);
    if (!Vocabulary::valid_token(t)) {
      throw Error(ErrorCode::kInvalidToken,
                  "empty token or token with whitespace", line_no);
    }
    tokens.emplace_back(t);
  }
  try {
    return Vocabulary(std::move(tokens), std::move(continuation_prefix));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDuplicateToken && e.position()) {
      throw Error(ErrorCode::kDuplicateToken,
                  "duplicate token '" + e.token().value_or("") + "'",
                  *e.position() + 1, e.token());
    }
    throw;
  }
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path,
                                  std::string continuation_prefix =
                                      std::string(kDefaultContinuationPrefix)) {
  auto in = text::open_input(path);
  return read_vocabulary(in, std::move(continuation_prefix));
}

inline void write_vocabulary(const Vocabulary& v, std::ostream& out) {
  for (const auto& t : v.tokens()) out << t << '\n';
}

inline void save_vocabulary(const Vocabulary& v, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_vocabulary(v, out);
  text::finish_output(out, path);
}

}  // namespace vocab_bridge
