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

// Orthogonal Procrustes mapping between embedding spaces, CSLS retrieval,
// alignment quality measures, and the independent / joint mapping pipelines.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "vocab_bridge/dictionary.hpp"
#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

inline constexpr double kOrthogonalityTolerance = 1e-6;

/// max |MᵀM - I| when M is tall or square, max |MMᵀ - I| when wide.
inline double orthogonality_error(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() >= m.cols()) {
    Eigen::MatrixXd g = m.transpose() * m;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  }
  Eigen::MatrixXd g = m * m.transpose();
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

/// A semi-orthogonal src_dim x tgt_dim matrix applied to row vectors.
class LinearMap {
 public:
  explicit LinearMap(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() < 1 || matrix_.cols() < 1) {
      throw Error(ErrorCode::kDimMismatch, "map dimensions must be positive");
    }
    if (!matrix_.allFinite()) {
      throw Error(ErrorCode::kNonFiniteValue, "map contains NaN or Inf");
    }
    const double err = orthogonality_error(matrix_);
    if (err > kOrthogonalityTolerance) {
      throw Error(ErrorCode::kNotOrthogonal,
                  "map is not semi-orthogonal (max deviation " +
                      text::format_significant(err, 3) + ")");
    }
  }

  static LinearMap identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return LinearMap(Eigen::MatrixXd::Identity(d, d));
  }

  std::size_t src_dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t tgt_dim() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

/// `first` followed by `second`. The product must itself be semi-orthogonal.
inline LinearMap compose(const LinearMap& first, const LinearMap& second) {
  if (first.tgt_dim() != second.src_dim()) {
    throw Error(ErrorCode::kDimMismatch, "cannot compose maps: inner dimensions differ");
  }
  return LinearMap(first.matrix() * second.matrix());
}

/// Sum of squared row residuals ‖XM - Y‖_F².
inline double procrustes_objective(const RowMatrix& x, const RowMatrix& y,
                                   const Eigen::MatrixXd& m) {
  return (x * m - y).squaredNorm();
}

/// Minimizes ‖XM - Y‖_F over semi-orthogonal M: with UΣVᵀ the thin SVD of
/// XᵀY, M = UVᵀ.
inline LinearMap procrustes_solve(const RowMatrix& x, const RowMatrix& y) {
  if (x.rows() != y.rows()) {
    throw Error(ErrorCode::kDimMismatch, "X and Y must have the same number of rows");
  }
  if (x.rows() < 1 || x.cols() < 1 || y.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "Procrustes needs at least one pair");
  }
  const Eigen::MatrixXd cross = x.transpose() * y;
  const double scale = x.norm() * y.norm();
  if (!(cross.norm() > 1e-14 * scale)) {
    throw Error(ErrorCode::kDegenerateInput,
                "cross-covariance XᵀY is zero; every map is equally good");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return LinearMap(svd.matrixU() * svd.matrixV().transpose());
}

/// Row-wise product E·M. Normalized inputs produce re-normalized outputs.
inline EmbeddingMatrix apply_map(const LinearMap& m, const EmbeddingMatrix& e) {
  if (e.dim() != m.src_dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "embedding dim " + std::to_string(e.dim()) + " != map input dim " +
                    std::to_string(m.src_dim()));
  }
  RowMatrix out = e.rows() * m.matrix();
  EmbeddingMatrix mapped(e.vocab(), std::move(out));
  return e.normalized() ? normalize_rows(mapped) : mapped;
}

struct AlignConfig {
  std::size_t csls_k = 10;
  std::size_t top_m = 5;
  std::size_t eval_k = 1;

  void validate() const {
    if (csls_k == 0 || top_m == 0 || eval_k == 0) {
      throw Error(ErrorCode::kInvalidArgument, "csls_k, top_m and eval_k must be positive");
    }
  }
};

struct Neighbor {
  std::string token;
  std::size_t id = 0;
  double score = 0.0;
};

/// Retrieval result for one query, best first; ties by ascending target id.
struct NeighborList {
  std::string query;
  std::vector<Neighbor> entries;
};

namespace detail {

inline void check_k(std::size_t k, std::size_t set_size, std::string_view what) {
  if (k == 0) throw Error(ErrorCode::kKTooLarge, "k must be positive");
  if (k > set_size) {
    throw Error(ErrorCode::kKTooLarge,
                "k=" + std::to_string(k) + " exceeds " + std::string(what) +
                    " size " + std::to_string(set_size));
  }
}

inline constexpr Eigen::Index kBlockRows = 512;

/// For each row a of `a`, the mean of its k largest dot products with the
/// rows of `b`. Rows are expected to be unit length, so these are cosines.
inline Vector mean_topk_similarity(const RowMatrix& a, const RowMatrix& b,
                                   std::size_t k) {
  Vector out(a.rows());
  std::vector<double> buf(static_cast<std::size_t>(b.rows()));
  for (Eigen::Index start = 0; start < a.rows(); start += kBlockRows) {
    const Eigen::Index n = std::min(kBlockRows, a.rows() - start);
    RowMatrix sims = a.middleRows(start, n) * b.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      std::copy(sims.row(i).data(), sims.row(i).data() + sims.cols(), buf.begin());
      std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       buf.end(), std::greater<>());
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += buf[j];
      out(start + i) = sum / static_cast<double>(k);
    }
  }
  return out;
}

inline double cosine(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                     const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx < kZeroNormThreshold || ny < kZeroNormThreshold) return 0.0;
  return x.dot(y) / (nx * ny);
}

inline RowMatrix normalized_rows(const RowMatrix& m) {
  RowMatrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n >= kZeroNormThreshold) out.row(i) /= n;
  }
  return out;
}

}  // namespace detail

/// CSLS(x, y) = 2 cos(x, y) - r_tgt(x) - r_src(y), where r_tgt(x) is the mean
/// cosine of x to its k nearest rows of `tgt_set` and r_src(y) the mean
/// cosine of y to its k nearest rows of `src_set`.
inline double csls_score(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                         const Eigen::Ref<const Eigen::RowVectorXd>& y,
                         const EmbeddingMatrix& src_set,
                         const EmbeddingMatrix& tgt_set, std::size_t k) {
  const auto d = static_cast<std::size_t>(x.size());
  if (static_cast<std::size_t>(y.size()) != d || src_set.dim() != d || tgt_set.dim() != d) {
    throw Error(ErrorCode::kDimMismatch, "CSLS operands differ in dimension");
  }
  detail::check_k(k, tgt_set.size(), "target set");
  detail::check_k(k, src_set.size(), "source set");
  RowMatrix xn = detail::normalized_rows(x);
  RowMatrix yn = detail::normalized_rows(y);
  const RowMatrix src = src_set.normalized() ? src_set.rows() : detail::normalized_rows(src_set.rows());
  const RowMatrix tgt = tgt_set.normalized() ? tgt_set.rows() : detail::normalized_rows(tgt_set.rows());
  const double r_tgt = detail::mean_topk_similarity(xn, tgt, k)(0);
  const double r_src = detail::mean_topk_similarity(yn, src, k)(0);
  return 2.0 * detail::cosine(x, y) - r_tgt - r_src;
}

/// Precomputed CSLS neighborhood terms for retrieval from a source space
/// into a target space. Both matrices are held L2-normalized.
class CslsIndex {
 public:
  CslsIndex(const EmbeddingMatrix& sources, const EmbeddingMatrix& targets,
            std::size_t k)
      : sources_(ensure_normalized(sources)),
        targets_(ensure_normalized(targets)),
        k_(k) {
    if (sources_.dim() != targets_.dim()) {
      throw Error(ErrorCode::kDimMismatch,
                  "source dim " + std::to_string(sources_.dim()) +
                      " != target dim " + std::to_string(targets_.dim()));
    }
    detail::check_k(k_, targets_.size(), "target set");
    detail::check_k(k_, sources_.size(), "source set");
    r_src_ = detail::mean_topk_similarity(targets_.rows(), sources_.rows(), k_);
  }

  const EmbeddingMatrix& sources() const noexcept { return sources_; }
  const EmbeddingMatrix& targets() const noexcept { return targets_; }
  std::size_t k() const noexcept { return k_; }

  /// r_src for every target row.
  const Vector& target_penalty() const noexcept { return r_src_; }

  /// r_tgt for the given source rows.
  Vector source_penalty(std::span<const std::size_t> source_ids) const {
    RowMatrix q = gather(source_ids);
    return detail::mean_topk_similarity(q, targets_.rows(), k_);
  }

  /// CSLS of every (query, target) combination, one row per query id.
  RowMatrix scores(std::span<const std::size_t> source_ids) const {
    RowMatrix q = gather(source_ids);
    Vector r_tgt = detail::mean_topk_similarity(q, targets_.rows(), k_);
    RowMatrix s = 2.0 * (q * targets_.rows().transpose());
    s.colwise() -= r_tgt;
    s.rowwise() -= r_src_.transpose();
    return s;
  }

  /// The `top` best targets for each source id.
  std::vector<NeighborList> neighbors(std::span<const std::size_t> source_ids,
                                      std::size_t top) const {
    if (top == 0 || top > targets_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "top must be in [1, " + std::to_string(targets_.size()) + "]");
    }
    std::vector<NeighborList> out;
    out.reserve(source_ids.size());
    std::vector<std::size_t> order(targets_.size());
    for (std::size_t start = 0; start < source_ids.size();
         start += static_cast<std::size_t>(detail::kBlockRows)) {
      const std::size_t n = std::min<std::size_t>(detail::kBlockRows, source_ids.size() - start);
      RowMatrix s = scores(source_ids.subspan(start, n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = s.row(static_cast<Eigen::Index>(i));
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto better = [&](std::size_t a, std::size_t b) {
          const double sa = row(static_cast<Eigen::Index>(a));
          const double sb = row(static_cast<Eigen::Index>(b));
          if (sa != sb) return sa > sb;
          return a < b;
        };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top),
                          order.end(), better);
        NeighborList list;
        list.query = sources_.vocab().token(source_ids[start + i]);
        list.entries.reserve(top);
        for (std::size_t j = 0; j < top; ++j) {
          const std::size_t t = order[j];
          list.entries.push_back({targets_.vocab().token(t), t,
                                  row(static_cast<Eigen::Index>(t))});
        }
        out.push_back(std::move(list));
      }
    }
    return out;
  }

 private:
  RowMatrix gather(std::span<const std::size_t> ids) const {
    RowMatrix q(static_cast<Eigen::Index>(ids.size()),
                static_cast<Eigen::Index>(sources_.dim()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      q.row(static_cast<Eigen::Index>(i)) = sources_.row(ids[i]);
    }
    return q;
  }

  EmbeddingMatrix sources_;
  EmbeddingMatrix targets_;
  std::size_t k_;
  Vector r_src_;
};

/// For every query row, the `top` highest-CSLS targets. Neighborhood terms
/// use the full query and target matrices with k = cfg.csls_k.
inline std::vector<NeighborList> csls_knn(const EmbeddingMatrix& queries,
                                          const EmbeddingMatrix& targets,
                                          const AlignConfig& cfg, std::size_t top) {
  cfg.validate();
  if (queries.dim() != targets.dim()) {
    throw Error(ErrorCode::kDimMismatch, "queries and targets differ in dimension");
  }
  CslsIndex index(queries, targets, cfg.csls_k);
  std::vector<std::size_t> ids(queries.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return index.neighbors(ids, top);
}

struct PrecisionReport {
  double precision = 0.0;
  std::size_t evaluated_sources = 0;
  std::size_t hits = 0;
  std::size_t skipped_pairs = 0;
};

/// Fraction of evaluated sources whose top-eval_k CSLS retrieval after
/// mapping contains any of their dictionary targets. Pairs whose source or
/// target is missing from the embeddings are skipped.
inline PrecisionReport eval_precision_at_k(const LinearMap& map,
                                           const EmbeddingMatrix& src,
                                           const EmbeddingMatrix& tgt,
                                           const BilingualDictionary& eval_dict,
                                           const AlignConfig& cfg) {
  cfg.validate();
  PrecisionReport report;
  std::vector<std::size_t> query_ids;
  std::vector<std::set<std::size_t>> gold;
  std::map<std::size_t, std::size_t> slot_of_source;
  for (const auto& p : eval_dict.pairs()) {
    auto s = src.vocab().find(p.source);
    auto t = tgt.vocab().find(p.target);
    if (!s || !t) {
      ++report.skipped_pairs;
      continue;
    }
    auto [it, inserted] = slot_of_source.emplace(*s, query_ids.size());
    if (inserted) {
      query_ids.push_back(*s);
      gold.emplace_back();
    }
    gold[it->second].insert(*t);
  }
  if (query_ids.empty()) {
    throw Error(ErrorCode::kEmptyEvalDict, "no evaluation pair has both tokens present");
  }
  const EmbeddingMatrix mapped = apply_map(map, ensure_normalized(src));
  CslsIndex index(mapped, tgt, cfg.csls_k);
  const auto lists = index.neighbors(query_ids, std::min(cfg.eval_k, tgt.size()));
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (const auto& n : lists[i].entries) {
      if (gold[i].contains(n.id)) {
        ++report.hits;
        break;
      }
    }
  }
  report.evaluated_sources = query_ids.size();
  report.precision =
      static_cast<double>(report.hits) / static_cast<double>(report.evaluated_sources);
  return report;
}

inline constexpr std::size_t kDefaultUnsupervisedSample = 10000;

/// Mean cosine between each of the first min(sample, |src|) mapped source
/// rows and its top-1 CSLS match in `tgt`.
inline double unsupervised_score(const LinearMap& map, const EmbeddingMatrix& src,
                                 const EmbeddingMatrix& tgt, const AlignConfig& cfg,
                                 std::size_t sample = kDefaultUnsupervisedSample) {
  cfg.validate();
  if (sample == 0) throw Error(ErrorCode::kInvalidArgument, "sample must be at least 1");
  const EmbeddingMatrix mapped = apply_map(map, ensure_normalized(src));
  CslsIndex index(mapped, tgt, cfg.csls_k);
  std::vector<std::size_t> ids(std::min(sample, mapped.size()));
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const auto lists = index.neighbors(ids, 1);
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& best = lists[i].entries.front();
    total += index.sources().row(ids[i]).dot(index.targets().row(best.id));
  }
  return total / static_cast<double>(ids.size());
}

struct MappingFit {
  LinearMap map;
  std::size_t pair_count = 0;
  double mean_residual = 0.0;
  /// Fewer training pairs than input dimensions: the map is under-determined.
  bool low_rank = false;
};

namespace detail {

/// Solves Procrustes on normalized row pairs and reports the residual.
inline MappingFit fit_pairs(const RowMatrix& x, const RowMatrix& y) {
  LinearMap map = procrustes_solve(x, y);
  const RowMatrix residual = x * map.matrix() - y;
  double total = 0.0;
  for (Eigen::Index i = 0; i < residual.rows(); ++i) total += residual.row(i).norm();
  const auto n = static_cast<std::size_t>(x.rows());
  return MappingFit{std::move(map), n, total / static_cast<double>(n),
                    n < static_cast<std::size_t>(x.cols())};
}

inline void append_row(std::vector<double>& buf,
                       const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  buf.insert(buf.end(), row.data(), row.data() + row.size());
}

inline RowMatrix as_matrix(const std::vector<double>& buf, std::size_t cols) {
  const auto c = static_cast<Eigen::Index>(cols);
  const auto r = static_cast<Eigen::Index>(buf.size() / cols);
  return Eigen::Map<const RowMatrix>(buf.data(), r, c);
}

}  // namespace detail

/// Maps a language space straight onto the model space, training on every
/// token the two vocabularies share.
inline MappingFit fit_independent_mapping(const EmbeddingMatrix& lang,
                                          const EmbeddingMatrix& model) {
  const EmbeddingMatrix src = ensure_normalized(lang);
  const EmbeddingMatrix tgt = ensure_normalized(model);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto j = tgt.vocab().find(src.vocab().token(i));
    if (!j) continue;
    detail::append_row(xs, src.row(i));
    detail::append_row(ys, tgt.row(*j));
  }
  if (xs.empty()) {
    throw Error(ErrorCode::kEmptyIntersection, "the vocabularies share no token");
  }
  return detail::fit_pairs(detail::as_matrix(xs, src.dim()),
                           detail::as_matrix(ys, tgt.dim()));
}

struct JointFit {
  /// Language space -> English space.
  MappingFit to_english;
  /// Mapped language space -> model space.
  MappingFit to_model;
};

/// Two-stage mapping. Stage one aligns the language space with English over
/// dictionary pairs (every target of a multi-target source is used). Stage
/// two aligns the mapped language rows with the model rows of the
/// dictionary targets that the model vocabulary contains.
inline JointFit fit_joint_mapping(const EmbeddingMatrix& lang,
                                  const EmbeddingMatrix& english,
                                  const EmbeddingMatrix& model,
                                  const BilingualDictionary& dict) {
  const EmbeddingMatrix src = ensure_normalized(lang);
  const EmbeddingMatrix en = ensure_normalized(english);
  const EmbeddingMatrix bert = ensure_normalized(model);

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : dict.pairs()) {
    auto s = src.vocab().find(p.source);
    auto t = en.vocab().find(p.target);
    if (!s || !t) continue;
    detail::append_row(xs, src.row(*s));
    detail::append_row(ys, en.row(*t));
  }
  if (xs.empty()) {
    throw Error(ErrorCode::kEmptyStage1Dict,
                "no dictionary pair has its source in the language space and "
                "its target in the English space");
  }
  MappingFit stage1 = detail::fit_pairs(detail::as_matrix(xs, src.dim()),
                                        detail::as_matrix(ys, en.dim()));

  xs.clear();
  ys.clear();
  for (const auto& p : dict.pairs()) {
    auto s = src.vocab().find(p.source);
    auto t = bert.vocab().find(p.target);
    if (!s || !t) continue;
    Eigen::RowVectorXd mapped = src.row(*s) * stage1.map.matrix();
    detail::append_row(xs, mapped);
    detail::append_row(ys, bert.row(*t));
  }
  if (xs.empty()) {
    throw Error(ErrorCode::kEmptyStage2Anchors,
                "no dictionary target is in the model vocabulary");
  }
  MappingFit stage2 = detail::fit_pairs(
      detail::as_matrix(xs, stage1.map.tgt_dim()), detail::as_matrix(ys, bert.dim()));
  return JointFit{std::move(stage1), std::move(stage2)};
}

inline void write_map(const LinearMap& m, std::ostream& out) {
  out << m.src_dim() << ' ' << m.tgt_dim() << '\n';
  const auto& a = m.matrix();
  std::string line;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) line += ' ';
      line += text::format_significant(a(i, j));
    }
    line += '\n';
    out << line;
  }
}

inline void save_map(const LinearMap& m, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_map(m, out);
  text::finish_output(out, path);
}

inline LinearMap read_map(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedHeader, "missing map header", 1);
  }
  auto header = text::split_whitespace(text::strip_cr(line));
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  if (header.size() != 2 || !text::parse_size(header[0], d1) ||
      !text::parse_size(header[1], d2) || d1 == 0 || d2 == 0) {
    throw Error(ErrorCode::kMalformedHeader, "expected '<d1> <d2>'", 1);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d2));
  for (std::size_t i = 0; i < d1; ++i) {
    const std::size_t line_no = i + 2;
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::kCountMismatch, "map has fewer rows than declared", line_no);
    }
    auto fields = text::split_whitespace(text::strip_cr(line));
    if (fields.size() != d2) {
      throw Error(ErrorCode::kArityMismatch,
                  "expected " + std::to_string(d2) + " values", line_no);
    }
    for (std::size_t j = 0; j < d2; ++j) {
      double v = 0.0;
      if (!text::parse_double(fields[j], v)) {
        throw Error(ErrorCode::kMalformedLine, "cannot parse value", line_no);
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue, "non-finite value", line_no);
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return LinearMap(std::move(m));
}

inline LinearMap load_map(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return read_map(in);
}

/// Softmax of the scores in one neighbor list (display-only probabilities).
inline std::vector<double> neighbor_softmax(const NeighborList& list) {
  std::vector<double> out;
  if (list.entries.empty()) return out;
  double top = list.entries.front().score;
  for (const auto& e : list.entries) top = std::max(top, e.score);
  double z = 0.0;
  for (const auto& e : list.entries) {
    out.push_back(std::exp(e.score - top));
    z += out.back();
  }
  for (auto& p : out) p /= z;
  return out;
}

/// Nearest-neighbor audit table: source_lang, source, target, score (and an
/// optional softmax probability column), grouped by source token then rank.
inline void write_audit_report(std::string_view source_lang,
                               std::vector<NeighborList> lists, std::ostream& out,
                               bool with_probability = false) {
  std::stable_sort(lists.begin(), lists.end(),
                   [](const auto& a, const auto& b) { return a.query < b.query; });
  for (const auto& list : lists) {
    const auto probs = with_probability ? neighbor_softmax(list) : std::vector<double>{};
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      const auto& e = list.entries[r];
      out << source_lang << '\t' << list.query << '\t' << e.token << '\t'
          << text::format_fixed(e.score, 6);
      if (with_probability) out << '\t' << text::format_fixed(probs[r], 6);
      out << '\n';
    }
  }
}

}  // namespace vocab_bridge
