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

// Mixture mapping: a new subword is represented as a softmax-weighted
// combination of model-embedding rows of English anchor subwords, chosen by
// CSLS after the language space has been mapped into the English space.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocab_bridge/alignment.hpp"
#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

/// A candidate anchor. `anchor_id` is the position in the anchor pool,
/// which follows English vocabulary order and breaks score ties.
struct Candidate {
  std::string token;
  std::size_t anchor_id = 0;
  double csls = 0.0;
};

struct WeightedAnchor {
  std::string token;
  std::size_t anchor_id = 0;
  double weight = 0.0;
};

struct MixtureAssignment {
  std::string source_token;
  std::vector<WeightedAnchor> anchors;
  Vector mixed_vector;
};

/// English tokens that also have a model row, in English vocabulary order.
inline std::vector<std::string> anchor_pool(const Vocabulary& english,
                                            const Vocabulary& model) {
  std::vector<std::string> pool;
  for (const auto& t : english.tokens()) {
    if (model.contains(t)) pool.push_back(t);
  }
  return pool;
}

/// Retrieval of anchor candidates for mapped language tokens. Holds the
/// CSLS index between the mapped language rows (source side) and the
/// anchor-pool rows of the English space (target side). The neighborhood
/// size is min(csls_k, |pool|, |language rows|) so small pools stay usable.
class MixtureIndex {
 public:
  MixtureIndex(const EmbeddingMatrix& mapped_lang, const EmbeddingMatrix& english,
               std::span<const std::string> pool, const AlignConfig& cfg)
      : index_(make_index(mapped_lang, english, pool, cfg)), top_m_(cfg.top_m) {}

  std::size_t pool_size() const noexcept { return index_.targets().size(); }
  std::size_t effective_k() const noexcept { return index_.k(); }
  const CslsIndex& csls() const noexcept { return index_; }

  /// Top-m anchors for each token, ordered by descending CSLS then pool id.
  std::vector<std::vector<Candidate>> candidates(
      std::span<const std::string> tokens) const {
    const auto& vocab = index_.sources().vocab();
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto id = vocab.find(t);
      if (!id) {
        throw Error(ErrorCode::kTokenNotFound,
                    "token '" + t + "' not in the language embedding",
                    std::nullopt, t);
      }
      ids.push_back(*id);
    }
    const std::size_t m = std::min(top_m_, pool_size());
    std::vector<std::vector<Candidate>> out;
    out.reserve(tokens.size());
    for (auto& list : index_.neighbors(ids, m)) {
      std::vector<Candidate> c;
      c.reserve(list.entries.size());
      for (auto& e : list.entries) c.push_back({std::move(e.token), e.id, e.score});
      out.push_back(std::move(c));
    }
    return out;
  }

 private:
  static CslsIndex make_index(const EmbeddingMatrix& mapped_lang,
                              const EmbeddingMatrix& english,
                              std::span<const std::string> pool,
                              const AlignConfig& cfg) {
    cfg.validate();
    if (pool.empty()) {
      throw Error(ErrorCode::kEmptyAnchorPool,
                  "no English token is present in the model vocabulary");
    }
    if (mapped_lang.dim() != english.dim()) {
      throw Error(ErrorCode::kDimMismatch,
                  "mapped language dim " + std::to_string(mapped_lang.dim()) +
                      " != English dim " + std::to_string(english.dim()));
    }
    EmbeddingMatrix anchors = subset(english, pool);
    const std::size_t k = std::min({cfg.csls_k, anchors.size(), mapped_lang.size()});
    return CslsIndex(mapped_lang, anchors, k);
  }

  CslsIndex index_;
  std::size_t top_m_;
};

/// The candidate set for a single token: its top_m anchors by
/// CSLS(mapped(w), English(u)).
inline std::vector<Candidate> candidate_set(std::string_view token,
                                            const EmbeddingMatrix& mapped_lang,
                                            const EmbeddingMatrix& english,
                                            std::span<const std::string> pool,
                                            const AlignConfig& cfg) {
  MixtureIndex index(mapped_lang, english, pool, cfg);
  const std::string t(token);
  return std::move(index.candidates(std::span<const std::string>(&t, 1)).front());
}

/// Max-shifted softmax over candidate CSLS scores, sorted by descending
/// weight then ascending anchor id.
inline std::vector<WeightedAnchor> mixture_weights(std::span<const Candidate> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "candidate set is empty");
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (!std::isfinite(c.csls)) {
      throw Error(ErrorCode::kNonFiniteValue, "candidate score is not finite",
                  std::nullopt, c.token);
    }
    top = std::max(top, c.csls);
  }
  std::vector<WeightedAnchor> out;
  out.reserve(candidates.size());
  double z = 0.0;
  for (const auto& c : candidates) {
    const double e = std::exp(c.csls - top);
    z += e;
    out.push_back({c.token, c.anchor_id, e});
  }
  for (auto& w : out) w.weight /= z;
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.anchor_id < b.anchor_id;
  });
  return out;
}

/// Σ weight_i · model(anchor_i).
inline Vector mixture_embedding(std::span<const WeightedAnchor> weights,
                                const EmbeddingMatrix& model) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
  for (const auto& w : weights) {
    auto id = model.vocab().find(w.token);
    if (!id) {
      throw Error(ErrorCode::kMissingAnchor,
                  "anchor '" + w.token + "' has no model embedding", std::nullopt,
                  w.token);
    }
    out += w.weight * model.row(*id).transpose();
  }
  return out;
}

/// Mixture assignments for `new_tokens` (language-space tokens) in input
/// order. The language space is mapped into English with `to_english`.
inline std::vector<MixtureAssignment> build_all_assignments(
    std::span<const std::string> new_tokens, const EmbeddingMatrix& lang,
    const LinearMap& to_english, const EmbeddingMatrix& english,
    const EmbeddingMatrix& model, const AlignConfig& cfg) {
  std::vector<MixtureAssignment> out;
  if (new_tokens.empty()) return out;
  const EmbeddingMatrix mapped = apply_map(to_english, ensure_normalized(lang));
  const auto pool = anchor_pool(english.vocab(), model.vocab());
  MixtureIndex index(mapped, english, pool, cfg);
  const auto all = index.candidates(new_tokens);
  out.reserve(new_tokens.size());
  for (std::size_t i = 0; i < new_tokens.size(); ++i) {
    MixtureAssignment a;
    a.source_token = new_tokens[i];
    a.anchors = mixture_weights(all[i]);
    a.mixed_vector = mixture_embedding(a.anchors, model);
    out.push_back(std::move(a));
  }
  return out;
}

/// "anchor:weight,..." with weights at 6 decimals.
inline std::string format_anchor_list(std::span<const WeightedAnchor> anchors) {
  std::string s;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (i) s += ',';
    s += anchors[i].token;
    s += ':';
    s += text::format_fixed(anchors[i].weight, 6);
  }
  return s;
}

namespace detail {

// A weight field is digits '.' digits, ended by ',' or end of string. In
// strict mode the fraction must have exactly six digits, as written by
// format_anchor_list.
inline std::size_t weight_field_end(std::string_view s, std::size_t pos, bool strict) {
  std::size_t i = pos;
  auto digits = [&] {
    const std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    return i - start;
  };
  if (digits() == 0) return std::string_view::npos;
  if (i < s.size() && s[i] == '.') {
    ++i;
    const std::size_t frac = digits();
    if (frac == 0 || (strict && frac != 6)) return std::string_view::npos;
  } else if (strict) {
    return std::string_view::npos;
  }
  if (i == s.size() || s[i] == ',') return i;
  return std::string_view::npos;
}

}  // namespace detail

/// Inverse of format_anchor_list. Anchor tokens may themselves contain ':'
/// or ','; a separator is the first ':' followed by a six-decimal weight,
/// or failing that by any plain decimal weight.
inline std::vector<WeightedAnchor> parse_anchor_list(std::string_view s,
                                                     std::size_t line_no = 0) {
  std::vector<WeightedAnchor> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t colon = 0;
    std::size_t end = std::string_view::npos;
    for (bool strict : {true, false}) {
      for (colon = pos + 1; colon < s.size(); ++colon) {
        if (s[colon] != ':') continue;
        end = detail::weight_field_end(s, colon + 1, strict);
        if (end != std::string_view::npos) break;
      }
      if (end != std::string_view::npos) break;
    }
    if (end == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine, "cannot parse anchor list", line_no);
    }
    double w = 0.0;
    text::parse_double(s.substr(colon + 1, end - colon - 1), w);
    out.push_back({std::string(s.substr(pos, colon - pos)), out.size(), w});
    pos = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kMalformedLine, "empty anchor list", line_no);
  return out;
}

inline void write_assignments(std::span<const MixtureAssignment> assignments,
                              std::ostream& out) {
  for (const auto& a : assignments) {
    out << a.source_token << '\t' << format_anchor_list(a.anchors) << '\n';
  }
}

inline void save_assignments(std::span<const MixtureAssignment> assignments,
                             const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_assignments(assignments, out);
  text::finish_output(out, path);
}

/// Reads an assignment file. Weights are renormalized to sum to one since
/// the file stores them rounded; mixed vectors are left empty.
inline std::vector<MixtureAssignment> read_assignments(std::istream& in) {
  std::vector<MixtureAssignment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::strip_cr(line);
    if (view.empty()) continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(ErrorCode::kMalformedLine, "expected 'token<TAB>anchors'", line_no);
    }
    MixtureAssignment a;
    a.source_token = std::string(view.substr(0, tab));
    a.anchors = parse_anchor_list(view.substr(tab + 1), line_no);
    double z = 0.0;
    for (const auto& w : a.anchors) z += w.weight;
    if (!(z > 0.0)) {
      throw Error(ErrorCode::kMalformedLine, "anchor weights sum to zero", line_no);
    }
    for (auto& w : a.anchors) w.weight /= z;
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<MixtureAssignment> load_assignments(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return read_assignments(in);
}

}  // namespace vocab_bridge
