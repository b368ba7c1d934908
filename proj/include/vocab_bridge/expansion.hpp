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

// Vocabulary expansion: choose the language subwords the model lacks, append
// them after the original vocabulary, and give each one an embedding row by
// mixture mapping, joint mapping, or a random donor row.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vocab_bridge/alignment.hpp"
#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/mixture.hpp"
#include "vocab_bridge/subword_tokenizer.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

/// A subword to add. `token` is in the model's continuation convention;
/// `source_token` is the same unit as spelled in the language vocabulary.
struct NewSubword {
  std::string token;
  std::string source_token;

  friend bool operator==(const NewSubword&, const NewSubword&) = default;
};

/// Rewrites a language-vocabulary token into the model's convention: a
/// trailing end-of-word marker is dropped and the language continuation
/// prefix is replaced by the model's.
inline std::string to_model_convention(std::string_view token,
                                       std::string_view lang_prefix,
                                       std::string_view model_prefix,
                                       std::string_view end_marker = kEndOfWordMarker) {
  std::string_view t = token;
  if (!end_marker.empty() && t.size() > end_marker.size() && t.ends_with(end_marker)) {
    t.remove_suffix(end_marker.size());
  }
  if (!lang_prefix.empty() && t.size() > lang_prefix.size() && t.starts_with(lang_prefix)) {
    return std::string(model_prefix) + std::string(t.substr(lang_prefix.size()));
  }
  return std::string(t);
}

using TokenCounts = std::map<std::string, std::uint64_t, std::less<>>;

/// Every language token, converted to the model convention, that the model
/// vocabulary lacks; in language vocabulary order. With `counts`, tokens
/// seen fewer than `min_freq` times are skipped.
inline std::vector<NewSubword> select_new_subwords(const Vocabulary& lang,
                                                   const Vocabulary& model,
                                                   const TokenCounts* counts = nullptr,
                                                   std::uint64_t min_freq = 0) {
  std::vector<NewSubword> out;
  std::unordered_set<std::string> taken;
  for (const auto& t : lang.tokens()) {
    if (counts && min_freq > 0) {
      auto it = counts->find(t);
      if (it == counts->end() || it->second < min_freq) continue;
    }
    std::string converted = to_model_convention(t, lang.continuation_prefix(),
                                                 model.continuation_prefix());
    if (model.contains(converted) || !taken.insert(converted).second) continue;
    out.push_back({std::move(converted), t});
  }
  return out;
}

inline std::vector<std::string> source_tokens(std::span<const NewSubword> subwords) {
  std::vector<std::string> out;
  out.reserve(subwords.size());
  for (const auto& s : subwords) out.push_back(s.source_token);
  return out;
}

/// "token count" per line, as written by bpe-train --counts-out.
inline TokenCounts read_token_counts(std::istream& in) {
  TokenCounts counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = text::split_whitespace(text::strip_cr(line));
    if (fields.empty()) continue;
    std::size_t c = 0;
    if (fields.size() != 2 || !text::parse_size(fields[1], c)) {
      throw Error(ErrorCode::kMalformedLine, "expected 'token count'", line_no);
    }
    counts[std::string(fields[0])] += c;
  }
  return counts;
}

inline TokenCounts load_token_counts(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return read_token_counts(in);
}

enum class StrategyKind { kMixture, kJoint, kRandom };

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kMixture: return "mixture";
    case StrategyKind::kJoint: return "joint";
    case StrategyKind::kRandom: return "random";
  }
  return "?";
}

/// How new rows are built. Only the random baseline carries a seed.
class ExpansionStrategy {
 public:
  static ExpansionStrategy mixture() { return ExpansionStrategy(StrategyKind::kMixture, {}); }
  static ExpansionStrategy joint() { return ExpansionStrategy(StrategyKind::kJoint, {}); }
  static ExpansionStrategy random(std::uint64_t seed) {
    return ExpansionStrategy(StrategyKind::kRandom, seed);
  }

  StrategyKind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

 private:
  ExpansionStrategy(StrategyKind kind, std::optional<std::uint64_t> seed)
      : kind_(kind), seed_(seed) {}

  StrategyKind kind_;
  std::optional<std::uint64_t> seed_;
};

/// Per-strategy inputs; only the fields the chosen strategy reads are needed.
struct ExpansionInputs {
  std::span<const MixtureAssignment> assignments;
  const EmbeddingMatrix* lang = nullptr;
  const LinearMap* to_english = nullptr;
  const LinearMap* to_model = nullptr;
};

struct Provenance {
  std::string token;
  StrategyKind strategy = StrategyKind::kMixture;
  std::string detail;
};

/// Original model plus appended subwords. Rows [0, original_size) are the
/// untouched original embedding.
struct ExpandedModel {
  EmbeddingMatrix embeddings;
  std::size_t original_size = 0;
  std::vector<Provenance> provenance;

  const Vocabulary& vocab() const noexcept { return embeddings.vocab(); }
};

inline ExpandedModel expand_vocabulary(const EmbeddingMatrix& model,
                                       std::span<const NewSubword> new_subwords,
                                       const ExpansionStrategy& strategy,
                                       const ExpansionInputs& inputs = {}) {
  const std::size_t n0 = model.size();
  const std::size_t dim = model.dim();
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& s : new_subwords) {
      if (model.vocab().contains(s.token) || !seen.insert(s.token).second) {
        throw Error(ErrorCode::kDuplicateNewToken,
                    "new token '" + s.token + "' is already in the vocabulary",
                    std::nullopt, s.token);
      }
    }
  }

  std::vector<std::string> tokens = model.vocab().tokens();
  tokens.reserve(n0 + new_subwords.size());
  RowMatrix rows(static_cast<Eigen::Index>(n0 + new_subwords.size()),
                 static_cast<Eigen::Index>(dim));
  rows.topRows(static_cast<Eigen::Index>(n0)) = model.rows();
  std::vector<Provenance> provenance;
  provenance.reserve(new_subwords.size());

  auto put = [&](std::size_t i, const auto& row, std::string detail) {
    rows.row(static_cast<Eigen::Index>(n0 + i)) = row;
    tokens.push_back(new_subwords[i].token);
    provenance.push_back({new_subwords[i].token, strategy.kind(), std::move(detail)});
  };

  switch (strategy.kind()) {
    case StrategyKind::kMixture: {
      std::unordered_map<std::string_view, const MixtureAssignment*> by_token;
      for (const auto& a : inputs.assignments) by_token.emplace(a.source_token, &a);
      for (std::size_t i = 0; i < new_subwords.size(); ++i) {
        auto it = by_token.find(new_subwords[i].source_token);
        if (it == by_token.end()) {
          throw Error(ErrorCode::kMissingAssignment,
                      "no mixture assignment for '" + new_subwords[i].source_token + "'",
                      std::nullopt, new_subwords[i].source_token);
        }
        const auto& anchors = it->second->anchors;
        put(i, mixture_embedding(anchors, model).transpose(), format_anchor_list(anchors));
      }
      break;
    }
    case StrategyKind::kJoint: {
      if (new_subwords.empty()) break;
      if (!inputs.lang || !inputs.to_english || !inputs.to_model) {
        throw Error(ErrorCode::kInvalidArgument,
                    "joint expansion needs the language embedding and both maps");
      }
      const auto& b = *inputs.to_english;
      const auto& a = *inputs.to_model;
      if (inputs.lang->dim() != b.src_dim() || b.tgt_dim() != a.src_dim() ||
          a.tgt_dim() != dim) {
        throw Error(ErrorCode::kDimMismatch,
                    "language dim -> English map -> model map -> model dim do not chain");
      }
      const Eigen::MatrixXd chain = b.matrix() * a.matrix();
      for (std::size_t i = 0; i < new_subwords.size(); ++i) {
        const auto& src = new_subwords[i].source_token;
        Eigen::RowVectorXd row = inputs.lang->row(src) * chain;
        put(i, row, "source=" + src);
      }
      break;
    }
    case StrategyKind::kRandom: {
      if (n0 == 0 && !new_subwords.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "random donors need a non-empty model");
      }
      std::mt19937_64 rng(*strategy.seed());
      std::uniform_int_distribution<std::size_t> pick(0, n0 == 0 ? 0 : n0 - 1);
      for (std::size_t i = 0; i < new_subwords.size(); ++i) {
        const std::size_t donor = pick(rng);
        put(i, model.row(donor), "donor=" + model.vocab().token(donor));
      }
      break;
    }
  }

  return ExpandedModel{
      EmbeddingMatrix(Vocabulary(std::move(tokens), model.vocab().continuation_prefix()),
                      std::move(rows)),
      n0, std::move(provenance)};
}

inline void write_provenance(std::span<const Provenance> records, std::ostream& out) {
  for (const auto& p : records) {
    out << p.token << '\t' << to_string(p.strategy) << '\t' << p.detail << '\n';
  }
}

/// Writes vocab.txt, embeddings.vec and provenance.tsv into `out_dir`.
inline void emit_expanded(const ExpandedModel& m, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create directory " + out_dir.string() + ": " +
                                    ec.message());
  }
  save_vocabulary(m.vocab(), out_dir / "vocab.txt");
  save_embeddings(m.embeddings, out_dir / "embeddings.vec");
  auto out = text::open_output(out_dir / "provenance.tsv");
  write_provenance(m.provenance, out);
  text::finish_output(out, out_dir / "provenance.tsv");
}

}  // namespace vocab_bridge
