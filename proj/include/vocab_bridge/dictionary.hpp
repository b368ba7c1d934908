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

// Seed bilingual dictionaries: loading, identical-subword induction, and
// leakage-free train/eval splitting.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

struct DictionaryPair {
  std::string source;
  std::string target;

  friend auto operator<=>(const DictionaryPair&, const DictionaryPair&) = default;
};

/// Source -> target token pairs. A source may have several targets; exact
/// duplicate pairs are dropped on insertion.
class BilingualDictionary {
 public:
  BilingualDictionary() = default;

  explicit BilingualDictionary(const std::vector<DictionaryPair>& pairs) {
    for (const auto& p : pairs) add(p.source, p.target);
  }

  /// Returns false when the pair was already present.
  bool add(std::string source, std::string target) {
    if (!Vocabulary::valid_token(source) || !Vocabulary::valid_token(target)) {
      throw Error(ErrorCode::kInvalidToken, "dictionary tokens must be non-empty");
    }
    DictionaryPair p{std::move(source), std::move(target)};
    if (!seen_.insert(p).second) return false;
    pairs_.push_back(std::move(p));
    return true;
  }

  const std::vector<DictionaryPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  /// Unique sources in first-appearance order.
  std::vector<std::string> sources() const {
    std::vector<std::string> out;
    std::set<std::string_view> taken;
    for (const auto& p : pairs_) {
      if (taken.insert(p.source).second) out.push_back(p.source);
    }
    return out;
  }

  /// Source -> all of its targets, targets in insertion order.
  std::map<std::string, std::vector<std::string>> targets_by_source() const {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& p : pairs_) out[p.source].push_back(p.target);
    return out;
  }

 private:
  std::vector<DictionaryPair> pairs_;
  std::set<DictionaryPair> seen_;
};

struct DictionaryLoadReport {
  std::size_t dedup_count = 0;
};

/// One pair per line, TAB separated, or single-space separated when the line
/// has no TAB.
inline BilingualDictionary read_dictionary(std::istream& in,
                                           DictionaryLoadReport* report = nullptr,
                                           std::size_t max_pairs = 0) {
  BilingualDictionary dict;
  DictionaryLoadReport local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::strip_cr(line);
    if (view.empty()) continue;
    const char sep = view.find('\t') != std::string_view::npos ? '\t' : ' ';
    auto fields = text::split_exact(view, sep);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty() ||
        !Vocabulary::valid_token(fields[0]) || !Vocabulary::valid_token(fields[1])) {
      throw Error(ErrorCode::kMalformedLine, "expected 'source<sep>target'",
                  line_no);
    }
    if (max_pairs != 0 && dict.size() >= max_pairs) break;
    if (!dict.add(std::string(fields[0]), std::string(fields[1]))) {
      ++local.dedup_count;
    }
  }
  if (report) *report = local;
  return dict;
}

inline BilingualDictionary load_dictionary(const std::filesystem::path& path,
                                           DictionaryLoadReport* report = nullptr,
                                           std::size_t max_pairs = 0) {
  auto in = text::open_input(path);
  return read_dictionary(in, report, max_pairs);
}

inline void write_dictionary(const BilingualDictionary& d, std::ostream& out) {
  for (const auto& p : d.pairs()) out << p.source << '\t' << p.target << '\n';
}

inline void save_dictionary(const BilingualDictionary& d,
                            const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_dictionary(d, out);
  text::finish_output(out, path);
}

/// (t, t) for every token shared by both vocabularies, in `src` order. An
/// empty result is legal; callers that train on it will reject it.
inline BilingualDictionary identical_subword_dictionary(const Vocabulary& src,
                                                        const Vocabulary& tgt) {
  BilingualDictionary d;
  for (const auto& t : src.tokens()) {
    if (tgt.contains(t)) d.add(t, t);
  }
  return d;
}

struct DictionarySplit {
  BilingualDictionary train;
  BilingualDictionary eval;
};

/// Splits by unique source token so no source appears on both sides. The
/// eval side gets max(1, round(fraction * sources)) sources, capped so train
/// keeps at least one.
inline DictionarySplit split_dictionary(const BilingualDictionary& d,
                                        double eval_fraction,
                                        std::uint64_t seed) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eval fraction must be in (0, 1)");
  }
  auto sources = d.sources();
  if (d.size() < 2 || sources.size() < 2) {
    throw Error(ErrorCode::kTooFewPairs,
                "need at least two distinct sources to split");
  }
  const auto n = sources.size();
  auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(n)));
  n_eval = std::clamp<std::size_t>(n_eval, 1, n - 1);

  std::mt19937_64 rng(seed);
  std::shuffle(sources.begin(), sources.end(), rng);
  std::set<std::string> eval_sources(sources.begin(), sources.begin() + static_cast<std::ptrdiff_t>(n_eval));

  DictionarySplit out;
  for (const auto& p : d.pairs()) {
    (eval_sources.contains(p.source) ? out.eval : out.train).add(p.source, p.target);
  }
  return out;
}

}  // namespace vocab_bridge
