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

// Corpus-level word and subword OOV rates and before/after comparison.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/subword_tokenizer.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

inline constexpr std::size_t kDefaultTopOov = 50;

struct OovReport {
  std::uint64_t total_words = 0;
  std::uint64_t word_oov = 0;
  std::uint64_t subword_oov = 0;
  double word_oov_rate = 0.0;
  double subword_oov_rate = 0.0;
  /// Word-level OOV words by descending frequency, ties by ascending word.
  std::vector<std::pair<std::string, std::uint64_t>> top_oov_tokens;
  /// Counts distinct words instead of occurrences.
  bool type_level = false;
};

struct OovOptions {
  std::size_t top_n = kDefaultTopOov;
  bool type_level = false;
  std::size_t max_chars = kDefaultMaxChars;
};

namespace detail {

inline void finalize_rates(OovReport& r) {
  if (r.total_words == 0) {
    r.word_oov_rate = 0.0;
    r.subword_oov_rate = 0.0;
    return;
  }
  r.word_oov_rate = static_cast<double>(r.word_oov) / static_cast<double>(r.total_words);
  r.subword_oov_rate =
      static_cast<double>(r.subword_oov) / static_cast<double>(r.total_words);
}

}  // namespace detail

/// A word is word-level OOV unless it is a single vocabulary token, and
/// subword-level OOV when it cannot be segmented at all.
inline OovReport corpus_oov_stats(const Vocabulary& vocab, std::string_view unk,
                                  std::istream& corpus, const OovOptions& opts = {}) {
  std::map<std::string, std::pair<std::uint64_t, OovStatus>> words;
  for_each_segmentation(
      vocab, unk, corpus,
      [&](const Segmentation& s) {
        auto [it, inserted] = words.try_emplace(s.word, 0, s.status);
        ++it->second.first;
      },
      opts.max_chars);

  OovReport r;
  r.type_level = opts.type_level;
  std::vector<std::pair<std::string, std::uint64_t>> oov;
  for (const auto& [word, info] : words) {
    const auto [freq, status] = info;
    const std::uint64_t weight = opts.type_level ? 1 : freq;
    r.total_words += weight;
    if (status != OovStatus::kInVocab) {
      r.word_oov += weight;
      oov.emplace_back(word, freq);
    }
    if (status == OovStatus::kSubwordOov) r.subword_oov += weight;
  }
  std::stable_sort(oov.begin(), oov.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (oov.size() > opts.top_n) oov.resize(opts.top_n);
  r.top_oov_tokens = std::move(oov);
  detail::finalize_rates(r);
  return r;
}

struct OovDelta {
  std::uint64_t total_words = 0;
  std::int64_t word_oov = 0;
  std::int64_t subword_oov = 0;
  double word_oov_rate = 0.0;
  double subword_oov_rate = 0.0;
  /// An after-rate exceeds its before-rate although the after vocabulary
  /// contains the before vocabulary.
  bool violation = false;
};

/// after - before, field by field.
inline OovDelta compare_reports(const OovReport& before, const OovReport& after,
                                bool after_is_superset = true) {
  if (before.total_words != after.total_words || before.type_level != after.type_level) {
    throw Error(ErrorCode::kCorpusMismatch,
                "reports were computed over different corpora (" +
                    std::to_string(before.total_words) + " vs " +
                    std::to_string(after.total_words) + " words)");
  }
  OovDelta d;
  d.total_words = before.total_words;
  d.word_oov = static_cast<std::int64_t>(after.word_oov) -
               static_cast<std::int64_t>(before.word_oov);
  d.subword_oov = static_cast<std::int64_t>(after.subword_oov) -
                  static_cast<std::int64_t>(before.subword_oov);
  d.word_oov_rate = after.word_oov_rate - before.word_oov_rate;
  d.subword_oov_rate = after.subword_oov_rate - before.subword_oov_rate;
  d.violation = after_is_superset && (after.word_oov_rate > before.word_oov_rate ||
                                      after.subword_oov_rate > before.subword_oov_rate);
  return d;
}

inline constexpr std::string_view kReportTsvHeader =
    "#total_words\tword_oov\tsubword_oov\tword_oov_rate\tsubword_oov_rate\tlevel";

/// Header comment plus the single data line.
inline void write_report_tsv(const OovReport& r, std::ostream& out) {
  out << kReportTsvHeader << '\n'
      << r.total_words << '\t' << r.word_oov << '\t' << r.subword_oov << '\t'
      << text::format_significant(r.word_oov_rate, 17) << '\t'
      << text::format_significant(r.subword_oov_rate, 17) << '\t'
      << (r.type_level ? "type" : "token") << '\n';
}

inline OovReport read_report_tsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::strip_cr(line);
    if (view.empty() || view.front() == '#') continue;
    auto f = text::split_exact(view, '\t');
    OovReport r;
    std::size_t total = 0;
    std::size_t word = 0;
    std::size_t sub = 0;
    if (f.size() != 6 || !text::parse_size(f[0], total) || !text::parse_size(f[1], word) ||
        !text::parse_size(f[2], sub) || (f[5] != "type" && f[5] != "token")) {
      throw Error(ErrorCode::kMalformedLine, "malformed OOV report line", line_no);
    }
    r.total_words = total;
    r.word_oov = word;
    r.subword_oov = sub;
    r.type_level = f[5] == "type";
    if (!(r.subword_oov <= r.word_oov && r.word_oov <= r.total_words)) {
      throw Error(ErrorCode::kMalformedLine, "inconsistent OOV counts", line_no);
    }
    detail::finalize_rates(r);
    return r;
  }
  throw Error(ErrorCode::kMalformedLine, "OOV report has no data line", line_no);
}

inline OovReport load_report_tsv(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return read_report_tsv(in);
}

inline std::string format_percent(double rate) { return text::format_fixed(100.0 * rate, 2) + "%"; }

inline void write_report_text(const OovReport& r, std::ostream& out) {
  const char* unit = r.type_level ? "types" : "tokens";
  out << "words (" << unit << "):   " << r.total_words << '\n'
      << "word-level OOV:   " << r.word_oov << " (" << format_percent(r.word_oov_rate) << ")\n"
      << "subword-level OOV: " << r.subword_oov << " ("
      << format_percent(r.subword_oov_rate) << ")\n";
  if (!r.top_oov_tokens.empty()) {
    out << "most frequent word-level OOV words:\n";
    for (const auto& [w, c] : r.top_oov_tokens) out << "  " << w << '\t' << c << '\n';
  }
}

inline void write_delta_text(const OovDelta& d, std::ostream& out) {
  auto signed_count = [](std::int64_t v) {
    return (v > 0 ? "+" : "") + std::to_string(v);
  };
  auto signed_rate = [](double v) {
    return (v > 0 ? "+" : "") + text::format_fixed(100.0 * v, 4) + "%";
  };
  out << "words:              " << d.total_words << '\n'
      << "word-level OOV:     " << signed_count(d.word_oov) << " ("
      << signed_rate(d.word_oov_rate) << ")\n"
      << "subword-level OOV:  " << signed_count(d.subword_oov) << " ("
      << signed_rate(d.subword_oov_rate) << ")\n"
      << "monotonicity:       " << (d.violation ? "VIOLATED" : "ok") << '\n';
}

}  // namespace vocab_bridge
