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

// Byte-pair-encoding training and application, greedy longest-match
// WordPiece segmentation, and the two-level OOV classification built on it.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/text_io.hpp"

namespace vocab_bridge {

inline constexpr std::string_view kEndOfWordMarker = "</w>";
inline constexpr std::string_view kDefaultUnkToken = "[UNK]";
inline constexpr std::string_view kMergesHeader = "#version: vocab-bridge-1";
inline constexpr std::size_t kDefaultBpeVocabSize = 50000;

struct MergePair {
  std::string left;
  std::string right;

  friend auto operator<=>(const MergePair&, const MergePair&) = default;
};

/// Word -> occurrence count. std::map keeps iteration order deterministic.
using WordCounts = std::map<std::string, std::uint64_t>;

/// Counts whitespace-separated words in a text stream.
inline WordCounts count_words(std::istream& in) {
  WordCounts counts;
  std::string line;
  while (std::getline(in, line)) {
    for (auto w : text::split_whitespace(line)) ++counts[std::string(w)];
  }
  return counts;
}

/// Ordered merge list. Rank (position) decides application priority.
class BpeModel {
 public:
  BpeModel() = default;
  BpeModel(std::vector<MergePair> merges, std::size_t vocab_size_target = 0,
           std::string end_of_word_marker = std::string(kEndOfWordMarker))
      : merges_(std::move(merges)),
        vocab_size_target_(vocab_size_target),
        marker_(std::move(end_of_word_marker)) {
    for (std::size_t i = 0; i < merges_.size(); ++i) {
      if (!ranks_.emplace(key(merges_[i].left, merges_[i].right), i).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate merge '" + merges_[i].left + " " +
                        merges_[i].right + "'",
                    std::nullopt, std::nullopt, i);
      }
    }
  }

  const std::vector<MergePair>& merges() const noexcept { return merges_; }
  std::size_t vocab_size_target() const noexcept { return vocab_size_target_; }
  const std::string& end_of_word_marker() const noexcept { return marker_; }

  std::optional<std::size_t> rank(std::string_view left,
                                  std::string_view right) const {
    auto it = ranks_.find(key(left, right));
    if (it == ranks_.end()) return std::nullopt;
    return it->second;
  }

 private:
  // '\n' never appears inside a symbol, so it is a safe separator.
  static std::string key(std::string_view left, std::string_view right) {
    std::string k;
    k.reserve(left.size() + right.size() + 1);
    k.append(left).push_back('\n');
    k.append(right);
    return k;
  }

  std::vector<MergePair> merges_;
  std::size_t vocab_size_target_ = 0;
  std::string marker_{kEndOfWordMarker};
  std::unordered_map<std::string, std::size_t> ranks_;
};

namespace detail {

/// Characters of `word` with the end-of-word marker fused onto the last one.
inline std::vector<std::string> initial_symbols(std::string_view word,
                                                std::string_view marker) {
  auto chars = text::split_utf8(word);
  if (!chars.empty()) chars.back() += marker;
  return chars;
}

class BpeTrainer {
 public:
  explicit BpeTrainer(const WordCounts& corpus, std::string_view marker) {
    for (const auto& [word, freq] : corpus) {
      if (freq == 0 || word.empty()) continue;
      Word w;
      w.freq = static_cast<std::int64_t>(freq);
      for (auto& s : initial_symbols(word, marker)) w.syms.push_back(intern(s));
      words_.push_back(std::move(w));
    }
    initial_types_ = symbols_.size();
    for (std::size_t i = 0; i < words_.size(); ++i) add_pairs(i);
  }

  bool empty() const { return words_.empty(); }
  std::size_t initial_types() const { return initial_types_; }

  std::vector<MergePair> run(std::size_t target) {
    std::vector<MergePair> merges;
    while (initial_types_ + merges.size() < target && !queue_.empty()) {
      const Entry best = *queue_.begin();
      if (best.count < 2) break;
      merges.push_back({symbols_[best.left], symbols_[best.right]});
      apply(best.left, best.right);
    }
    return merges;
  }

 private:
  struct Word {
    std::vector<int> syms;
    std::int64_t freq = 0;
  };
  struct Entry {
    std::int64_t count;
    int left;
    int right;
  };
  struct EntryOrder {
    const std::vector<std::string>* symbols;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.count != b.count) return a.count > b.count;
      const auto& s = *symbols;
      if (a.left != b.left) return s[a.left] < s[b.left];
      return s[a.right] < s[b.right];
    }
  };

  static std::uint64_t pair_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  int intern(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<int>(symbols_.size()));
    if (inserted) symbols_.push_back(s);
    return it->second;
  }

  void bump(int a, int b, std::int64_t delta, std::size_t word) {
    const std::uint64_t k = pair_key(a, b);
    std::int64_t& c = counts_[k];
    if (c > 0) queue_.erase(Entry{c, a, b});
    c += delta;
    if (c > 0) {
      queue_.insert(Entry{c, a, b});
      if (delta > 0) where_[k].insert(word);
    } else {
      counts_.erase(k);
    }
  }

  void add_pairs(std::size_t i) {
    const auto& w = words_[i];
    for (std::size_t j = 0; j + 1 < w.syms.size(); ++j) {
      bump(w.syms[j], w.syms[j + 1], w.freq, i);
    }
  }

  void remove_pairs(std::size_t i) {
    const auto& w = words_[i];
    for (std::size_t j = 0; j + 1 < w.syms.size(); ++j) {
      bump(w.syms[j], w.syms[j + 1], -w.freq, i);
    }
  }

  void apply(int a, int b) {
    const int merged = intern(symbols_[a] + symbols_[b]);
    auto node = where_.extract(pair_key(a, b));
    if (node.empty()) return;
    std::vector<std::size_t> affected(node.mapped().begin(), node.mapped().end());
    std::sort(affected.begin(), affected.end());
    for (std::size_t i : affected) {
      auto& syms = words_[i].syms;
      bool present = false;
      for (std::size_t j = 0; j + 1 < syms.size(); ++j) {
        if (syms[j] == a && syms[j + 1] == b) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      remove_pairs(i);
      std::vector<int> out;
      out.reserve(syms.size());
      for (std::size_t j = 0; j < syms.size(); ++j) {
        if (j + 1 < syms.size() && syms[j] == a && syms[j + 1] == b) {
          out.push_back(merged);
          ++j;
        } else {
          out.push_back(syms[j]);
        }
      }
      syms = std::move(out);
      add_pairs(i);
    }
  }

  std::vector<Word> words_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
  std::size_t initial_types_ = 0;
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
  std::unordered_map<std::uint64_t, std::unordered_set<std::size_t>> where_;
  std::set<Entry, EntryOrder> queue_{EntryOrder{&symbols_}};
};

}  // namespace detail

/// Learns merges by repeatedly fusing the most frequent adjacent symbol pair
/// (ties: lexicographically smallest (left, right)) until the symbol-type
/// count, initial characters plus merges, reaches `target_vocab` or no pair
/// occurs at least twice.
inline BpeModel bpe_train(const WordCounts& corpus, std::size_t target_vocab,
                          std::string end_of_word_marker =
                              std::string(kEndOfWordMarker)) {
  detail::BpeTrainer trainer(corpus, end_of_word_marker);
  if (trainer.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no words");
  }
  if (target_vocab <= trainer.initial_types()) {
    throw Error(ErrorCode::kInvalidArgument,
                "target vocabulary " + std::to_string(target_vocab) +
                    " must exceed the " +
                    std::to_string(trainer.initial_types()) +
                    " initial character symbols");
  }
  return BpeModel(trainer.run(target_vocab), target_vocab,
                  std::move(end_of_word_marker));
}

/// Segments one word by applying merges in learned order. The end-of-word
/// marker is stripped from the output, so the pieces concatenate to `word`.
inline std::vector<std::string> bpe_apply(const BpeModel& model,
                                          std::string_view word) {
  if (word.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot segment an empty word");
  }
  const std::string& marker = model.end_of_word_marker();
  auto syms = detail::initial_symbols(word, marker);
  while (syms.size() > 1) {
    std::size_t best_rank = SIZE_MAX;
    std::size_t best_pos = 0;
    for (std::size_t j = 0; j + 1 < syms.size(); ++j) {
      auto r = model.rank(syms[j], syms[j + 1]);
      if (r && *r < best_rank) {
        best_rank = *r;
        best_pos = j;
      }
    }
    if (best_rank == SIZE_MAX) break;
    const std::string left = syms[best_pos];
    const std::string right = syms[best_pos + 1];
    std::vector<std::string> out;
    out.reserve(syms.size());
    for (std::size_t j = 0; j < syms.size(); ++j) {
      if (j + 1 < syms.size() && syms[j] == left && syms[j + 1] == right) {
        out.push_back(left + right);
        ++j;
      } else {
        out.push_back(std::move(syms[j]));
      }
    }
    syms = std::move(out);
  }
  std::string& last = syms.back();
  if (last.size() >= marker.size() &&
      last.compare(last.size() - marker.size(), marker.size(), marker) == 0) {
    last.resize(last.size() - marker.size());
  }
  return syms;
}

/// Marks every non-initial piece with `prefix`, WordPiece style.
inline std::vector<std::string> to_wordpiece(
    std::vector<std::string> pieces,
    std::string_view prefix = kDefaultContinuationPrefix) {
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    pieces[i].insert(0, prefix);
  }
  return pieces;
}

/// Frequency of every WordPiece-convention token produced by segmenting the
/// corpus, sorted by descending count then ascending token. The token list is
/// the subword vocabulary the model induces on that corpus.
inline std::vector<std::pair<std::string, std::uint64_t>> bpe_token_counts(
    const BpeModel& model, const WordCounts& corpus,
    std::string_view prefix = kDefaultContinuationPrefix) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& [word, freq] : corpus) {
    if (word.empty() || freq == 0) continue;
    for (auto& piece : to_wordpiece(bpe_apply(model, word), prefix)) {
      counts[piece] += freq;
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> out(counts.begin(),
                                                         counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

inline void write_merges(const BpeModel& model, std::ostream& out) {
  out << kMergesHeader << '\n';
  for (const auto& m : model.merges()) out << m.left << ' ' << m.right << '\n';
}

inline void save_merges(const BpeModel& model, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_merges(model, out);
  text::finish_output(out, path);
}

inline BpeModel read_merges(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<MergePair> merges;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::strip_cr(line);
    if (line_no == 1) {
      if (view != kMergesHeader) {
        throw Error(ErrorCode::kMalformedHeader,
                    "expected '" + std::string(kMergesHeader) + "'", 1);
      }
      continue;
    }
    if (view.empty()) continue;
    auto fields = text::split_exact(view, ' ');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::kMalformedLine, "expected 'left right'", line_no);
    }
    merges.push_back({std::string(fields[0]), std::string(fields[1])});
  }
  if (line_no == 0) throw Error(ErrorCode::kMalformedHeader, "empty merges file", 1);
  return BpeModel(std::move(merges));
}

inline BpeModel load_merges(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  return read_merges(in);
}

enum class OovStatus { kInVocab, kWordOovSubwordOk, kSubwordOov };

inline std::string_view to_string(OovStatus s) {
  switch (s) {
    case OovStatus::kInVocab: return "IN_VOCAB";
    case OovStatus::kWordOovSubwordOk: return "WORD_OOV_SUBWORD_OK";
    case OovStatus::kSubwordOov: return "SUBWORD_OOV";
  }
  return "?";
}

struct Segmentation {
  std::string word;
  std::vector<std::string> pieces;
  OovStatus status = OovStatus::kSubwordOov;
};

inline constexpr std::size_t kDefaultMaxChars = 100;

/// Greedy longest-match-first segmentation. Non-initial pieces are looked up
/// with the vocabulary's continuation prefix. Words with an unmatched
/// position, or longer than `max_chars` characters, become [unk].
inline Segmentation wordpiece_segment(const Vocabulary& vocab,
                                      std::string_view unk,
                                      std::string_view word,
                                      std::size_t max_chars = kDefaultMaxChars) {
  if (word.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot segment an empty word");
  }
  Segmentation seg;
  seg.word = std::string(word);
  const auto bounds = text::utf8_boundaries(word);
  const std::size_t n = bounds.size() - 1;
  auto fail = [&] {
    seg.pieces = {std::string(unk)};
    seg.status = OovStatus::kSubwordOov;
    return seg;
  };
  if (n > max_chars) return fail();

  const std::string& prefix = vocab.continuation_prefix();
  std::string candidate;
  std::size_t start = 0;
  while (start < n) {
    bool matched = false;
    for (std::size_t end = n; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate = prefix;
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (vocab.contains(candidate)) {
        seg.pieces.push_back(candidate);
        start = end;
        matched = true;
        break;
      }
    }
    if (!matched) return fail();
  }
  seg.status = seg.pieces.size() == 1 ? OovStatus::kInVocab
                                      : OovStatus::kWordOovSubwordOk;
  return seg;
}

/// Calls `visit` with the segmentation of every whitespace-separated word of
/// `corpus`, in order.
inline void for_each_segmentation(
    const Vocabulary& vocab, std::string_view unk, std::istream& corpus,
    const std::function<void(const Segmentation&)>& visit,
    std::size_t max_chars = kDefaultMaxChars) {
  std::unordered_map<std::string, Segmentation> cache;
  std::string line;
  while (std::getline(corpus, line)) {
    for (auto w : text::split_whitespace(line)) {
      std::string key(w);
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, wordpiece_segment(vocab, unk, w, max_chars)).first;
      }
      visit(it->second);
    }
  }
  if (corpus.bad()) throw Error(ErrorCode::kIo, "corpus read failed");
}

inline std::vector<Segmentation> classify_corpus(
    const Vocabulary& vocab, std::string_view unk, std::istream& corpus,
    std::size_t max_chars = kDefaultMaxChars) {
  std::vector<Segmentation> out;
  for_each_segmentation(
      vocab, unk, corpus, [&](const Segmentation& s) { out.push_back(s); },
      max_chars);
  return out;
}

}  // namespace vocab_bridge
