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

#include "vocab_bridge/dictionary.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace vocab_bridge {
namespace {

using Pairs = std::vector<DictionaryPair>;

BilingualDictionary parse(const std::string& s, DictionaryLoadReport* r = nullptr,
                          std::size_t max_pairs = 0) {
  std::istringstream in(s);
  return read_dictionary(in, r, max_pairs);
}

BilingualDictionary numbered(int sources, int targets_each = 1) {
  BilingualDictionary d;
  for (int s = 0; s < sources; ++s)
    for (int t = 0; t < targets_each; ++t)
      d.add("s" + std::to_string(s), "t" + std::to_string(s) + "_" + std::to_string(t));
  return d;
}

std::set<std::string> sources_of(const BilingualDictionary& d) {
  auto v = d.sources();
  return {v.begin(), v.end()};
}

TEST(LoadDictionaryTest, SpaceSeparatedEcho) {
  auto d = parse("chat cat\nchien dog");
  EXPECT_EQ(d.pairs(), (Pairs{{"chat", "cat"}, {"chien", "dog"}}));
}

TEST(LoadDictionaryTest, DuplicatesDroppedAndCounted) {
  DictionaryLoadReport r;
  auto d = parse("chat cat\nchat cat\n", &r);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(r.dedup_count, 1u);
}

TEST(LoadDictionaryTest, LoneTokenIsMalformedLineOne) {
  try {
    parse("chat\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedLine);
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse("a b c\n"), Error);
  EXPECT_THROW(parse("a\tb\tc\n"), Error);
  EXPECT_THROW(parse("a  b\n"), Error);
}

TEST(LoadDictionaryTest, SeparatorDetectedPerLine) {
  auto d = parse("a\tb\r\nc d\n\ne\tf\n");
  EXPECT_EQ(d.pairs(), (Pairs{{"a", "b"}, {"c", "d"}, {"e", "f"}}));
  // A TAB line keeps a space-free pair even when other lines use spaces.
  EXPECT_THROW(parse("a b\tc\n"), Error);
}

TEST(LoadDictionaryTest, MultiTargetSourcesKept) {
  auto d = parse("banc bench\nbanc bank\n");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.sources(), (std::vector<std::string>{"banc"}));
  EXPECT_EQ(d.targets_by_source().at("banc"), (std::vector<std::string>{"bench", "bank"}));
}

TEST(LoadDictionaryTest, MaxPairsCapsLoad) {
  EXPECT_EQ(parse("a 1\nb 2\nc 3\n", nullptr, 2).size(), 2u);
}

TEST(LoadDictionaryTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "vb_dict_test.tsv";
  auto d = parse("chat cat\nça that\n##er ##er\n");
  save_dictionary(d, path);
  EXPECT_EQ(load_dictionary(path).pairs(), d.pairs());
  std::filesystem::remove(path);
  EXPECT_THROW(load_dictionary(path), Error);
}

TEST(BilingualDictionaryTest, AddReportsDuplicatesAndRejectsEmpty) {
  BilingualDictionary d;
  EXPECT_TRUE(d.add("a", "b"));
  EXPECT_FALSE(d.add("a", "b"));
  EXPECT_TRUE(d.add("a", "c"));
  EXPECT_THROW(d.add("", "x"), Error);
  EXPECT_EQ(d.size(), 2u);
}

TEST(IdenticalSubwordTest, Intersection) {
  auto d = identical_subword_dictionary(Vocabulary({"a", "b", "c"}), Vocabulary({"b", "c", "d"}));
  EXPECT_EQ(d.pairs(), (Pairs{{"b", "b"}, {"c", "c"}}));
}

TEST(IdenticalSubwordTest, DisjointIsEmpty) {
  EXPECT_TRUE(identical_subword_dictionary(Vocabulary({"a"}), Vocabulary({"b"})).empty());
}

TEST(IdenticalSubwordTest, IdenticalVocabsGiveAllTokensInOrder) {
  Vocabulary v({"z", "##y", "x", "ça"});
  auto d = identical_subword_dictionary(v, v);
  ASSERT_EQ(d.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(d.pairs()[i].source, v.token(i));
    EXPECT_EQ(d.pairs()[i].target, v.token(i));
  }
}

TEST(IdenticalSubwordTest, SymmetricUnderArgumentSwap) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> tok(0, 40);
  for (int trial = 0; trial < 30; ++trial) {
    std::set<std::string> a;
    std::set<std::string> b;
    for (int i = 0; i < 20; ++i) {
      a.insert("w" + std::to_string(tok(rng)));
      b.insert("w" + std::to_string(tok(rng)));
    }
    std::vector<std::string> av(a.begin(), a.end());
    std::vector<std::string> bv(b.begin(), b.end());
    std::shuffle(av.begin(), av.end(), rng);
    std::shuffle(bv.begin(), bv.end(), rng);
    auto ab = identical_subword_dictionary(Vocabulary(av), Vocabulary(bv));
    auto ba = identical_subword_dictionary(Vocabulary(bv), Vocabulary(av));
    std::set<std::pair<std::string, std::string>> lhs;
    std::set<std::pair<std::string, std::string>> rhs;
    for (const auto& p : ab.pairs()) lhs.insert({p.source, p.target});
    for (const auto& p : ba.pairs()) rhs.insert({p.target, p.source});
    EXPECT_EQ(lhs, rhs);
  }
}

TEST(SplitDictionaryTest, SevenThreeSplitIsStable) {
  auto d = numbered(10);
  auto a = split_dictionary(d, 0.3, 1234);
  auto b = split_dictionary(d, 0.3, 1234);
  EXPECT_EQ(sources_of(a.train).size(), 7u);
  EXPECT_EQ(sources_of(a.eval).size(), 3u);
  EXPECT_EQ(a.train.pairs(), b.train.pairs());
  EXPECT_EQ(a.eval.pairs(), b.eval.pairs());
}

TEST(SplitDictionaryTest, MultiTargetSourceStaysTogether) {
  auto d = numbered(6, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = split_dictionary(d, 0.5, seed);
    for (const auto& src : sources_of(s.train)) EXPECT_FALSE(sources_of(s.eval).contains(src));
    for (const auto& [src, tgts] : s.train.targets_by_source()) EXPECT_EQ(tgts.size(), 2u);
    for (const auto& [src, tgts] : s.eval.targets_by_source()) EXPECT_EQ(tgts.size(), 2u);
  }
}

TEST(SplitDictionaryTest, LargeFractionKeepsTrainNonEmpty) {
  auto s = split_dictionary(numbered(2), 0.999, 7);
  EXPECT_EQ(s.eval.size(), 1u);
  EXPECT_EQ(s.train.size(), 1u);
  auto tiny = split_dictionary(numbered(10), 0.001, 7);
  EXPECT_EQ(sources_of(tiny.eval).size(), 1u);
}

TEST(SplitDictionaryTest, RejectsTooFewPairsAndBadFraction) {
  try {
    split_dictionary(numbered(1), 0.5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPairs);
  }
  EXPECT_THROW(split_dictionary(numbered(1, 3), 0.5, 0), Error);
  EXPECT_THROW(split_dictionary(numbered(4), 0.0, 0), Error);
  EXPECT_THROW(split_dictionary(numbered(4), 1.0, 0), Error);
}

TEST(SplitDictionaryTest, PartitionsEveryPairExactlyOnce) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n(2, 40);
  std::uniform_int_distribution<int> k(1, 3);
  std::uniform_real_distribution<double> f(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = numbered(n(rng), k(rng));
    auto s = split_dictionary(d, f(rng), rng());
    std::multiset<DictionaryPair> joined(s.train.pairs().begin(), s.train.pairs().end());
    joined.insert(s.eval.pairs().begin(), s.eval.pairs().end());
    std::multiset<DictionaryPair> all(d.pairs().begin(), d.pairs().end());
    EXPECT_EQ(joined, all);
    EXPECT_FALSE(s.train.empty());
    EXPECT_FALSE(s.eval.empty());
  }
}

}  // namespace
}  // namespace vocab_bridge
