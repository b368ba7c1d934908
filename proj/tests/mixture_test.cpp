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

#include "vocab_bridge/mixture.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthetic_fixtures.hpp"

namespace vocab_bridge {
namespace {

using oracle::Rows;

std::vector<std::string> names(std::size_t n, const std::string& stem) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

RowMatrix to_matrix(const Rows& r) {
  RowMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r[0].size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[i][j];
  return m;
}

EmbeddingMatrix embed(const std::vector<std::string>& toks, RowMatrix m) {
  return EmbeddingMatrix(Vocabulary(toks), std::move(m));
}

std::vector<Candidate> scored(const std::vector<double>& s) {
  std::vector<Candidate> c;
  for (std::size_t i = 0; i < s.size(); ++i) c.push_back({"c" + std::to_string(i), i, s[i]});
  return c;
}

TEST(AnchorPoolTest, IntersectionInEnglishOrder) {
  Vocabulary en({"the", "er", "or", "ch", "zz"});
  Vocabulary bert({"[CLS]", "ch", "er", "or", "xx"});
  EXPECT_EQ(anchor_pool(en, bert), (std::vector<std::string>{"er", "or", "ch"}));
  EXPECT_TRUE(anchor_pool(en, Vocabulary({"q"})).empty());
}

TEST(CandidateSetTest, SmallPoolReturnsEverything) {
  std::mt19937_64 rng(1);
  auto lang = embed(names(6, "l"), RowMatrix(synth::gaussian(6, 4, rng)));
  auto en = embed(names(8, "e"), RowMatrix(synth::gaussian(8, 4, rng)));
  const std::vector<std::string> pool = {"e1", "e4", "e6"};
  auto c = candidate_set("l2", lang, en, pool, AlignConfig{});
  ASSERT_EQ(c.size(), 3u);
  std::set<std::string> got;
  for (const auto& x : c) got.insert(x.token);
  EXPECT_EQ(got, (std::set<std::string>{"e1", "e4", "e6"}));
}

TEST(CandidateSetTest, ExactAnchorRanksFirst) {
  RowMatrix en = RowMatrix::Identity(5, 5);
  RowMatrix lang(1, 5);
  lang << 0, 0, 1, 0, 0;
  const auto pool = names(5, "e");
  auto c = candidate_set("w", embed({"w"}, lang), embed(pool, en), pool, AlignConfig{});
  EXPECT_EQ(c.front().token, "e2");
}

TEST(CandidateSetTest, Errors) {
  std::mt19937_64 rng(2);
  auto lang = embed(names(3, "l"), RowMatrix(synth::gaussian(3, 4, rng)));
  auto en = embed(names(3, "e"), RowMatrix(synth::gaussian(3, 4, rng)));
  const std::vector<std::string> none;
  try {
    candidate_set("l0", lang, en, none, AlignConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyAnchorPool);
  }
  const std::vector<std::string> pool = {"e0"};
  try {
    candidate_set("nope", lang, en, pool, AlignConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTokenNotFound);
    EXPECT_EQ(e.token(), "nope");
  }
}

// All-pairs cosines -> r-terms -> CSLS -> top-m -> softmax, on plain vectors.
struct OracleAssignment {
  std::vector<std::size_t> pool_ids;
  std::vector<double> weights;
};

OracleAssignment oracle_assignment(const Rows& mapped, const Rows& pool_rows, std::size_t i,
                                   std::size_t k, std::size_t m) {
  const Rows table = oracle::csls_table(mapped, pool_rows, k);
  OracleAssignment out;
  out.pool_ids = oracle::top_indices(table[i], m);
  std::vector<double> s;
  for (auto j : out.pool_ids) s.push_back(table[i][j]);
  out.weights = oracle::softmax(s);
  return out;
}

TEST(CandidateSetTest, MatchesOracleTopFive) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Rows lang = oracle::random_rows(40, 6, rng);
    Rows pool_rows = oracle::random_rows(50, 6, rng);
    const auto pool = names(50, "e");
    auto lang_m = embed(names(40, "l"), to_matrix(lang));
    auto en = embed(pool, to_matrix(pool_rows));
    MixtureIndex index(lang_m, en, pool, AlignConfig{});
    const auto toks = names(40, "l");
    const auto all = index.candidates(toks);
    const Rows table = oracle::csls_table(lang, pool_rows, 10);
    for (std::size_t i = 0; i < 40; ++i) {
      const auto top = oracle::top_indices(table[i], 5);
      ASSERT_EQ(all[i].size(), 5u);
      for (std::size_t r = 0; r < 5; ++r) {
        EXPECT_EQ(all[i][r].anchor_id, top[r]);
        EXPECT_NEAR(all[i][r].csls, table[i][top[r]], 1e-12);
      }
    }
  }
}

TEST(CandidateSetTest, NeighborhoodClampedToSmallSets) {
  std::mt19937_64 rng(4);
  auto lang = embed(names(2, "l"), RowMatrix(synth::gaussian(2, 3, rng)));
  auto en = embed(names(4, "e"), RowMatrix(synth::gaussian(4, 3, rng)));
  const auto pool = names(4, "e");
  MixtureIndex index(lang, en, pool, AlignConfig{});
  EXPECT_EQ(index.effective_k(), 2u);
  EXPECT_EQ(index.pool_size(), 4u);
}

TEST(MixtureWeightsTest, SingleCandidate) {
  auto w = mixture_weights(scored({-3.5}));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].weight, 1.0);
}

TEST(MixtureWeightsTest, EqualScoresAreUniformAndOrderedById) {
  auto c = scored({0.3, 0.3, 0.3, 0.3, 0.3});
  std::swap(c[0], c[3]);
  auto w = mixture_weights(c);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(w[i].weight, 0.2, 1e-9);
    EXPECT_EQ(w[i].anchor_id, i);
  }
}

TEST(MixtureWeightsTest, LogScoresGiveSevenTwoOne) {
  auto w = mixture_weights(scored({std::log(2.0), std::log(7.0), std::log(1.0)}));
  EXPECT_EQ(w[0].token, "c1");
  EXPECT_NEAR(w[0].weight, 0.7, 1e-9);
  EXPECT_NEAR(w[1].weight, 0.2, 1e-9);
  EXPECT_NEAR(w[2].weight, 0.1, 1e-9);
}

TEST(MixtureWeightsTest, ShiftInvariantAndStable) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(5);
    for (auto& v : s) v = g(rng);
    const double shift = 100.0 * g(rng);
    std::vector<double> t = s;
    for (auto& v : t) v += shift;
    auto a = mixture_weights(scored(s));
    auto b = mixture_weights(scored(t));
    const auto want = oracle::softmax(s);
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(a[i].weight, b[i].weight, 1e-12);
      EXPECT_NEAR(a[i].weight, want[a[i].anchor_id], 1e-12);
      EXPECT_GT(a[i].weight, 0.0);
      if (i) EXPECT_GE(a[i - 1].weight, a[i].weight);
      sum += a[i].weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  auto big = mixture_weights(scored({1000.0, 999.0}));
  EXPECT_TRUE(std::isfinite(big[0].weight));
}

TEST(MixtureWeightsTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(mixture_weights(std::vector<Candidate>{}), Error);
  EXPECT_THROW(mixture_weights(scored({1.0, std::nan("")})), Error);
}

TEST(MixtureEmbeddingTest, SingleAnchorAndMidpoint) {
  RowMatrix rows(2, 2);
  rows << 1, 0, 0, 1;
  auto model = embed({"e1", "e2"}, rows);
  const std::vector<WeightedAnchor> one = {{"e2", 0, 1.0}};
  EXPECT_EQ(mixture_embedding(one, model), model.row(1).transpose());
  const std::vector<WeightedAnchor> half = {{"e1", 0, 0.5}, {"e2", 1, 0.5}};
  Vector mid = mixture_embedding(half, model);
  EXPECT_EQ(mid(0), 0.5);
  EXPECT_EQ(mid(1), 0.5);
}

TEST(MixtureEmbeddingTest, FigureOneCombination) {
  std::mt19937_64 rng(6);
  auto model = embed({"er", "or", "ch"}, RowMatrix(synth::gaussian(3, 8, rng)));
  auto w = mixture_weights(std::vector<Candidate>{
      {"or", 1, std::log(2.0)}, {"er", 0, std::log(7.0)}, {"ch", 2, 0.0}});
  EXPECT_EQ(format_anchor_list(w), "er:0.700000,or:0.200000,ch:0.100000");
  Vector got = mixture_embedding(w, model);
  Vector want = 0.7 * model.row(0).transpose() + 0.2 * model.row(1).transpose() +
                0.1 * model.row(2).transpose();
  EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MixtureEmbeddingTest, MissingAnchor) {
  auto model = embed({"a"}, RowMatrix::Ones(1, 2));
  const std::vector<WeightedAnchor> w = {{"b", 0, 1.0}};
  try {
    mixture_embedding(w, model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingAnchor);
    EXPECT_EQ(e.token(), "b");
  }
}

struct Chain {
  EmbeddingMatrix lang;
  EmbeddingMatrix english;
  EmbeddingMatrix model;
  LinearMap to_english;
};

// English rows are random, language rows are English·Qᵀ, model rows are the
// English rows of every other token plus a few extra model-only tokens.
Chain planted_chain(std::size_t n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RowMatrix en = synth::gaussian(static_cast<Eigen::Index>(n), d, rng);
  Eigen::MatrixXd q = synth::random_orthogonal(d, rng);
  std::vector<std::string> model_toks = {"[CLS]", "[SEP]"};
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < n; i += 2) {
    model_toks.push_back("w" + std::to_string(i));
    rows.push_back(static_cast<Eigen::Index>(i));
  }
  RowMatrix model(static_cast<Eigen::Index>(model_toks.size()), d);
  model.topRows(2) = synth::gaussian(2, d, rng);
  for (std::size_t k = 0; k < rows.size(); ++k) model.row(static_cast<Eigen::Index>(k + 2)) = en.row(rows[k]);
  return Chain{embed(names(n, "w"), en * q.transpose()), embed(names(n, "w"), en),
               embed(model_toks, model), LinearMap(q)};
}

TEST(BuildAssignmentsTest, EmptyInputGivesEmptyOutput) {
  auto c = planted_chain(20, 6, 7);
  EXPECT_TRUE(build_all_assignments({}, c.lang, c.to_english, c.english, c.model, AlignConfig{})
                  .empty());
}

TEST(BuildAssignmentsTest, PlantedTokensPickTheirOwnTranslation) {
  auto c = planted_chain(120, 32, 8);
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < 120; i += 2) toks.push_back("w" + std::to_string(i));
  auto out = build_all_assignments(toks, c.lang, c.to_english, c.english, c.model, AlignConfig{});
  ASSERT_EQ(out.size(), toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    EXPECT_EQ(out[i].source_token, toks[i]);
    ASSERT_EQ(out[i].anchors.size(), 5u);
    EXPECT_EQ(out[i].anchors.front().token, toks[i]);
    EXPECT_GT(out[i].anchors[0].weight, out[i].anchors[1].weight);
  }
}

TEST(BuildAssignmentsTest, WellSeparatedInstanceConcentratesWeight) {
  // One anchor coincides with the token; the other four sit at its antipode
  // next to their own source tokens.
  RowMatrix en(5, 3);
  en << 1, 0, 0, -1, 0, 0, -1, 0, 0, -1, 0, 0, -1, 0, 0;
  auto english = embed(names(5, "w"), en);
  auto model = embed(names(5, "w"), en);
  const std::vector<std::string> tok = {"w0"};
  auto out = build_all_assignments(tok, english, LinearMap::identity(3), english, model,
                                   AlignConfig{});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].anchors[0].token, "w0");
  EXPECT_GT(out[0].anchors[0].weight, 0.9);
}

TEST(BuildAssignmentsTest, MatchesEndToEndOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t n_lang = 60;
    const std::size_t n_en = 90;
    Rows lang = oracle::random_rows(n_lang, 5, rng);
    Rows en = oracle::random_rows(n_en, 5, rng);
    Rows model = oracle::random_rows(n_en, 7, rng);
    auto en_toks = names(n_en, "e");
    // Model vocabulary: every third English token, reversed, plus extras.
    std::vector<std::string> model_toks;
    Rows model_rows;
    for (std::size_t j = n_en; j-- > 0;) {
      if (j % 3 == 0) {
        model_toks.push_back(en_toks[j]);
        model_rows.push_back(model[j]);
      }
    }
    model_toks.push_back("[X]");
    model_rows.push_back(model[1]);
    Eigen::MatrixXd b = synth::random_orthogonal(5, rng);

    Rows mapped(n_lang, std::vector<double>(5, 0.0));
    for (std::size_t i = 0; i < n_lang; ++i)
      for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t l = 0; l < 5; ++l)
          mapped[i][c] += lang[i][l] * b(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c));
    Rows pool_rows;
    std::vector<std::size_t> pool_en;
    for (std::size_t j = 0; j < n_en; ++j) {
      if (j % 3 == 0) {
        pool_rows.push_back(en[j]);
        pool_en.push_back(j);
      }
    }

    auto toks = names(n_lang, "l");
    auto out = build_all_assignments(toks, embed(toks, to_matrix(lang)), LinearMap(b),
                                     embed(en_toks, to_matrix(en)),
                                     embed(model_toks, to_matrix(model_rows)), AlignConfig{});
    for (std::size_t i = 0; i < n_lang; ++i) {
      auto want = oracle_assignment(mapped, pool_rows, i, 10, 5);
      ASSERT_EQ(out[i].anchors.size(), 5u);
      std::vector<double> mixed(7, 0.0);
      for (std::size_t r = 0; r < 5; ++r) {
        EXPECT_EQ(out[i].anchors[r].token, en_toks[pool_en[want.pool_ids[r]]]);
        EXPECT_NEAR(out[i].anchors[r].weight, want.weights[r], 1e-9);
        for (std::size_t c = 0; c < 7; ++c) mixed[c] += want.weights[r] * model[pool_en[want.pool_ids[r]]][c];
      }
      for (std::size_t c = 0; c < 7; ++c)
        EXPECT_NEAR(out[i].mixed_vector(static_cast<Eigen::Index>(c)), mixed[c], 1e-9);
    }
  }
}

TEST(BuildAssignmentsTest, AnchorsComeFromPoolAndMixIsConvex) {
  auto c = planted_chain(80, 8, 10);
  const auto pool = anchor_pool(c.english.vocab(), c.model.vocab());
  const std::set<std::string> pool_set(pool.begin(), pool.end());
  auto toks = names(80, "w");
  auto out = build_all_assignments(toks, c.lang, c.to_english, c.english, c.model, AlignConfig{});
  for (const auto& a : out) {
    double max_norm = 0.0;
    double sum = 0.0;
    for (const auto& w : a.anchors) {
      EXPECT_TRUE(pool_set.contains(w.token));
      EXPECT_TRUE(c.english.vocab().contains(w.token));
      EXPECT_TRUE(c.model.vocab().contains(w.token));
      max_norm = std::max(max_norm, c.model.row(w.token).norm());
      sum += w.weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_LE(a.mixed_vector.norm(), max_norm + 1e-12);
  }
}

TEST(AnchorListTest, FormatAndParseRoundTrip) {
  const std::vector<WeightedAnchor> w = {{"er", 0, 0.7}, {"or", 1, 0.2}, {"ch", 2, 0.1}};
  const auto s = format_anchor_list(w);
  EXPECT_EQ(s, "er:0.700000,or:0.200000,ch:0.100000");
  auto back = parse_anchor_list(s);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[2].token, "ch");
  EXPECT_DOUBLE_EQ(back[0].weight, 0.7);
  auto loose = parse_anchor_list("er:0.7,or:1");
  ASSERT_EQ(loose.size(), 2u);
  EXPECT_EQ(loose[1].token, "or");
  EXPECT_DOUBLE_EQ(loose[1].weight, 1.0);
}

TEST(AnchorListTest, TokensWithSeparatorCharacters) {
  const std::vector<WeightedAnchor> w = {{"a:b", 0, 0.5}, {",", 1, 0.25}, {"x:1,y", 2, 0.25}};
  auto back = parse_anchor_list(format_anchor_list(w));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].token, "a:b");
  EXPECT_EQ(back[1].token, ",");
  EXPECT_EQ(back[2].token, "x:1,y");
  EXPECT_THROW(parse_anchor_list("er"), Error);
  EXPECT_THROW(parse_anchor_list("er:abc"), Error);
}

TEST(AssignmentFileTest, RoundTripRenormalizes) {
  std::vector<MixtureAssignment> a(2);
  a[0].source_token = "ça";
  a[0].anchors = {{"that", 0, 2.0 / 3.0}, {"it", 1, 1.0 / 3.0}};
  a[1].source_token = "##er";
  a[1].anchors = {{"##er", 0, 1.0}};
  std::stringstream buf;
  write_assignments(a, buf);
  EXPECT_EQ(buf.str(), "ça\tthat:0.666667,it:0.333333\n##er\t##er:1.000000\n");
  auto back = read_assignments(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].source_token, "ça");
  EXPECT_NEAR(back[0].anchors[0].weight + back[0].anchors[1].weight, 1.0, 1e-15);
  std::istringstream bad("noTab\n");
  EXPECT_THROW(read_assignments(bad), Error);
}

}  // namespace
}  // namespace vocab_bridge
