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

// Deterministic synthetic inputs for exercising the full pipeline without
// real corpora or pretrained embeddings: a toy language corpus, and planted
// embedding spaces whose language -> English -> model maps are known.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "vocab_bridge/vocab_bridge.hpp"

namespace vocab_bridge::synth {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(d, d, rng));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (diag(j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

/// d1 x d2 matrix with orthonormal rows (d1 <= d2) or columns (d1 >= d2).
inline Eigen::MatrixXd random_semi_orthogonal(Eigen::Index d1, Eigen::Index d2,
                                              std::mt19937_64& rng) {
  const Eigen::Index d = std::max(d1, d2);
  return random_orthogonal(d, rng).topLeftCorner(d1, d2);
}

inline const std::vector<std::string>& syllables() {
  static const std::vector<std::string> s = {
      "ka", "ro", "mi", "te", "su", "la", "po", "ne", "di", "vu",
      "é",  "ça", "ñe", "or", "er", "ch", "an", "is", "ul", "bo"};
  return s;
}

/// Writes `lines` lines of words built from a fixed syllable inventory with
/// Zipf-like word frequencies.
inline void write_corpus(const std::filesystem::path& path, std::uint64_t seed,
                         std::size_t lines = 400, std::size_t word_types = 300) {
  std::mt19937_64 rng(seed);
  const auto& syl = syllables();
  std::uniform_int_distribution<std::size_t> pick_syl(0, syl.size() - 1);
  std::uniform_int_distribution<int> pick_len(1, 4);
  std::vector<std::string> words;
  while (words.size() < word_types) {
    std::string w;
    const int len = pick_len(rng);
    for (int i = 0; i < len; ++i) w += syl[pick_syl(rng)];
    words.push_back(std::move(w));
  }
  std::vector<double> weights(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<std::size_t> pick_word(weights.begin(), weights.end());
  std::uniform_int_distribution<int> line_len(5, 15);
  auto out = text::open_output(path);
  for (std::size_t l = 0; l < lines; ++l) {
    const int n = line_len(rng);
    for (int i = 0; i < n; ++i) out << (i ? " " : "") << words[pick_word(rng)];
    out << '\n';
  }
  text::finish_output(out, path);
}

struct PlantedSpaces {
  EmbeddingMatrix lang;
  EmbeddingMatrix english;
  EmbeddingMatrix model;
  BilingualDictionary dictionary;
  Eigen::MatrixXd to_english;  // planted language -> English map
  Eigen::MatrixXd to_model;    // planted English -> model map
};

inline bool is_ascii(const std::string& s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

/// Builds planted spaces over `lang_tokens`: English rows are random latent
/// vectors, language rows are latent·Qᵀ, model rows are latent·P for the
/// ASCII tokens at even positions plus a few special tokens.
inline PlantedSpaces planted_spaces(const std::vector<std::string>& lang_tokens,
                                    std::uint64_t seed, Eigen::Index lang_dim = 16,
                                    Eigen::Index model_dim = 32) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(lang_tokens.size());
  const Eigen::MatrixXd latent = gaussian(n, lang_dim, rng);
  const Eigen::MatrixXd q = random_orthogonal(lang_dim, rng);
  const Eigen::MatrixXd p = random_semi_orthogonal(lang_dim, model_dim, rng);

  RowMatrix lang_rows = latent * q.transpose();
  RowMatrix en_rows = latent;

  const std::vector<std::string> specials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  std::vector<std::string> model_tokens = specials;
  std::vector<Eigen::Index> shared;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = lang_tokens[static_cast<std::size_t>(i)];
    if (i % 2 == 0 && is_ascii(t)) {
      model_tokens.push_back(t);
      shared.push_back(i);
    }
  }
  RowMatrix model_rows(static_cast<Eigen::Index>(model_tokens.size()), model_dim);
  model_rows.topRows(static_cast<Eigen::Index>(specials.size())) =
      gaussian(static_cast<Eigen::Index>(specials.size()), model_dim, rng);
  for (std::size_t k = 0; k < shared.size(); ++k) {
    model_rows.row(static_cast<Eigen::Index>(specials.size() + k)) = latent.row(shared[k]) * p;
  }

  BilingualDictionary dict;
  for (const auto& t : lang_tokens) dict.add(t, t);

  return PlantedSpaces{EmbeddingMatrix(Vocabulary(lang_tokens), std::move(lang_rows)),
                       EmbeddingMatrix(Vocabulary(lang_tokens), std::move(en_rows)),
                       EmbeddingMatrix(Vocabulary(model_tokens), std::move(model_rows)),
                       std::move(dict), q, p};
}

/// Writes lang.vec, en.vec, bert.vec, bert_vocab.txt and dict.tsv to `dir`.
inline void write_planted_spaces(const PlantedSpaces& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_embeddings(s.lang, dir / "lang.vec");
  save_embeddings(s.english, dir / "en.vec");
  save_embeddings(s.model, dir / "bert.vec");
  save_vocabulary(s.model.vocab(), dir / "bert_vocab.txt");
  save_dictionary(s.dictionary, dir / "dict.tsv");
}

}  // namespace vocab_bridge::synth
