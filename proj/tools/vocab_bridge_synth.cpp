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

// Generates the synthetic pipeline fixtures used by tools/run_pipeline.sh.
//
//   vocab-bridge-synth corpus --out corpus.txt [--seed N]
//   vocab-bridge-synth spaces --lang-vocab vocab.txt --out-dir DIR [--seed N]

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "synthetic_fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic fixtures for the vocab-bridge pipeline"};
  app.require_subcommand(1);
  std::uint64_t seed = 7;
  std::string out, lang_vocab, out_dir;

  auto* corpus = app.add_subcommand("corpus", "Write a toy language corpus");
  corpus->add_option("--out", out)->required();
  corpus->add_option("--seed", seed)->capture_default_str();

  auto* spaces = app.add_subcommand("spaces", "Write planted embedding spaces for a vocabulary");
  spaces->add_option("--lang-vocab", lang_vocab)->required();
  spaces->add_option("--out-dir", out_dir)->required();
  spaces->add_option("--seed", seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*corpus) {
      vocab_bridge::synth::write_corpus(out, seed);
    } else {
      const auto vocab = vocab_bridge::load_vocabulary(lang_vocab);
      vocab_bridge::synth::write_planted_spaces(
          vocab_bridge::synth::planted_spaces(vocab.tokens(), seed), out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
