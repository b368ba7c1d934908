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

// Command-line front end. Each subcommand wraps one library operation and
// reads/writes the plain-text formats defined by the library headers.
//
// Exit status: 0 success, 1 usage error, 2 data or validation error.
// Diagnostics go to the error stream; data goes to files or the output
// stream. VOCAB_BRIDGE_LOG=error|warn|info|debug sets the diagnostic level.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "vocab_bridge/vocab_bridge.hpp"

namespace vocab_bridge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline spdlog::level::level_enum log_level_from_env() {
  const char* v = std::getenv("VOCAB_BRIDGE_LOG");
  if (!v) return spdlog::level::info;
  const std::string s(v);
  if (s == "error") return spdlog::level::err;
  if (s == "warn") return spdlog::level::warn;
  if (s == "debug") return spdlog::level::debug;
  return spdlog::level::info;
}

namespace detail {

struct Context {
  std::ostream& out;
  std::shared_ptr<spdlog::logger> log;
};

/// Writes through `fn` to `path`, or to the output stream for "" or "-".
inline void with_output(Context& ctx, const std::string& path,
                        const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(ctx.out);
    return;
  }
  auto f = text::open_output(path);
  fn(f);
  text::finish_output(f, path);
}

inline EmbeddingMatrix load_embeddings_logged(Context& ctx, const std::string& path) {
  LoadReport report;
  auto m = load_embeddings(path, &report);
  ctx.log->info("loaded {} ({} x {})", path, m.size(), m.dim());
  if (report.duplicate_count > 0) {
    ctx.log->warn("{}: {} duplicate token(s) ignored, first occurrence kept", path,
                  report.duplicate_count);
  }
  return m;
}

/// The model embedding, checked against a vocabulary file when one is given.
inline EmbeddingMatrix load_model(Context& ctx, const std::string& emb_path,
                                  const std::string& vocab_path) {
  auto m = load_embeddings_logged(ctx, emb_path);
  if (!vocab_path.empty()) {
    const auto v = load_vocabulary(vocab_path);
    if (v.tokens() != m.vocab().tokens()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "model vocabulary " + vocab_path +
                      " does not list the embedding tokens in the same order");
    }
  }
  return m;
}

inline LinearMap load_chain(const std::vector<std::string>& paths) {
  LinearMap m = load_map(paths.at(0));
  for (std::size_t i = 1; i < paths.size(); ++i) m = compose(m, load_map(paths[i]));
  return m;
}

inline std::vector<std::string> read_token_list(const std::string& path) {
  auto in = text::open_input(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto fields = text::split_whitespace(line);
    if (!fields.empty()) out.emplace_back(fields[0]);
  }
  return out;
}

inline std::vector<NewSubword> as_new_subwords(const std::vector<std::string>& tokens) {
  std::vector<NewSubword> out;
  for (const auto& t : tokens) out.push_back({t, t});
  return out;
}

inline nlohmann::ordered_json report_json(const OovReport& r) {
  std::string top;
  for (const auto& [w, c] : r.top_oov_tokens) {
    if (!top.empty()) top += ' ';
    top += w + ":" + std::to_string(c);
  }
  nlohmann::ordered_json j;
  j["total_words"] = r.total_words;
  j["word_oov"] = r.word_oov;
  j["subword_oov"] = r.subword_oov;
  j["word_oov_rate"] = r.word_oov_rate;
  j["subword_oov_rate"] = r.subword_oov_rate;
  j["level"] = r.type_level ? "type" : "token";
  j["top_oov_tokens"] = top;
  return j;
}

constexpr const char* kEmbeddingFormat =
    "Embedding files: word2vec text format, header '<count> <dim>', then one "
    "'<token> <v1> ... <vdim>' row per line.";
constexpr const char* kMapFormat =
    "Map files: header '<d1> <d2>', then d1 rows of d2 values.";
constexpr const char* kDictFormat =
    "Dictionary files: one 'source<TAB>target' (or 'source target') pair per line.";
constexpr const char* kVocabFormat = "Vocabulary files: one token per line; line order is the id.";

}  // namespace detail

/// Runs one command line. `args` excludes the program name.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out,
                    std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("vocab-bridge", sink);
  log->set_pattern("[%l] %v");
  log->set_level(log_level_from_env());
  detail::Context ctx{out, log};

  CLI::App app{"Expand the subword vocabulary of a pretrained multilingual model "
               "by aligning per-language subword embeddings to its embedding space."};
  app.name("vocab-bridge");
  app.require_subcommand(1);
  std::function<void()> action;
  auto on = [&](CLI::App* sub, std::function<void()> fn) {
    sub->callback([&action, fn = std::move(fn)] { action = fn; });
  };

  // bpe-train
  struct {
    std::string corpus, out, vocab_out, counts_out;
    std::size_t vocab_size = kDefaultBpeVocabSize;
  } bt;
  auto* bpe_train_cmd = app.add_subcommand("bpe-train", "Learn BPE merges from a corpus");
  bpe_train_cmd->add_option("--corpus", bt.corpus, "Whitespace-tokenized UTF-8 corpus")->required();
  bpe_train_cmd->add_option("--vocab-size", bt.vocab_size, "Target symbol count")->capture_default_str();
  bpe_train_cmd->add_option("--out", bt.out, "Merges file to write")->required();
  bpe_train_cmd->add_option("--vocab-out", bt.vocab_out,
                            "Also write the induced subword vocabulary (WordPiece convention)");
  bpe_train_cmd->add_option("--counts-out", bt.counts_out,
                            "Also write 'token count' lines for the induced vocabulary");
  bpe_train_cmd->footer(
      "Merges file: header '#version: vocab-bridge-1', then one 'left right' merge per "
      "line in learning order. The end-of-word marker '</w>' is fused to final symbols.");
  on(bpe_train_cmd, [&] {
    auto in = text::open_input(bt.corpus);
    const auto counts = count_words(in);
    const auto model = bpe_train(counts, bt.vocab_size);
    save_merges(model, bt.out);
    ctx.log->info("learned {} merges from {} distinct words", model.merges().size(),
                  counts.size());
    if (!bt.vocab_out.empty() || !bt.counts_out.empty()) {
      const auto tokens = bpe_token_counts(model, counts);
      if (!bt.vocab_out.empty()) {
        std::vector<std::string> v;
        for (const auto& [t, c] : tokens) v.push_back(t);
        save_vocabulary(Vocabulary(std::move(v)), bt.vocab_out);
      }
      if (!bt.counts_out.empty()) {
        auto f = text::open_output(bt.counts_out);
        for (const auto& [t, c] : tokens) f << t << ' ' << c << '\n';
        text::finish_output(f, bt.counts_out);
      }
    }
  });

  // bpe-apply
  struct {
    std::string merges, input, output, format = "wordpiece", prefix = "##";
  } ba;
  auto* bpe_apply_cmd = app.add_subcommand("bpe-apply", "Segment a corpus with BPE merges");
  bpe_apply_cmd->add_option("--merges", ba.merges, "Merges file")->required();
  bpe_apply_cmd->add_option("--input", ba.input, "Corpus to segment")->required();
  bpe_apply_cmd->add_option("--output", ba.output, "Output file (default: standard output)");
  bpe_apply_cmd->add_option("--format", ba.format, "wordpiece: prefix non-initial pieces; plain: bare pieces")
      ->check(CLI::IsMember({"wordpiece", "plain"}))
      ->capture_default_str();
  bpe_apply_cmd->add_option("--prefix", ba.prefix, "Continuation prefix")->capture_default_str();
  bpe_apply_cmd->footer("Output keeps the input line structure; pieces are space separated.");
  on(bpe_apply_cmd, [&] {
    const auto model = load_merges(ba.merges);
    auto in = text::open_input(ba.input);
    std::unordered_map<std::string, std::string> cache;
    detail::with_output(ctx, ba.output, [&](std::ostream& os) {
      std::string line;
      while (std::getline(in, line)) {
        bool first = true;
        for (auto w : text::split_whitespace(line)) {
          auto [it, inserted] = cache.try_emplace(std::string(w));
          if (inserted) {
            auto pieces = bpe_apply(model, w);
            if (ba.format == "wordpiece") pieces = to_wordpiece(std::move(pieces), ba.prefix);
            for (std::size_t i = 0; i < pieces.size(); ++i) {
              if (i) it->second += ' ';
              it->second += pieces[i];
            }
          }
          if (!first) os << ' ';
          os << it->second;
          first = false;
        }
        os << '\n';
      }
    });
  });

  // wordpiece
  struct {
    std::string vocab, input, output, unk = std::string(kDefaultUnkToken);
    std::size_t max_chars = kDefaultMaxChars;
    bool statuses = false;
  } wp;
  auto* wordpiece_cmd = app.add_subcommand("wordpiece", "Greedy longest-match segmentation against a model vocabulary");
  wordpiece_cmd->add_option("--vocab", wp.vocab, "Model vocabulary file")->required();
  wordpiece_cmd->add_option("--input", wp.input, "Whitespace-tokenized corpus")->required();
  wordpiece_cmd->add_option("--output", wp.output, "Output file (default: standard output)");
  wordpiece_cmd->add_option("--unk", wp.unk, "Unknown token")->capture_default_str();
  wordpiece_cmd->add_option("--max-chars", wp.max_chars, "Longer words become the unknown token")->capture_default_str();
  wordpiece_cmd->add_flag("--statuses", wp.statuses,
                          "Emit 'word<TAB>status<TAB>pieces' per word instead of segmented text");
  wordpiece_cmd->footer(std::string(detail::kVocabFormat) +
                        " Statuses: IN_VOCAB, WORD_OOV_SUBWORD_OK, SUBWORD_OOV.");
  on(wordpiece_cmd, [&] {
    const auto vocab = load_vocabulary(wp.vocab);
    auto in = text::open_input(wp.input);
    detail::with_output(ctx, wp.output, [&](std::ostream& os) {
      std::string line;
      while (std::getline(in, line)) {
        std::istringstream ls(line);
        bool first = true;
        for_each_segmentation(vocab, wp.unk, ls, [&](const Segmentation& s) {
          if (wp.statuses) {
            os << s.word << '\t' << to_string(s.status) << '\t';
            for (std::size_t i = 0; i < s.pieces.size(); ++i) os << (i ? " " : "") << s.pieces[i];
            os << '\n';
            return;
          }
          for (const auto& p : s.pieces) {
            if (!first) os << ' ';
            os << p;
            first = false;
          }
        }, wp.max_chars);
        if (!wp.statuses) os << '\n';
      }
    });
  });

  // align-fit-independent
  struct {
    std::string src_emb, bert_emb, bert_vocab, out;
  } ai;
  auto* fit_ind_cmd = app.add_subcommand(
      "align-fit-independent", "Fit an orthogonal map from a language space straight to the model space");
  fit_ind_cmd->add_option("--src-emb", ai.src_emb, "Language subword embeddings")->required();
  fit_ind_cmd->add_option("--bert-emb", ai.bert_emb, "Model embedding table")->required();
  fit_ind_cmd->add_option("--bert-vocab", ai.bert_vocab, "Model vocabulary (checked against --bert-emb)");
  fit_ind_cmd->add_option("--out", ai.out, "Map file to write")->required();
  fit_ind_cmd->footer(std::string(detail::kEmbeddingFormat) + " " + detail::kMapFormat +
                      " Training pairs are the tokens both vocabularies share.");
  on(fit_ind_cmd, [&] {
    const auto src = detail::load_embeddings_logged(ctx, ai.src_emb);
    const auto bert = detail::load_model(ctx, ai.bert_emb, ai.bert_vocab);
    const auto fit = fit_independent_mapping(src, bert);
    if (fit.low_rank) {
      ctx.log->warn("only {} training pairs for a {}-dimensional source space; map is under-determined",
                    fit.pair_count, fit.map.src_dim());
    }
    save_map(fit.map, ai.out);
    ctx.out << "pairs\t" << fit.pair_count << "\nmean_residual\t"
            << text::format_significant(fit.mean_residual) << '\n';
  });

  // align-fit-joint
  struct {
    std::string src_emb, en_emb, bert_emb, bert_vocab, dict, out_b, out_a, eval_dict_out;
    std::size_t max_pairs = 0;
    double holdout = 0.0;
    std::uint64_t seed = 0;
  } aj;
  auto* fit_joint_cmd = app.add_subcommand(
      "align-fit-joint", "Fit language->English and English-space->model orthogonal maps");
  fit_joint_cmd->add_option("--src-emb", aj.src_emb, "Language subword embeddings")->required();
  fit_joint_cmd->add_option("--en-emb", aj.en_emb, "English subword embeddings")->required();
  fit_joint_cmd->add_option("--bert-emb", aj.bert_emb, "Model embedding table")->required();
  fit_joint_cmd->add_option("--bert-vocab", aj.bert_vocab, "Model vocabulary (checked against --bert-emb)");
  fit_joint_cmd->add_option("--dict", aj.dict,
                            "Seed dictionary (default: identical subwords of the two spaces)");
  fit_joint_cmd->add_option("--max-pairs", aj.max_pairs, "Read at most this many dictionary pairs (0: all)");
  fit_joint_cmd->add_option("--holdout", aj.holdout,
                            "Hold out this fraction of dictionary sources for evaluation");
  fit_joint_cmd->add_option("--seed", aj.seed, "Seed for --holdout")->capture_default_str();
  fit_joint_cmd->add_option("--eval-dict-out", aj.eval_dict_out, "Write the held-out pairs here");
  fit_joint_cmd->add_option("--out-b", aj.out_b, "Language->English map file")->required();
  fit_joint_cmd->add_option("--out-a", aj.out_a, "Mapped-space->model map file")->required();
  fit_joint_cmd->footer(std::string(detail::kEmbeddingFormat) + " " + detail::kMapFormat + " " +
                        detail::kDictFormat);
  on(fit_joint_cmd, [&] {
    const auto src = detail::load_embeddings_logged(ctx, aj.src_emb);
    const auto en = detail::load_embeddings_logged(ctx, aj.en_emb);
    const auto bert = detail::load_model(ctx, aj.bert_emb, aj.bert_vocab);
    BilingualDictionary dict;
    if (aj.dict.empty()) {
      dict = identical_subword_dictionary(src.vocab(), en.vocab());
      ctx.log->info("induced {} identical-subword pairs", dict.size());
      if (dict.empty()) ctx.log->warn("the language and English vocabularies share no subword");
    } else {
      DictionaryLoadReport rep;
      dict = load_dictionary(aj.dict, &rep, aj.max_pairs);
      if (rep.dedup_count) ctx.log->warn("{}: {} duplicate pair(s) dropped", aj.dict, rep.dedup_count);
    }
    if (aj.holdout > 0.0) {
      auto split = split_dictionary(dict, aj.holdout, aj.seed);
      if (!aj.eval_dict_out.empty()) save_dictionary(split.eval, aj.eval_dict_out);
      ctx.log->info("holding out {} of {} pairs", split.eval.size(), dict.size());
      dict = std::move(split.train);
    }
    const auto fit = fit_joint_mapping(src, en, bert, dict);
    for (const auto* f : {&fit.to_english, &fit.to_model}) {
      if (f->low_rank) {
        ctx.log->warn("only {} training pairs for a {}-dimensional input; map is under-determined",
                      f->pair_count, f->map.src_dim());
      }
    }
    save_map(fit.to_english.map, aj.out_b);
    save_map(fit.to_model.map, aj.out_a);
    ctx.out << "stage1_pairs\t" << fit.to_english.pair_count << "\nstage1_mean_residual\t"
            << text::format_significant(fit.to_english.mean_residual) << "\nstage2_pairs\t"
            << fit.to_model.pair_count << "\nstage2_mean_residual\t"
            << text::format_significant(fit.to_model.mean_residual) << '\n';
  });

  // align-eval
  struct {
    std::string src_emb, tgt_emb, dict;
    std::vector<std::string> maps;
    AlignConfig cfg;
    std::size_t sample = kDefaultUnsupervisedSample;
    double warn_precision = 0.20;
    double warn_unsupervised = 0.25;
  } ae;
  auto* eval_cmd = app.add_subcommand("align-eval", "Measure alignment precision@k and the unsupervised score");
  eval_cmd->add_option("--src-emb", ae.src_emb, "Source embeddings")->required();
  eval_cmd->add_option("--tgt-emb", ae.tgt_emb, "Target embeddings")->required();
  eval_cmd->add_option("--map", ae.maps, "Map file; repeat to chain maps in order")->required();
  eval_cmd->add_option("--dict", ae.dict, "Evaluation dictionary (omit for the unsupervised score only)");
  eval_cmd->add_option("--eval-k", ae.cfg.eval_k, "Retrieval depth for precision")->capture_default_str();
  eval_cmd->add_option("--csls-k", ae.cfg.csls_k, "CSLS neighborhood size")->capture_default_str();
  eval_cmd->add_option("--sample", ae.sample, "Source rows used by the unsupervised score")->capture_default_str();
  eval_cmd->add_option("--warn-below-precision", ae.warn_precision,
                       "Warn when precision@k is below this value")->capture_default_str();
  eval_cmd->add_option("--warn-below-unsupervised", ae.warn_unsupervised,
                       "Warn when the unsupervised score is below this value")->capture_default_str();
  eval_cmd->footer(std::string(detail::kEmbeddingFormat) + " " + detail::kMapFormat + " " +
                   detail::kDictFormat);
  on(eval_cmd, [&] {
    const auto src = detail::load_embeddings_logged(ctx, ae.src_emb);
    const auto tgt = detail::load_embeddings_logged(ctx, ae.tgt_emb);
    const auto map = detail::load_chain(ae.maps);
    if (!ae.dict.empty()) {
      const auto dict = load_dictionary(ae.dict);
      const auto p = eval_precision_at_k(map, src, tgt, dict, ae.cfg);
      ctx.out << "precision_at_" << ae.cfg.eval_k << '\t' << text::format_fixed(p.precision, 6)
              << "\nevaluated_sources\t" << p.evaluated_sources << "\nskipped_pairs\t"
              << p.skipped_pairs << '\n';
      if (p.precision < ae.warn_precision) {
        ctx.log->warn("precision@{} {:.4f} is below {:.2f}", ae.cfg.eval_k, p.precision,
                      ae.warn_precision);
      }
    }
    const double u = unsupervised_score(map, src, tgt, ae.cfg, ae.sample);
    ctx.out << "unsupervised_score\t" << text::format_fixed(u, 6) << '\n';
    if (u < ae.warn_unsupervised) {
      ctx.log->warn("unsupervised score {:.4f} is below {:.2f}", u, ae.warn_unsupervised);
    }
  });

  // csls-nn
  struct {
    std::string src_emb, tgt_emb, queries, out, lang = "source";
    std::vector<std::string> maps;
    AlignConfig cfg;
    std::size_t top = 5;
    bool probability = false;
  } nn;
  auto* nn_cmd = app.add_subcommand("csls-nn", "Nearest-neighbor audit table under CSLS");
  nn_cmd->add_option("--src-emb", nn.src_emb, "Source embeddings")->required();
  nn_cmd->add_option("--tgt-emb", nn.tgt_emb, "Target embeddings")->required();
  nn_cmd->add_option("--map", nn.maps, "Map file(s) applied to the source first, chained in order");
  nn_cmd->add_option("--queries", nn.queries, "Only these source tokens (one per line)");
  nn_cmd->add_option("--top", nn.top, "Neighbors per source token")->capture_default_str();
  nn_cmd->add_option("--csls-k", nn.cfg.csls_k, "CSLS neighborhood size")->capture_default_str();
  nn_cmd->add_option("--source-lang", nn.lang, "Value of the source_lang column")->capture_default_str();
  nn_cmd->add_flag("--probability", nn.probability,
                   "Add a softmax-over-displayed-neighbors column");
  nn_cmd->add_option("--out", nn.out, "Output file (default: standard output)");
  nn_cmd->footer("Output: TSV 'source_lang<TAB>source<TAB>target<TAB>score[<TAB>probability]' "
                 "sorted by source token then rank. " + std::string(detail::kEmbeddingFormat));
  on(nn_cmd, [&] {
    const auto src = detail::load_embeddings_logged(ctx, nn.src_emb);
    const auto tgt = detail::load_embeddings_logged(ctx, nn.tgt_emb);
    EmbeddingMatrix queries = ensure_normalized(src);
    if (!nn.maps.empty()) queries = apply_map(detail::load_chain(nn.maps), queries);
    CslsIndex index(queries, tgt, nn.cfg.csls_k);
    std::vector<std::size_t> ids;
    if (nn.queries.empty()) {
      ids.resize(queries.size());
      std::iota(ids.begin(), ids.end(), std::size_t{0});
    } else {
      for (const auto& q : detail::read_token_list(nn.queries)) {
        auto id = queries.vocab().find(q);
        if (id) ids.push_back(*id);
        else ctx.log->warn("query '{}' not in {}", q, nn.src_emb);
      }
    }
    const auto lists = index.neighbors(ids, std::min(nn.top, tgt.size()));
    detail::with_output(ctx, nn.out, [&](std::ostream& os) {
      write_audit_report(nn.lang, lists, os, nn.probability);
    });
  });

  // mixture-build
  struct {
    std::string src_emb, en_emb, bert_emb, bert_vocab, map_b, tokens, out;
    AlignConfig cfg;
  } mb;
  auto* mix_cmd = app.add_subcommand("mixture-build", "Build mixture-of-anchors assignments for new subwords");
  mix_cmd->add_option("--src-emb", mb.src_emb, "Language subword embeddings")->required();
  mix_cmd->add_option("--en-emb", mb.en_emb, "English subword embeddings")->required();
  mix_cmd->add_option("--bert-emb", mb.bert_emb, "Model embedding table")->required();
  mix_cmd->add_option("--bert-vocab", mb.bert_vocab, "Model vocabulary (checked against --bert-emb)");
  mix_cmd->add_option("--map-b", mb.map_b, "Language->English map")->required();
  mix_cmd->add_option("--tokens", mb.tokens,
                      "Language tokens to assign (default: every language subword the model lacks)");
  mix_cmd->add_option("--top-m", mb.cfg.top_m, "Anchors per subword")->capture_default_str();
  mix_cmd->add_option("--csls-k", mb.cfg.csls_k, "CSLS neighborhood size")->capture_default_str();
  mix_cmd->add_option("--out", mb.out, "Assignment file to write")->required();
  mix_cmd->footer("Assignment file: 'token<TAB>anchor1:weight1,anchor2:weight2,...' with weights "
                  "at 6 decimals. Anchors are English subwords present in the model vocabulary.");
  on(mix_cmd, [&] {
    const auto src = detail::load_embeddings_logged(ctx, mb.src_emb);
    const auto en = detail::load_embeddings_logged(ctx, mb.en_emb);
    const auto bert = detail::load_model(ctx, mb.bert_emb, mb.bert_vocab);
    const auto map_b = load_map(mb.map_b);
    const auto tokens = mb.tokens.empty()
                            ? source_tokens(select_new_subwords(src.vocab(), bert.vocab()))
                            : detail::read_token_list(mb.tokens);
    const auto assignments = build_all_assignments(tokens, src, map_b, en, bert, mb.cfg);
    save_assignments(assignments, mb.out);
    ctx.log->info("wrote {} assignments", assignments.size());
  });

  // expand
  struct {
    std::string bert_emb, bert_vocab, strategy, src_emb, src_vocab, assignments, map_b, map_a,
        token_counts, out_dir;
    std::uint64_t seed = 0;
    std::uint64_t min_freq = 0;
  } ex;
  auto* expand_cmd = app.add_subcommand("expand", "Append unseen language subwords to the model");
  expand_cmd->add_option("--bert-emb", ex.bert_emb, "Model embedding table")->required();
  expand_cmd->add_option("--bert-vocab", ex.bert_vocab, "Model vocabulary (checked against --bert-emb)");
  expand_cmd->add_option("--strategy", ex.strategy, "mixture | joint | random")
      ->required()
      ->check(CLI::IsMember({"mixture", "joint", "random"}));
  expand_cmd->add_option("--src-emb", ex.src_emb, "Language subword embeddings (joint; token source)");
  expand_cmd->add_option("--src-vocab", ex.src_vocab, "Language vocabulary (token source if no --src-emb)");
  expand_cmd->add_option("--assignments", ex.assignments, "Mixture assignment file (mixture)");
  expand_cmd->add_option("--map-b", ex.map_b, "Language->English map (joint)");
  expand_cmd->add_option("--map-a", ex.map_a, "Mapped-space->model map (joint)");
  expand_cmd->add_option("--seed", ex.seed, "Donor sampling seed (random)")->capture_default_str();
  expand_cmd->add_option("--min-freq", ex.min_freq, "Skip subwords seen fewer times (needs --token-counts)");
  expand_cmd->add_option("--token-counts", ex.token_counts, "'token count' lines, e.g. from bpe-train --counts-out");
  expand_cmd->add_option("--out-dir", ex.out_dir, "Directory for vocab.txt, embeddings.vec, provenance.tsv")
      ->required();
  expand_cmd->footer("Writes vocab.txt (one token per line; original tokens first with unchanged ids), "
                     "embeddings.vec (word2vec text) and provenance.tsv ('token<TAB>strategy<TAB>detail').");
  on(expand_cmd, [&] {
    const auto bert = detail::load_model(ctx, ex.bert_emb, ex.bert_vocab);
    std::optional<EmbeddingMatrix> src;
    if (!ex.src_emb.empty()) src = detail::load_embeddings_logged(ctx, ex.src_emb);
    Vocabulary lang_vocab;
    if (!ex.src_vocab.empty()) lang_vocab = load_vocabulary(ex.src_vocab);
    else if (src) lang_vocab = src->vocab();
    else throw Error(ErrorCode::kInvalidArgument, "expand needs --src-emb or --src-vocab");
    std::optional<TokenCounts> counts;
    if (ex.min_freq > 0) {
      if (ex.token_counts.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--min-freq needs --token-counts");
      }
      counts = load_token_counts(ex.token_counts);
    }
    const auto new_subwords =
        select_new_subwords(lang_vocab, bert.vocab(), counts ? &*counts : nullptr, ex.min_freq);
    ctx.log->info("{} new subwords", new_subwords.size());

    std::vector<MixtureAssignment> assignments;
    std::optional<LinearMap> map_b;
    std::optional<LinearMap> map_a;
    ExpansionInputs inputs;
    ExpansionStrategy strategy = ExpansionStrategy::mixture();
    if (ex.strategy == "mixture") {
      if (ex.assignments.empty()) throw Error(ErrorCode::kInvalidArgument, "mixture needs --assignments");
      assignments = load_assignments(ex.assignments);
      inputs.assignments = assignments;
    } else if (ex.strategy == "joint") {
      if (!src || ex.map_b.empty() || ex.map_a.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "joint needs --src-emb, --map-b and --map-a");
      }
      map_b = load_map(ex.map_b);
      map_a = load_map(ex.map_a);
      inputs.lang = &*src;
      inputs.to_english = &*map_b;
      inputs.to_model = &*map_a;
      strategy = ExpansionStrategy::joint();
    } else {
      strategy = ExpansionStrategy::random(ex.seed);
    }
    const auto model = expand_vocabulary(bert, new_subwords, strategy, inputs);
    emit_expanded(model, ex.out_dir);
    ctx.out << "original_tokens\t" << model.original_size << "\nnew_tokens\t"
            << model.provenance.size() << "\ntotal_tokens\t" << model.vocab().size() << '\n';
  });

  // oov-stats
  struct {
    std::string vocab, corpus, out, unk = std::string(kDefaultUnkToken);
    OovOptions opts;
    bool json = false, tsv = false;
  } os;
  auto* oov_cmd = app.add_subcommand("oov-stats", "Word- and subword-level OOV rates of a corpus");
  oov_cmd->add_option("--vocab", os.vocab, "Model vocabulary file")->required();
  oov_cmd->add_option("--corpus", os.corpus, "Whitespace-tokenized corpus")->required();
  oov_cmd->add_option("--unk", os.unk, "Unknown token")->capture_default_str();
  oov_cmd->add_option("--max-chars", os.opts.max_chars, "Longer words are subword-level OOV")->capture_default_str();
  oov_cmd->add_option("--top", os.opts.top_n, "Most frequent OOV words to list")->capture_default_str();
  oov_cmd->add_flag("--types", os.opts.type_level, "Count distinct words instead of occurrences");
  oov_cmd->add_flag("--json", os.json, "Print a flat JSON object");
  oov_cmd->add_flag("--tsv", os.tsv, "Print the single-line TSV report");
  oov_cmd->add_option("--out", os.out, "Also write the TSV report (input to compare-oov)");
  oov_cmd->footer(std::string(detail::kVocabFormat) +
                  " TSV report: a '#' header line, then 'total_words word_oov subword_oov "
                  "word_oov_rate subword_oov_rate level' tab separated.");
  on(oov_cmd, [&] {
    const auto vocab = load_vocabulary(os.vocab);
    auto in = text::open_input(os.corpus);
    const auto r = corpus_oov_stats(vocab, os.unk, in, os.opts);
    if (!os.out.empty()) {
      auto f = text::open_output(os.out);
      write_report_tsv(r, f);
      text::finish_output(f, os.out);
    }
    if (os.json) ctx.out << detail::report_json(r).dump() << '\n';
    else if (os.tsv) write_report_tsv(r, ctx.out);
    else write_report_text(r, ctx.out);
  });

  // compare-oov
  struct {
    std::string before, after;
    bool not_superset = false, json = false;
  } co;
  auto* cmp_cmd = app.add_subcommand("compare-oov", "Difference between two OOV reports (after - before)");
  cmp_cmd->add_option("--before", co.before, "TSV report for the original vocabulary")->required();
  cmp_cmd->add_option("--after", co.after, "TSV report for the expanded vocabulary")->required();
  cmp_cmd->add_flag("--not-superset", co.not_superset,
                    "The after vocabulary does not contain the before vocabulary; skip the monotonicity check");
  cmp_cmd->add_flag("--json", co.json, "Print a flat JSON object");
  cmp_cmd->footer("Exit status 2 when a rate increased although the after vocabulary is a superset.");
  bool violation = false;
  on(cmp_cmd, [&] {
    const auto before = load_report_tsv(co.before);
    const auto after = load_report_tsv(co.after);
    const auto d = compare_reports(before, after, !co.not_superset);
    if (co.json) {
      nlohmann::ordered_json j;
      j["total_words"] = d.total_words;
      j["word_oov_delta"] = d.word_oov;
      j["subword_oov_delta"] = d.subword_oov;
      j["word_oov_rate_delta"] = d.word_oov_rate;
      j["subword_oov_rate_delta"] = d.subword_oov_rate;
      j["violation"] = d.violation;
      ctx.out << j.dump() << '\n';
    } else {
      write_delta_text(d, ctx.out);
    }
    if (d.violation) {
      ctx.log->error("OOV rate increased after vocabulary growth");
      violation = true;
    }
  });

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("vocab-bridge");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << to_string(ErrorCode::kUsage) << ": " << e.what() << '\n';
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kExitUsage;
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kUsage ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return kExitData;
  }
  return violation ? kExitData : kExitOk;
}

}  // namespace vocab_bridge::cli
