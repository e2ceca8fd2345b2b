// Copyright 2026 The tstkit Authors. All Rights Reserved.
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
// =============================================================================

#ifndef TSTKIT_PIPELINE_HPP
#define TSTKIT_PIPELINE_HPP

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tstkit/common.hpp"
#include "tstkit/conllu.hpp"
#include "tstkit/corpus.hpp"
#include "tstkit/decoder.hpp"
#include "tstkit/embedder.hpp"
#include "tstkit/eval.hpp"
#include "tstkit/graph_embed.hpp"
#include "tstkit/http_clients.hpp"
#include "tstkit/neg_sampler.hpp"
#include "tstkit/prompt_forge.hpp"
#include "tstkit/sampler.hpp"
#include "tstkit/toy_lm.hpp"
#include "tstkit/tuner.hpp"

namespace tstkit {

/// Invalid run configuration; the CLI maps it to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Calls fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). The first exception is rethrown after all workers stop.
inline void parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

/// Writes to "<path>.tmp" and renames over `path`.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << contents;
    if (!out.flush()) throw Error("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp + " to " + path + ": " + ec.message());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Transfer pipeline
// ---------------------------------------------------------------------------

struct ItemResult {
  SynthesizedPrompt prompt;
  NegativeSample negative;
  TransferResult result;
};

/// Few-shot selection and chain building happen once in `prepare`; each
/// `transfer` then reranks, assembles the prompt, picks the negative chunk
/// and decodes. `transfer` is const and may run concurrently.
class TransferPipeline {
 public:
  TransferPipeline(const Embedder& embedder, const LogitProvider& provider,
                   std::vector<std::string> negative_chunks)
      : embedder_(&embedder), provider_(&provider), chunks_(std::move(negative_chunks)) {
    if (chunks_.empty()) throw ArgumentError("negative context produced no chunks");
    for (const auto& c : chunks_) {
      try {
        chunk_embeddings_.emplace_back(embedder_->embed_text(c));
      } catch (const ParseError&) {
        chunk_embeddings_.emplace_back(std::nullopt);
      }
    }
  }

  void prepare(const std::vector<FewShotPair>& pool, std::size_t k, std::uint64_t sample_seed,
               TextGenClient& client, const AnalysisOptions& analysis, std::size_t workers = 1) {
    Rng rng(sample_seed);
    fewshots_ = select_fewshots(pool, k, *embedder_, rng);
    std::vector<AnalysisChain> chains(fewshots_.size());
    parallel_for(fewshots_.size(), workers, [&](std::size_t i) {
      chains[i] = build_chain(fewshots_[i], client, *embedder_, analysis);
    });
    chains_ = std::move(chains);
  }

  void set_chains(std::vector<AnalysisChain> chains) { chains_ = std::move(chains); }

  const std::vector<FewShotPair>& fewshots() const { return fewshots_; }
  const std::vector<AnalysisChain>& chains() const { return chains_; }
  const std::vector<std::string>& negative_chunks() const { return chunks_; }

  ItemResult transfer(const std::string& input, const std::string& source_style,
                      const std::string& target_style, const DecodingConfig& cfg) const {
    ItemResult out;
    const auto input_emb = embedder_->embed_text(input);
    out.prompt = assemble_prompt(source_style, target_style, rerank(input_emb, chains_), input);
    const auto prompt_emb = embedder_->embed_text(out.prompt.rendered);
    out.negative = select_negative_embedded(chunks_, chunk_embeddings_, prompt_emb);
    out.result = generate(*provider_, out.prompt, out.negative, cfg);
    return out;
  }

 private:
  const Embedder* embedder_;
  const LogitProvider* provider_;
  std::vector<std::string> chunks_;
  std::vector<std::optional<SentenceEmbedding>> chunk_embeddings_;
  std::vector<FewShotPair> fewshots_;
  std::vector<AnalysisChain> chains_;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string fewshot_path;
  std::string input_path;
  std::string references_path;
  std::vector<std::string> conllu_paths;
  std::string word_vectors_path;
  std::string dgcn_weights_path;
  std::string embedding_cache_path;
  std::string negative_context_path;
  std::string output_dir = ".";

  std::size_t k_shots = 5;
  std::size_t layers = 2;
  std::size_t dim = 64;
  std::uint64_t model_seed = 0;
  std::uint64_t sample_seed = 42;
  std::size_t chunk_size = 256;
  std::size_t workers = 0;

  DecodingConfig decoding;

  std::string analysis_backend = "echo";  // echo | http
  std::string analysis_url;
  std::string analysis_path = "/v1/complete";
  std::string analysis_model;

  std::string lm_backend = "toy";  // toy | http
  std::string lm_path;
  std::string lm_url;
  std::string lm_model;

  std::string classifier_backend = "lexicon";  // lexicon | http
  std::string lexicon_path;
  std::string classifier_url;

  std::string token_env = kDefaultTokenEnv;

  void validate_for_transfer() const {
    if (k_shots < 1) throw ConfigError("k must be >= 1");
    auto need = [](const std::string& p, const char* what) {
      if (p.empty()) throw ConfigError(std::string(what) + " path is required");
      if (!std::filesystem::exists(p)) throw ConfigError(std::string(what) + " not found: " + p);
    };
    auto maybe = [](const std::string& p, const char* what) {
      if (!p.empty() && !std::filesystem::exists(p)) {
        throw ConfigError(std::string(what) + " not found: " + p);
      }
    };
    need(fewshot_path, "few-shot pool");
    need(input_path, "input set");
    need(negative_context_path, "negative context");
    maybe(references_path, "references");
    maybe(word_vectors_path, "word vectors");
    maybe(dgcn_weights_path, "model weights");
    for (const auto& p : conllu_paths) maybe(p, "CoNLL-U file");
    if (analysis_backend == "http" && analysis_url.empty()) {
      throw ConfigError("analysis backend http needs a URL");
    } else if (analysis_backend != "echo" && analysis_backend != "http") {
      throw ConfigError("unknown analysis backend '" + analysis_backend + "'");
    }
    validate_lm();
    try {
      decoding.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }

  void validate_lm() const {
    if (lm_backend == "toy") {
      if (lm_path.empty() || !std::filesystem::exists(lm_path)) {
        throw ConfigError("toy language model file not found: '" + lm_path + "'");
      }
    } else if (lm_backend == "http") {
      if (lm_url.empty()) throw ConfigError("lm backend http needs a URL");
    } else {
      throw ConfigError("unknown lm backend '" + lm_backend + "'");
    }
  }

  void validate_classifier() const {
    if (classifier_backend == "lexicon") {
      if (lexicon_path.empty() || !std::filesystem::exists(lexicon_path)) {
        throw ConfigError("lexicon file not found: '" + lexicon_path + "'");
      }
    } else if (classifier_backend == "http") {
      if (classifier_url.empty()) throw ConfigError("classifier backend http needs a URL");
    } else {
      throw ConfigError("unknown classifier backend '" + classifier_backend + "'");
    }
  }

  /// Everything that influences outputs. Output directory and worker count
  /// are excluded so relocated or re-parallelized runs compare equal.
  nlohmann::json snapshot() const {
    nlohmann::json strategy;
    if (const auto* s = std::get_if<SampledStrategy>(&decoding.strategy)) {
      strategy = {{"kind", "sampled"}, {"seed", s->seed}, {"temperature", s->temperature}};
    } else {
      strategy = {{"kind", "greedy"}};
    }
    return {{"fewshots", fewshot_path},
            {"inputs", input_path},
            {"references", references_path},
            {"conllu", conllu_paths},
            {"word_vectors", word_vectors_path},
            {"dgcn_weights", dgcn_weights_path},
            {"negative_context", negative_context_path},
            {"k", k_shots},
            {"layers", layers},
            {"dim", dim},
            {"model_seed", model_seed},
            {"sample_seed", sample_seed},
            {"chunk_size", chunk_size},
            {"decoding",
             {{"alpha", decoding.alpha},
              {"beta", decoding.beta},
              {"epsilon", decoding.plausibility_epsilon},
              {"log_prob_floor", decoding.log_prob_floor},
              {"max_tokens", decoding.max_tokens},
              {"eos", decoding.eos_token.value_or("")},
              {"strategy", strategy}}},
            {"analysis", {{"backend", analysis_backend}, {"url", analysis_url},
                          {"path", analysis_path}, {"model", analysis_model}}},
            {"lm", {{"backend", lm_backend}, {"path", lm_path}, {"url", lm_url},
                    {"model", lm_model}}}};
  }
};

inline std::unique_ptr<TextGenClient> make_analysis_client(const RunConfig& cfg) {
  if (cfg.analysis_backend == "http") {
    return std::make_unique<HttpTextGenClient>(HttpEndpoint{cfg.analysis_url, cfg.token_env},
                                               cfg.analysis_path);
  }
  return std::make_unique<EchoClient>();
}

inline std::unique_ptr<LogitProvider> make_provider(const RunConfig& cfg) {
  cfg.validate_lm();
  if (cfg.lm_backend == "http") {
    return std::make_unique<HttpLogitProvider>(HttpEndpoint{cfg.lm_url, cfg.token_env},
                                               cfg.lm_model);
  }
  return load_toy_provider(cfg.lm_path);
}

inline std::unique_ptr<StyleClassifier> make_classifier(const RunConfig& cfg) {
  cfg.validate_classifier();
  if (cfg.classifier_backend == "http") {
    return std::make_unique<HttpClassifier>(HttpEndpoint{cfg.classifier_url, cfg.token_env});
  }
  return std::make_unique<LexiconClassifier>(LexiconClassifier::load(cfg.lexicon_path));
}

/// Model, parsed graphs and embedding cache for one configuration.
struct EmbeddingContext {
  std::unique_ptr<DgcnModel> model;
  GraphStore graphs;
  EmbeddingCache cache;
  std::unique_ptr<Embedder> embedder;

  void save_cache(const RunConfig& cfg) const {
    if (!cfg.embedding_cache_path.empty()) cache.save(cfg.embedding_cache_path);
  }
};

inline std::unique_ptr<EmbeddingContext> make_embedding_context(const RunConfig& cfg) {
  auto ctx = std::make_unique<EmbeddingContext>();
  std::shared_ptr<const WordVectorTable> table;
  if (!cfg.word_vectors_path.empty()) {
    std::ifstream in(cfg.word_vectors_path);
    if (!in) throw ConfigError("cannot open word vectors " + cfg.word_vectors_path);
    table = std::make_shared<const WordVectorTable>(read_word_vectors(in, cfg.dim));
  }
  if (!cfg.dgcn_weights_path.empty()) {
    auto j = nlohmann::json::parse(read_file(cfg.dgcn_weights_path));
    ctx->model = std::make_unique<DgcnModel>(weights_from_json(j).with_word_vectors(table));
  } else {
    ctx->model = std::make_unique<DgcnModel>(
        DgcnModel::random(cfg.layers, cfg.dim, cfg.model_seed, RelationVocab::universal(), table));
  }
  for (const auto& p : cfg.conllu_paths) ctx->graphs.add_conllu(read_file(p));
  if (!cfg.embedding_cache_path.empty()) ctx->cache.load(cfg.embedding_cache_path);
  ctx->embedder = std::make_unique<Embedder>(*ctx->model, ctx->graphs, &ctx->cache);
  return ctx;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

inline nlohmann::json log_prob_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const StepDiagnostics& s) {
  return {{"token", s.token_text},
          {"lp_prompt", log_prob_json(s.lp_prompt)},
          {"lp_plain", log_prob_json(s.lp_plain)},
          {"lp_negative", log_prob_json(s.lp_negative)},
          {"lp_combined", log_prob_json(s.lp_combined)}};
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline constexpr const char* kManifestFile = "manifest.json";

struct RunOutcome {
  nlohmann::json manifest;
  std::string manifest_path;
  std::size_t failures = 0;
};

/// Runs the whole transfer and writes "<output_dir>/manifest.json"
/// atomically. Per-item failures are recorded and do not stop the run.
inline RunOutcome run_transfer(const RunConfig& cfg) {
  cfg.validate_for_transfer();
  const auto pool = to_fewshot_pairs(load_corpus(cfg.fewshot_path));
  std::vector<CorpusRecord> inputs;
  {
    std::ifstream in(cfg.input_path);
    if (!in) throw ConfigError("cannot open input set " + cfg.input_path);
    inputs = parse_corpus(in, cfg.input_path);
  }
  std::vector<std::optional<std::string>> refs(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) refs[i] = inputs[i].reference;
  if (!cfg.references_path.empty()) {
    const auto rr = load_corpus(cfg.references_path);
    for (std::size_t i = 0; i < inputs.size() && i < rr.size(); ++i) {
      refs[i] = rr[i].reference ? rr[i].reference : rr[i].target;
    }
  }

  auto ectx = make_embedding_context(cfg);
  auto provider = make_provider(cfg);
  auto client = make_analysis_client(cfg);
  const auto chunks = split_chunks(read_file(cfg.negative_context_path), cfg.chunk_size);

  TransferPipeline pipeline(*ectx->embedder, *provider, chunks);
  AnalysisOptions analysis;
  analysis.model_id = cfg.analysis_model;
  if (!inputs.empty() || !pool.empty()) {
    pipeline.prepare(pool, std::min(cfg.k_shots, pool.size()), cfg.sample_seed, *client, analysis,
                     cfg.workers);
  }

  std::vector<nlohmann::json> items(inputs.size());
  std::atomic<std::size_t> failures{0};
  parallel_for(inputs.size(), cfg.workers, [&](std::size_t i) {
    const auto& rec = inputs[i];
    nlohmann::json item = {{"index", i},
                           {"id", rec.id},
                           {"input", rec.source},
                           {"source_style", rec.source_style},
                           {"target_style", rec.target_style}};
    if (refs[i]) item["reference"] = *refs[i];
    try {
      const auto r = pipeline.transfer(rec.source, rec.source_style, rec.target_style, cfg.decoding);
      item["prompt_hash"] = detail::hex64(detail::fnv1a(r.prompt.rendered));
      item["negative_index"] = r.negative.chunk_index;
      item["output"] = r.result.text;
      item["stopped_at_eos"] = r.result.stopped_at_eos;
      nlohmann::json diag = nlohmann::json::array();
      for (const auto& s : r.result.steps) diag.push_back(to_json(s));
      item["diagnostics"] = std::move(diag);
      item["status"] = "ok";
    } catch (const PartialResultError& e) {
      item["status"] = "error";
      item["error"] = e.what();
      item["output"] = e.partial().text;
      ++failures;
    } catch (const std::exception& e) {
      item["status"] = "error";
      item["error"] = e.what();
      ++failures;
    }
    items[i] = std::move(item);
  });

  nlohmann::json fewshots = nlohmann::json::array();
  for (const auto& p : pipeline.fewshots()) {
    fewshots.push_back({{"id", p.id}, {"source", p.source}, {"target", p.target}});
  }

  RunOutcome out;
  out.failures = failures.load();
  out.manifest = {{"tool", "tstkit"},
                  {"version", kVersion},
                  {"prompt_template_version", std::string(prompt_template::kPromptTemplateVersion)},
                  {"created_at", utc_timestamp()},
                  {"config", cfg.snapshot()},
                  {"fewshots", std::move(fewshots)},
                  {"items", std::move(items)}};
  std::filesystem::create_directories(cfg.output_dir);
  out.manifest_path = (std::filesystem::path(cfg.output_dir) / kManifestFile).string();
  write_file_atomic(out.manifest_path, out.manifest.dump(2) + "\n");
  ectx->save_cache(cfg);
  return out;
}

/// Scores the successful items of a manifest and stores the report under
/// "eval". References come from `references_path` (aligned by item index,
/// field "reference" or "target") or from the items themselves; when any
/// is missing r-sBLEU is omitted.
inline EvalReport run_eval(const std::string& manifest_path, const std::string& references_path,
                           const StyleClassifier& classifier, const LogitProvider& provider) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }
  std::vector<CorpusRecord> ref_recs;
  if (!references_path.empty()) ref_recs = load_corpus(references_path);

  std::vector<std::string> outputs, sources, references;
  bool refs_complete = true;
  std::size_t hits = 0;
  double nll = 0.0, tokens = 0.0;
  const Tokenizer tok(provider.vocab());
  for (const auto& item : manifest.at("items")) {
    if (item.value("status", "") != "ok") continue;
    const auto output = item.at("output").get<std::string>();
    const auto index = item.at("index").get<std::size_t>();
    std::optional<std::string> ref;
    if (index < ref_recs.size()) {
      ref = ref_recs[index].reference ? ref_recs[index].reference : ref_recs[index].target;
    } else if (item.contains("reference")) {
      ref = item["reference"].get<std::string>();
    }
    if (!ref) refs_complete = false;
    references.push_back(ref.value_or(""));
    if (style_accuracy(classifier, {output}, item.at("target_style").get<std::string>()) > 0.0) {
      ++hits;
    }
    const auto ids = tok.encode_strict(output);
    TokenSeq ctx;
    for (auto id : ids) {
      nll -= logprobs(provider, ctx).values[id];
      ctx.push_back(id);
    }
    tokens += static_cast<double>(ids.size());
    outputs.push_back(output);
    sources.push_back(item.at("input").get<std::string>());
  }
  if (outputs.empty()) throw Error("manifest has no successful items to evaluate");

  EvalReport rep;
  rep.n_items = outputs.size();
  rep.accuracy = static_cast<double>(hits) / static_cast<double>(outputs.size());
  rep.s_sbleu = corpus_bleu(outputs, sources);
  if (refs_complete) {
    rep.r_sbleu = corpus_bleu(outputs, references);
  } else {
    detail::log_warning("references missing for some items; r-sBLEU omitted");
  }
  if (tokens <= 0.0) throw Error("all outputs are empty; perplexity undefined");
  rep.ppl = std::exp(nll / tokens);

  manifest["eval"] = to_json(rep);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  return rep;
}

}  // namespace tstkit

#endif  // TSTKIT_PIPELINE_HPP
