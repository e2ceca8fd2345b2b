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

// tstkit command line: transfer, eval, tune and sample subcommands.
// Exit codes: 0 success, 1 configuration error, 2 partial failures.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tstkit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct Flags {
  tstkit::RunConfig run;
  std::string strategy = "greedy";
  std::uint64_t decode_seed = 0;
  double temperature = 1.0;
  std::string eos = "</s>";

  // eval
  std::string manifest;

  // tune
  std::string dev_path;
  std::string trace_path = "trace.jsonl";
  std::size_t budget = 30;
  std::uint64_t tune_seed = 0;
  std::string tune_mode = "gp";
  double alpha_lo = 0, alpha_hi = 10, beta_lo = 0, beta_hi = 10;
  tstkit::ObjectiveWeights weights;

  void finish() {
    if (strategy == "sampled") {
      run.decoding.strategy = tstkit::SampledStrategy{decode_seed, temperature};
    } else if (strategy == "greedy") {
      run.decoding.strategy = tstkit::GreedyStrategy{};
    } else {
      throw tstkit::ConfigError("unknown strategy '" + strategy + "'");
    }
    if (eos.empty()) {
      run.decoding.eos_token.reset();
    } else {
      run.decoding.eos_token = eos;
    }
  }
};

void add_model_flags(CLI::App* app, Flags& f) {
  auto& r = f.run;
  app->add_option("--conllu", r.conllu_paths, "Parsed CoNLL-U files (repeatable)");
  app->add_option("--word-vectors", r.word_vectors_path, "Initial word vectors: `token v1 .. vd` per line");
  app->add_option("--dgcn-weights", r.dgcn_weights_path, "Graph-convolution weights (JSON)");
  app->add_option("--embedding-cache", r.embedding_cache_path, "Binary embedding cache file");
  app->add_option("--layers", r.layers, "Graph-convolution layers")->capture_default_str();
  app->add_option("--dim", r.dim, "Embedding dimension")->capture_default_str();
  app->add_option("--model-seed", r.model_seed, "Seed for untrained weights and hash features")->capture_default_str();
}

void add_pool_flags(CLI::App* app, Flags& f) {
  auto& r = f.run;
  app->add_option("--fewshots", r.fewshot_path, "Few-shot pool (JSONL with source/target)");
  app->add_option("-k,--k-shots", r.k_shots, "Number of representative few-shots")->capture_default_str();
  app->add_option("--sample-seed", r.sample_seed, "Clustering seed")->capture_default_str();
  app->add_option("--analysis-backend", r.analysis_backend, "echo | http")->capture_default_str();
  app->add_option("--analysis-url", r.analysis_url, "Text-generation base URL");
  app->add_option("--analysis-path", r.analysis_path, "Text-generation endpoint path")->capture_default_str();
  app->add_option("--analysis-model", r.analysis_model, "Model id sent with analysis requests");
  app->add_option("--token-env", r.token_env, "Environment variable holding the API token")->capture_default_str();
  app->add_option("--workers", r.workers, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_decode_flags(CLI::App* app, Flags& f) {
  auto& r = f.run;
  app->add_option("--negative-context", r.negative_context_path, "Irrelevant-context text file");
  app->add_option("--chunk-size", r.chunk_size, "Negative-context chunk size in tokens")->capture_default_str();
  app->add_option("--alpha", r.decoding.alpha, "Prompt vs plain contrast weight")->capture_default_str();
  app->add_option("--beta", r.decoding.beta, "Prompt vs negative contrast weight")->capture_default_str();
  app->add_option("--epsilon", r.decoding.plausibility_epsilon, "Plausibility threshold")->capture_default_str();
  app->add_option("--max-tokens", r.decoding.max_tokens, "Generation budget")->capture_default_str();
  app->add_option("--strategy", f.strategy, "greedy | sampled")->capture_default_str();
  app->add_option("--decode-seed", f.decode_seed, "Sampling seed")->capture_default_str();
  app->add_option("--temperature", f.temperature, "Sampling temperature")->capture_default_str();
  app->add_option("--eos", f.eos, "End-of-sequence token (empty to disable)")->capture_default_str();
}

void add_lm_flags(CLI::App* app, Flags& f) {
  auto& r = f.run;
  app->add_option("--lm-backend", r.lm_backend, "toy | http")->capture_default_str();
  app->add_option("--lm-file", r.lm_path, "Toy bigram model (JSON)");
  app->add_option("--lm-url", r.lm_url, "Logit provider base URL");
  app->add_option("--lm-model", r.lm_model, "Logit provider model id");
}

void add_classifier_flags(CLI::App* app, Flags& f) {
  auto& r = f.run;
  app->add_option("--classifier", r.classifier_backend, "lexicon | http")->capture_default_str();
  app->add_option("--lexicon", r.lexicon_path, "Style lexicon: `label: w1 w2 ...` per line");
  app->add_option("--classifier-url", r.classifier_url, "Classifier base URL");
}

int cmd_transfer(Flags& f) {
  f.finish();
  const auto outcome = tstkit::run_transfer(f.run);
  std::cout << "wrote " << outcome.manifest_path << " ("
            << outcome.manifest["items"].size() << " items, " << outcome.failures
            << " failed)\n";
  return outcome.failures > 0 ? kExitPartial : kExitOk;
}

int cmd_eval(Flags& f) {
  if (f.manifest.empty()) throw tstkit::ConfigError("--manifest is required");
  auto classifier = tstkit::make_classifier(f.run);
  auto provider = tstkit::make_provider(f.run);
  const auto rep = tstkit::run_eval(f.manifest, f.run.references_path, *classifier, *provider);
  std::cout << tstkit::to_json(rep).dump(2) << '\n';
  return kExitOk;
}

int cmd_tune(Flags& f) {
  f.finish();
  auto& cfg = f.run;
  if (f.dev_path.empty()) throw tstkit::ConfigError("--dev is required");
  cfg.input_path = f.dev_path;
  cfg.validate_for_transfer();
  const auto dev_recs = tstkit::load_corpus(f.dev_path);
  std::vector<tstkit::DevItem> dev;
  for (const auto& r : dev_recs) {
    const auto ref = r.reference ? r.reference : r.target;
    if (!ref) throw tstkit::ConfigError("dev record '" + r.id + "' has no reference");
    dev.push_back({r.source, *ref, r.target_style});
  }
  std::map<std::string, std::string> source_style;
  for (const auto& r : dev_recs) source_style[r.source] = r.source_style;

  auto ectx = tstkit::make_embedding_context(cfg);
  auto provider = tstkit::make_provider(cfg);
  auto client = tstkit::make_analysis_client(cfg);
  auto classifier = tstkit::make_classifier(cfg);
  const auto pool = tstkit::to_fewshot_pairs(tstkit::load_corpus(cfg.fewshot_path));
  tstkit::TransferPipeline pipeline(
      *ectx->embedder, *provider,
      tstkit::split_chunks(tstkit::read_file(cfg.negative_context_path), cfg.chunk_size));
  tstkit::AnalysisOptions analysis;
  analysis.model_id = cfg.analysis_model;
  pipeline.prepare(pool, std::min(cfg.k_shots, pool.size()), cfg.sample_seed, *client, analysis,
                   cfg.workers);

  auto objective = [&](double alpha, double beta) {
    tstkit::DecodingConfig dc = cfg.decoding;
    dc.alpha = alpha;
    dc.beta = beta;
    auto transfer = [&](const tstkit::DevItem& item) {
      return pipeline.transfer(item.input, source_style[item.input], item.target_style, dc)
          .result.text;
    };
    return tstkit::validation_objective(transfer, dev, *classifier, *provider, f.weights);
  };
  tstkit::SearchBox box{{f.alpha_lo, f.alpha_hi}, {f.beta_lo, f.beta_hi}, f.budget};
  tstkit::TunerOptions opt;
  if (f.tune_mode == "random") {
    opt.mode = tstkit::TunerMode::kRandomSearch;
  } else if (f.tune_mode != "gp") {
    throw tstkit::ConfigError("unknown tuner mode '" + f.tune_mode + "'");
  }
  const auto res = tstkit::optimize(objective, box, f.tune_seed, opt);
  std::ostringstream trace;
  tstkit::write_trace(res.trace, trace);
  tstkit::write_file_atomic(f.trace_path, trace.str());
  ectx->save_cache(cfg);
  std::cout << tstkit::to_json(res.best).dump() << '\n';
  return kExitOk;
}

int cmd_sample(Flags& f) {
  auto& cfg = f.run;
  if (cfg.fewshot_path.empty()) throw tstkit::ConfigError("--fewshots is required");
  auto ectx = tstkit::make_embedding_context(cfg);
  const auto pool = tstkit::to_fewshot_pairs(tstkit::load_corpus(cfg.fewshot_path));
  if (cfg.k_shots < 1 || cfg.k_shots > pool.size()) {
    throw tstkit::ConfigError("k must be between 1 and the pool size");
  }
  tstkit::Rng rng(cfg.sample_seed);
  for (const auto& p : tstkit::select_fewshots(pool, cfg.k_shots, *ectx->embedder, rng)) {
    std::cout << nlohmann::json({{"id", p.id}, {"source", p.source}, {"target", p.target}}).dump()
              << '\n';
  }
  ectx->save_cache(cfg);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot prompt synthesis and contrastive decoding for text style transfer"};
  app.set_config("--config", "", "Config file (key = value lines, [section] per subcommand)");
  app.set_version_flag("--version", std::string(tstkit::kVersion));
  app.require_subcommand(1);
  Flags f;

  auto* transfer = app.add_subcommand("transfer", "Run style transfer over an input set");
  add_model_flags(transfer, f);
  add_pool_flags(transfer, f);
  add_decode_flags(transfer, f);
  add_lm_flags(transfer, f);
  transfer->add_option("--inputs", f.run.input_path, "Input set (JSONL)");
  transfer->add_option("--references", f.run.references_path, "References (JSONL, optional)");
  transfer->add_option("-o,--out", f.run.output_dir, "Output directory")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score a transfer manifest");
  eval->add_option("--manifest", f.manifest, "Manifest written by transfer");
  eval->add_option("--references", f.run.references_path, "References (JSONL, optional)");
  add_classifier_flags(eval, f);
  add_lm_flags(eval, f);

  auto* tune = app.add_subcommand("tune", "Search decoding weights on a dev set");
  add_model_flags(tune, f);
  add_pool_flags(tune, f);
  add_decode_flags(tune, f);
  add_lm_flags(tune, f);
  add_classifier_flags(tune, f);
  tune->add_option("--dev", f.dev_path, "Dev set (JSONL with reference)");
  tune->add_option("--trace", f.trace_path, "Trial trace output (JSONL)")->capture_default_str();
  tune->add_option("--budget", f.budget, "Objective evaluations")->capture_default_str();
  tune->add_option("--tune-seed", f.tune_seed, "Optimizer seed")->capture_default_str();
  tune->add_option("--mode", f.tune_mode, "gp | random")->capture_default_str();
  tune->add_option("--alpha-min", f.alpha_lo)->capture_default_str();
  tune->add_option("--alpha-max", f.alpha_hi)->capture_default_str();
  tune->add_option("--beta-min", f.beta_lo)->capture_default_str();
  tune->add_option("--beta-max", f.beta_hi)->capture_default_str();
  tune->add_option("--w-acc", f.weights.accuracy)->capture_default_str();
  tune->add_option("--w-bleu", f.weights.bleu)->capture_default_str();
  tune->add_option("--w-ppl", f.weights.ppl)->capture_default_str();
  tune->add_option("--ppl-cap", f.weights.ppl_cap)->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Print the representative few-shots");
  add_model_flags(sample, f);
  add_pool_flags(sample, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*transfer) return cmd_transfer(f);
    if (*eval) return cmd_eval(f);
    if (*tune) return cmd_tune(f);
    if (*sample) return cmd_sample(f);
  } catch (const tstkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
