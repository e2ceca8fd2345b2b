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

#ifndef TSTKIT_PROMPT_FORGE_HPP
#define TSTKIT_PROMPT_FORGE_HPP

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tstkit/common.hpp"
#include "tstkit/embedder.hpp"
#include "tstkit/graph_embed.hpp"
#include "tstkit/prompt_template.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

enum class StyleDimension { kLexis = 0, kSyntax = 1, kMood = 2, kSemantics = 3 };

inline constexpr std::array<StyleDimension, 4> kAllDimensions = {
    StyleDimension::kLexis, StyleDimension::kSyntax, StyleDimension::kMood,
    StyleDimension::kSemantics};

inline std::string_view dimension_label(StyleDimension d) {
  return prompt_template::kDimensionLabels[static_cast<std::size_t>(d)];
}

/// Descriptive prompt per dimension; defaults to the built-in wording.
struct DescriptivePrompts {
  std::array<std::string, 4> text = {
      std::string(prompt_template::kDescriptivePrompts[0]),
      std::string(prompt_template::kDescriptivePrompts[1]),
      std::string(prompt_template::kDescriptivePrompts[2]),
      std::string(prompt_template::kDescriptivePrompts[3])};

  const std::string& operator[](StyleDimension d) const {
    return text[static_cast<std::size_t>(d)];
  }
};

struct TextGenRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
};

/// Text-completion backend used for pattern analysis. Implementations must
/// accept concurrent calls and, at temperature 0, answer identical requests
/// identically. Failures are reported as TransportError.
class TextGenClient {
 public:
  virtual ~TextGenClient() = default;
  virtual std::string complete(const TextGenRequest& request) = 0;
};

/// Returns the request prompt unchanged.
class EchoClient final : public TextGenClient {
 public:
  std::string complete(const TextGenRequest& request) override { return request.prompt; }
};

/// Delegates to a callable; handy for canned or failure-injecting mocks.
class FunctionClient final : public TextGenClient {
 public:
  explicit FunctionClient(std::function<std::string(const TextGenRequest&)> fn)
      : fn_(std::move(fn)) {}
  std::string complete(const TextGenRequest& request) override { return fn_(request); }

 private:
  std::function<std::string(const TextGenRequest&)> fn_;
};

struct AnalysisChain {
  FewShotPair pair;
  std::map<StyleDimension, std::string> analyses;
  SentenceEmbedding pair_embedding;
};

struct AnalysisOptions {
  std::string model_id;
  int max_tokens = 256;
  int max_retries = 3;
  DescriptivePrompts prompts;
};

inline std::string render_pair(const FewShotPair& pair) {
  return pair.source + std::string(prompt_template::kPairSeparator) + pair.target;
}

inline std::string analysis_request_text(const FewShotPair& pair, StyleDimension dim,
                                         const DescriptivePrompts& prompts) {
  return prompts[dim] + "\n" + render_pair(pair);
}

/// Sends one descriptive prompt plus the pair at temperature 0. Transport
/// failures and empty replies are retried up to `max_retries` times.
inline std::string analyze_pattern(const FewShotPair& pair, StyleDimension dim,
                                   TextGenClient& client, const AnalysisOptions& opt = {}) {
  if (pair.source.empty() || pair.target.empty()) {
    throw ArgumentError("pair '" + pair.id + "' is missing a side");
  }
  const TextGenRequest req{opt.model_id, analysis_request_text(pair, dim, opt.prompts), 0.0,
                           opt.max_tokens};
  std::string last_failure = "empty response";
  bool last_was_transport = false;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    try {
      std::string reply = text::trim(client.complete(req));
      if (!reply.empty()) return reply;
      last_failure = "empty response";
      last_was_transport = false;
    } catch (const TransportError& e) {
      last_failure = e.what();
      last_was_transport = true;
    }
  }
  const std::string msg = std::string(dimension_label(dim)) + " analysis of pair '" +
                          pair.id + "' failed after " + std::to_string(opt.max_retries) +
                          " retries: " + last_failure;
  if (last_was_transport) throw TransportError(msg);
  throw AnalysisError(msg);
}

/// Runs the four analyses in Lexis, Syntax, Mood, Semantics order.
inline AnalysisChain build_chain(const FewShotPair& pair, TextGenClient& client,
                                 const Embedder& embedder, const AnalysisOptions& opt = {}) {
  AnalysisChain chain;
  chain.pair = pair;
  for (auto dim : kAllDimensions) {
    chain.analyses.emplace(dim, analyze_pattern(pair, dim, client, opt));
  }
  chain.pair_embedding = embedder.embed_pair(pair);
  return chain;
}

/// Stable sort by descending cosine similarity to the input embedding.
inline std::vector<AnalysisChain> rerank(const SentenceEmbedding& input,
                                         std::vector<AnalysisChain> chains) {
  std::vector<double> sims;
  sims.reserve(chains.size());
  for (const auto& c : chains) sims.push_back(cosine_similarity(input, c.pair_embedding));
  std::vector<std::size_t> order(chains.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
  std::vector<AnalysisChain> out;
  out.reserve(chains.size());
  for (auto i : order) out.push_back(std::move(chains[i]));
  return out;
}

/// Chain `index` (1-based) in the analysis-chain layout:
///
///   Chain 1:
///   [Sample 1] <source> ||| <target>
///   [Analysis 1-1] [type]: Lexis
///   <lexis analysis>
///   ...
///   [Analysis 1-4] [type]: Semantics
///   <semantics analysis>
inline std::string render_chain(const AnalysisChain& chain, std::size_t index) {
  const std::string n = std::to_string(index);
  std::string out = "Chain " + n + ":\n[Sample " + n + "] " + render_pair(chain.pair) + "\n";
  for (auto dim : kAllDimensions) {
    const auto it = chain.analyses.find(dim);
    if (it == chain.analyses.end() || it->second.empty()) {
      throw ContractViolation("chain for pair '" + chain.pair.id + "' lacks " +
                              std::string(dimension_label(dim)) + " analysis");
    }
    out += "[Analysis " + n + "-" + std::to_string(static_cast<int>(dim) + 1) +
           "] [type]: " + std::string(dimension_label(dim)) + "\n" + it->second + "\n";
  }
  return out;
}

struct SynthesizedPrompt {
  std::string task_header;
  std::vector<AnalysisChain> ordered_chains;
  std::string input_slot;
  std::string rendered;

  /// Text after the analysis chains: "Input: <x>\nOutput:".
  std::string input_block() const {
    return std::string(prompt_template::kInputLabel) + input_slot + "\n" +
           std::string(prompt_template::kOutputCue);
  }
};

inline SynthesizedPrompt assemble_prompt(const std::string& source_style,
                                         const std::string& target_style,
                                         std::vector<AnalysisChain> chains,
                                         const std::string& input) {
  if (source_style == target_style) {
    throw ArgumentError("source and target style are both '" + source_style + "'");
  }
  if (text::trim(input).empty()) throw ArgumentError("input text is empty");
  SynthesizedPrompt p;
  p.task_header = std::string(prompt_template::kHeaderPrefix) + source_style +
                  std::string(prompt_template::kHeaderMiddle) + target_style +
                  std::string(prompt_template::kHeaderSuffix);
  p.ordered_chains = std::move(chains);
  p.input_slot = input;
  p.rendered = p.task_header + "\n\n";
  for (std::size_t i = 0; i < p.ordered_chains.size(); ++i) {
    p.rendered += render_chain(p.ordered_chains[i], i + 1) + "\n";
  }
  p.rendered += p.input_block();
  return p;
}

}  // namespace tstkit

#endif  // TSTKIT_PROMPT_FORGE_HPP
