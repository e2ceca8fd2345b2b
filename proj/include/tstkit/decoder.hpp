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

#ifndef TSTKIT_DECODER_HPP
#define TSTKIT_DECODER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tstkit/common.hpp"
#include "tstkit/neg_sampler.hpp"
#include "tstkit/prompt_forge.hpp"
#include "tstkit/rng.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

using TokenId = std::size_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Next-token scoring backend. `logits` returns one finite-or-(-inf) value
/// per vocabulary entry and is deterministic per context. Implementations
/// must accept concurrent calls; remote failures surface as TransportError.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;
  virtual const std::vector<std::string>& vocab() const = 0;
  virtual Vector logits(const TokenSeq& context) const = 0;
};

/// Whitespace tokenizer over a provider vocabulary. Words missing from the
/// vocabulary map to "<unk>" when the vocabulary has it.
class Tokenizer {
 public:
  explicit Tokenizer(const std::vector<std::string>& vocab) : vocab_(&vocab) {
    for (std::size_t i = 0; i < vocab.size(); ++i) ids_.emplace(vocab[i], i);
    if (auto it = ids_.find("<unk>"); it != ids_.end()) unk_ = it->second;
  }

  std::optional<TokenId> find(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  TokenSeq encode(std::string_view s) const {
    TokenSeq out;
    for (const auto& w : text::split_whitespace(s)) {
      if (auto id = find(w)) {
        out.push_back(*id);
      } else if (unk_) {
        out.push_back(*unk_);
      } else {
        throw ArgumentError("token '" + w + "' is not in the vocabulary");
      }
    }
    return out;
  }

  /// Like encode, but a word outside the vocabulary is always an error.
  TokenSeq encode_strict(std::string_view s) const {
    TokenSeq out;
    for (const auto& w : text::split_whitespace(s)) {
      auto id = find(w);
      if (!id) throw ArgumentError("token '" + w + "' is not in the vocabulary");
      out.push_back(*id);
    }
    return out;
  }

  std::string decode(const TokenSeq& ids) const {
    std::string out;
    for (auto id : ids) {
      if (!out.empty()) out.push_back(' ');
      out += (*vocab_)[id];
    }
    return out;
  }

 private:
  const std::vector<std::string>* vocab_;
  std::unordered_map<std::string, TokenId> ids_;
  std::optional<TokenId> unk_;
};

/// Log-probabilities over the vocabulary; logsumexp(values) == 0.
struct LogProbVector {
  Vector values;
};

inline double logsumexp(const Vector& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Max-shifted log-softmax.
inline LogProbVector log_softmax(const Vector& logits) {
  if (logits.empty()) throw ContractViolation("empty logit vector");
  double m = kNegInf;
  for (double x : logits) {
    if (std::isnan(x)) throw ContractViolation("NaN logit");
    if (x == std::numeric_limits<double>::infinity()) {
      throw ContractViolation("+inf logit");
    }
    m = std::max(m, x);
  }
  if (m == kNegInf) throw ContractViolation("every logit is -inf");
  double s = 0.0;
  for (double x : logits) s += std::exp(x - m);
  const double lse = m + std::log(s);
  LogProbVector out{Vector(logits.size())};
  for (std::size_t i = 0; i < logits.size(); ++i) out.values[i] = logits[i] - lse;
  return out;
}

inline LogProbVector logprobs(const LogitProvider& provider, const TokenSeq& context) {
  const auto& vocab = provider.vocab();
  for (auto t : context) {
    if (t >= vocab.size()) throw ArgumentError("context token id outside vocabulary");
  }
  Vector raw = provider.logits(context);
  if (raw.size() != vocab.size()) {
    throw ContractViolation("provider returned " + std::to_string(raw.size()) +
                            " logits for a vocabulary of " + std::to_string(vocab.size()));
  }
  return log_softmax(raw);
}

struct GreedyStrategy {};
struct SampledStrategy {
  std::uint64_t seed = 0;
  double temperature = 1.0;
};

struct DecodingConfig {
  double alpha = 0.0;                  // weight of the prompt vs plain contrast
  double beta = 0.0;                   // weight of the prompt vs negative contrast
  double plausibility_epsilon = 0.1;   // candidate threshold relative to the top token
  double log_prob_floor = -30.0;       // floor on the subtracted log-probs
  std::size_t max_tokens = 64;
  std::variant<GreedyStrategy, SampledStrategy> strategy = GreedyStrategy{};
  std::optional<std::string> eos_token = std::string("</s>");

  void validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ArgumentError("alpha and beta must be >= 0");
    if (!(plausibility_epsilon > 0.0 && plausibility_epsilon <= 1.0)) {
      throw ArgumentError("plausibility epsilon must be in (0, 1]");
    }
    if (const auto* s = std::get_if<SampledStrategy>(&strategy); s && !(s->temperature > 0.0)) {
      throw ArgumentError("sampling temperature must be positive");
    }
  }
};

/// Contrastive combination of the three conditionals:
///
///   C        = { y : p_prompt(y) >= eps * max p_prompt }
///   score(y) = (1 + a + b) lp_prompt(y) - a max(lp_plain(y), floor)
///                                       - b max(lp_neg(y), floor)   for y in C
///   score(y) = -inf                                                 otherwise
///
/// and returns log_softmax(score).
inline Vector contrastive_scores(const LogProbVector& lp_prompt, const LogProbVector& lp_plain,
                                 const LogProbVector& lp_neg, const DecodingConfig& cfg) {
  const auto n = lp_prompt.values.size();
  if (lp_plain.values.size() != n || lp_neg.values.size() != n) {
    throw ContractViolation("log-prob vectors differ in length");
  }
  double top = kNegInf;
  for (double x : lp_prompt.values) top = std::max(top, x);
  const double cutoff = top + std::log(cfg.plausibility_epsilon);
  Vector scores(n, kNegInf);
  for (std::size_t y = 0; y < n; ++y) {
    const double lp = lp_prompt.values[y];
    if (lp == kNegInf || lp < cutoff) continue;
    const double plain = std::max(lp_plain.values[y], cfg.log_prob_floor);
    const double neg = std::max(lp_neg.values[y], cfg.log_prob_floor);
    scores[y] = (1.0 + cfg.alpha + cfg.beta) * lp - cfg.alpha * plain - cfg.beta * neg;
  }
  return scores;
}

inline LogProbVector combine(const LogProbVector& lp_prompt, const LogProbVector& lp_plain,
                             const LogProbVector& lp_neg, const DecodingConfig& cfg) {
  return log_softmax(contrastive_scores(lp_prompt, lp_plain, lp_neg, cfg));
}

/// The three conditioning contexts plus everything emitted so far.
struct GenerationState {
  TokenSeq prompt_context;    // (p, x)
  TokenSeq plain_context;     // (x)
  TokenSeq negative_context;  // (s-, x)
  TokenSeq emitted;
  Rng rng{0};

  void append(TokenId t) {
    prompt_context.push_back(t);
    plain_context.push_back(t);
    negative_context.push_back(t);
    emitted.push_back(t);
  }
};

struct StepDiagnostics {
  TokenId token = 0;
  std::string token_text;
  double lp_prompt = 0.0;
  double lp_plain = 0.0;
  double lp_negative = 0.0;
  double lp_combined = 0.0;
};

/// Lowest index wins ties.
inline TokenId argmax(const Vector& v) {
  TokenId best = 0;
  for (TokenId i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline TokenId sample_token(const Vector& logp, double temperature, Rng& rng) {
  Vector scaled(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) scaled[i] = logp[i] / temperature;
  const auto p = log_softmax(scaled);
  const double u = rng.uniform01();
  double cum = 0.0;
  TokenId last_live = 0;
  for (TokenId i = 0; i < p.values.size(); ++i) {
    if (p.values[i] == kNegInf) continue;
    last_live = i;
    cum += std::exp(p.values[i]);
    if (u < cum) return i;
  }
  return last_live;
}

/// One decoding step: scores the three contexts, combines them, picks a
/// token and appends it to every context.
inline StepDiagnostics decode_step(GenerationState& state, const LogitProvider& provider,
                                   const DecodingConfig& cfg) {
  const auto lp_prompt = logprobs(provider, state.prompt_context);
  const auto lp_plain = logprobs(provider, state.plain_context);
  const auto lp_neg = logprobs(provider, state.negative_context);
  const auto mixed = combine(lp_prompt, lp_plain, lp_neg, cfg);
  TokenId tok = 0;
  if (const auto* s = std::get_if<SampledStrategy>(&cfg.strategy)) {
    tok = sample_token(mixed.values, s->temperature, state.rng);
  } else {
    tok = argmax(mixed.values);
  }
  state.append(tok);
  return {tok,
          provider.vocab()[tok],
          lp_prompt.values[tok],
          lp_plain.values[tok],
          lp_neg.values[tok],
          mixed.values[tok]};
}

struct TransferResult {
  std::string text;
  TokenSeq tokens;
  std::vector<StepDiagnostics> steps;
  bool stopped_at_eos = false;
};

/// Provider failure part-way through a sequence; carries what was emitted.
class PartialResultError : public Error {
 public:
  PartialResultError(const std::string& what, TransferResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const TransferResult& partial() const { return partial_; }

 private:
  TransferResult partial_;
};

/// Contexts for one transfer: (p, x) is the rendered prompt, (x) is the input
/// block alone, and (s-, x) is the negative sample followed by the input block.
inline GenerationState initial_state(const Tokenizer& tok, const SynthesizedPrompt& prompt,
                                     const NegativeSample& negative, const DecodingConfig& cfg) {
  GenerationState st;
  st.prompt_context = tok.encode(prompt.rendered);
  st.plain_context = tok.encode(prompt.input_block());
  st.negative_context = tok.encode(negative.text + "\n\n" + prompt.input_block());
  if (const auto* s = std::get_if<SampledStrategy>(&cfg.strategy)) st.rng = Rng(s->seed);
  return st;
}

/// Decodes from an explicit state until `max_tokens` or the end token.
inline TransferResult generate_from(GenerationState state, const LogitProvider& provider,
                                    const DecodingConfig& cfg) {
  cfg.validate();
  const Tokenizer tok(provider.vocab());
  std::optional<TokenId> eos;
  if (cfg.eos_token) eos = tok.find(*cfg.eos_token);
  TransferResult result;
  while (result.steps.size() < cfg.max_tokens) {
    StepDiagnostics step;
    try {
      step = decode_step(state, provider, cfg);
    } catch (const TransportError& e) {
      result.text = tok.decode(result.tokens);
      throw PartialResultError(std::string("provider failed after ") +
                                   std::to_string(result.tokens.size()) +
                                   " tokens: " + e.what(),
                               std::move(result));
    }
    result.steps.push_back(step);
    if (eos && step.token == *eos) {
      result.stopped_at_eos = true;
      break;
    }
    result.tokens.push_back(step.token);
  }
  result.text = tok.decode(result.tokens);
  return result;
}

inline TransferResult generate(const LogitProvider& provider, const SynthesizedPrompt& prompt,
                               const NegativeSample& negative, const DecodingConfig& cfg) {
  cfg.validate();
  const Tokenizer tok(provider.vocab());
  return generate_from(initial_state(tok, prompt, negative, cfg), provider, cfg);
}

}  // namespace tstkit

#endif  // TSTKIT_DECODER_HPP
