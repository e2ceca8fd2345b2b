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

#ifndef TSTKIT_EVAL_HPP
#define TSTKIT_EVAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tstkit/common.hpp"
#include "tstkit/decoder.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

inline constexpr int kBleuOrder = 4;
inline constexpr double kBleuSmoothing = 0.1;

/// Sufficient statistics; corpus BLEU sums these over items.
struct BleuStats {
  std::array<double, kBleuOrder> matches{};
  std::array<double, kBleuOrder> totals{};
  double candidate_length = 0.0;
  double reference_length = 0.0;

  BleuStats& operator+=(const BleuStats& o) {
    for (int n = 0; n < kBleuOrder; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    candidate_length += o.candidate_length;
    reference_length += o.reference_length;
    return *this;
  }
};

namespace detail {

using NgramCounts = std::map<std::vector<std::string>, int>;

inline NgramCounts count_ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

}  // namespace detail

/// Lowercased, punctuation-split tokens for BLEU.
inline std::vector<std::string> bleu_tokens(std::string_view s) { return text::word_tokens(s); }

/// Clipped n-gram matches against the references; the reference length is
/// the one closest to the candidate length (shorter wins ties).
inline BleuStats bleu_stats(std::string_view candidate, const std::vector<std::string>& references) {
  if (references.empty()) throw ArgumentError("BLEU needs at least one reference");
  const auto cand = bleu_tokens(candidate);
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(bleu_tokens(r));

  BleuStats st;
  st.candidate_length = static_cast<double>(cand.size());
  std::size_t best_len = refs.front().size();
  for (const auto& r : refs) {
    const auto diff = [&](std::size_t len) {
      return len > cand.size() ? len - cand.size() : cand.size() - len;
    };
    if (diff(r.size()) < diff(best_len) || (diff(r.size()) == diff(best_len) && r.size() < best_len)) {
      best_len = r.size();
    }
  }
  st.reference_length = static_cast<double>(best_len);

  for (int n = 1; n <= kBleuOrder; ++n) {
    const auto cand_counts = detail::count_ngrams(cand, static_cast<std::size_t>(n));
    detail::NgramCounts max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : detail::count_ngrams(r, static_cast<std::size_t>(n))) {
        max_ref[g] = std::max(max_ref[g], c);
      }
    }
    double matched = 0.0, total = 0.0;
    for (const auto& [g, c] : cand_counts) {
      total += c;
      if (auto it = max_ref.find(g); it != max_ref.end()) matched += std::min(c, it->second);
    }
    st.matches[static_cast<std::size_t>(n - 1)] = matched;
    st.totals[static_cast<std::size_t>(n - 1)] = total;
  }
  return st;
}

/// BLEU-4 from statistics, in [0, 100].
///
/// Orders with no candidate n-grams are left out of the geometric mean. An
/// order with zero matches uses 0.1 / total as its precision. A candidate with
/// no unigram match scores 0. The brevity penalty is exp(1 - r/c) when c < r.
inline double bleu_from_stats(const BleuStats& st) {
  if (st.candidate_length <= 0.0 || st.matches[0] <= 0.0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    if (st.totals[n] <= 0.0) break;
    const double num = st.matches[n] > 0.0 ? st.matches[n] : kBleuSmoothing;
    log_sum += std::log(num / st.totals[n]);
    ++orders;
  }
  const double bp = st.candidate_length < st.reference_length
                        ? std::exp(1.0 - st.reference_length / st.candidate_length)
                        : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

inline double bleu(std::string_view candidate, const std::vector<std::string>& references) {
  if (references.empty()) throw ArgumentError("BLEU needs at least one reference");
  if (bleu_tokens(candidate).empty()) return 0.0;
  return bleu_from_stats(bleu_stats(candidate, references));
}

inline double corpus_bleu(const std::vector<std::string>& outputs,
                          const std::vector<std::string>& references) {
  if (outputs.size() != references.size()) {
    throw ArgumentError("corpus BLEU: " + std::to_string(outputs.size()) + " outputs vs " +
                        std::to_string(references.size()) + " references");
  }
  BleuStats total;
  for (std::size_t i = 0; i < outputs.size(); ++i) total += bleu_stats(outputs[i], {references[i]});
  return bleu_from_stats(total);
}

struct BleuPair {
  double s_sbleu = 0.0;  // against the sources
  double r_sbleu = 0.0;  // against the human references
};

inline BleuPair corpus_bleu_pair(const std::vector<std::string>& outputs,
                                 const std::vector<std::string>& sources,
                                 const std::vector<std::string>& references) {
  return {corpus_bleu(outputs, sources), corpus_bleu(outputs, references)};
}

// ---------------------------------------------------------------------------
// Perplexity
// ---------------------------------------------------------------------------

/// exp of the mean negative log-likelihood of `text` under the provider,
/// scoring every token from the empty context onwards.
inline double perplexity(const LogitProvider& provider, std::string_view text_in) {
  const Tokenizer tok(provider.vocab());
  const TokenSeq ids = tok.encode_strict(text_in);
  if (ids.empty()) throw ArgumentError("perplexity of empty text");
  TokenSeq ctx;
  double nll = 0.0;
  for (auto id : ids) {
    nll -= logprobs(provider, ctx).values[id];
    ctx.push_back(id);
  }
  return std::exp(nll / static_cast<double>(ids.size()));
}

// ---------------------------------------------------------------------------
// Style classification
// ---------------------------------------------------------------------------

struct Classification {
  std::string label;
  double score = 0.0;
};

class StyleClassifier {
 public:
  virtual ~StyleClassifier() = default;
  virtual Classification classify(const std::string& text) const = 0;
};

/// Counts lexicon hits per label; the label with strictly most hits wins,
/// anything else is "unknown".
class LexiconClassifier final : public StyleClassifier {
 public:
  static constexpr const char* kUnknown = "unknown";

  explicit LexiconClassifier(std::map<std::string, std::set<std::string>> lexicon)
      : lexicon_(std::move(lexicon)) {}

  /// One `label: w1 w2 ...` line per label.
  static LexiconClassifier parse(std::istream& in) {
    std::map<std::string, std::set<std::string>> lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw ParseError("lexicon line needs 'label:'", line_no);
      const std::string label = text::trim(std::string_view(line).substr(0, colon));
      if (label.empty()) throw ParseError("empty lexicon label", line_no);
      auto& words = lex[label];
      for (const auto& w : text::split_whitespace(std::string_view(line).substr(colon + 1))) {
        words.insert(text::lowercase(w));
      }
    }
    if (lex.empty()) throw ParseError("lexicon has no labels");
    return LexiconClassifier(std::move(lex));
  }

  static LexiconClassifier load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open lexicon " + path);
    return parse(in);
  }

  Classification classify(const std::string& s) const override {
    const auto toks = text::word_tokens(s);
    std::size_t best = 0, total = 0;
    std::string best_label = kUnknown;
    bool tie = false;
    for (const auto& [label, words] : lexicon_) {
      std::size_t hits = 0;
      for (const auto& t : toks) hits += words.count(t);
      total += hits;
      if (hits > best) {
        best = hits;
        best_label = label;
        tie = false;
      } else if (hits == best && hits > 0) {
        tie = true;
      }
    }
    if (best == 0 || tie) return {kUnknown, 0.0};
    return {best_label, static_cast<double>(best) / static_cast<double>(total)};
  }

 private:
  std::map<std::string, std::set<std::string>> lexicon_;
};

/// Fraction of outputs labelled `target`. A classifier error counts as a miss.
inline double style_accuracy(const StyleClassifier& classifier,
                             const std::vector<std::string>& outputs, const std::string& target) {
  if (outputs.empty()) throw ArgumentError("style accuracy over zero outputs");
  std::size_t hits = 0;
  for (const auto& o : outputs) {
    try {
      if (classifier.classify(o).label == target) ++hits;
    } catch (const std::exception& e) {
      detail::log_warning(std::string("classifier failed, counting as miss: ") + e.what());
    }
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

struct EvalReport {
  double accuracy = 0.0;
  std::optional<double> r_sbleu;
  double s_sbleu = 0.0;
  double ppl = 0.0;
  std::size_t n_items = 0;
};

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = {{"accuracy", r.accuracy},
                      {"s_sbleu", r.s_sbleu},
                      {"ppl", r.ppl},
                      {"n_items", r.n_items}};
  if (r.r_sbleu) j["r_sbleu"] = *r.r_sbleu;
  return j;
}

}  // namespace tstkit

#endif  // TSTKIT_EVAL_HPP
