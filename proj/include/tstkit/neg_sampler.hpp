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

#ifndef TSTKIT_NEG_SAMPLER_HPP
#define TSTKIT_NEG_SAMPLER_HPP

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tstkit/common.hpp"
#include "tstkit/embedder.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

struct NegativeSample {
  std::string text;
  std::size_t chunk_index = 0;
  double similarity_to_prompt = 0.0;
};

inline const std::vector<std::string>& default_separators() {
  static const std::vector<std::string> kSeps = {"\n\n", "\n", ". ", " "};
  return kSeps;
}

namespace detail {

// Pieces keep their trailing separator so that concatenating them gives the
// original text back.
inline std::vector<std::string> split_keep(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    const auto hit = s.find(sep, start);
    if (hit == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, hit + sep.size() - start));
    start = hit + sep.size();
  }
  return out;
}

inline void split_recursive(std::string_view piece, std::size_t chunk_size,
                            std::span<const std::string> seps,
                            std::vector<std::string>& out) {
  auto emit = [&](std::string_view s) {
    auto t = text::trim(s);
    if (!t.empty()) out.push_back(std::move(t));
  };
  if (text::count_tokens(piece) <= chunk_size) {
    emit(piece);
    return;
  }
  std::size_t used = 0;
  while (used < seps.size() && piece.find(seps[used]) == std::string_view::npos) ++used;
  if (used == seps.size()) {
    emit(piece);  // unbreakable atom
    return;
  }
  const auto rest = seps.subspan(used + 1);
  std::string current;
  for (const auto& part : split_keep(piece, seps[used])) {
    if (text::count_tokens(part) > chunk_size) {
      emit(current);
      current.clear();
      split_recursive(part, chunk_size, rest, out);
    } else if (text::count_tokens(current + part) <= chunk_size) {
      current += part;
    } else {
      emit(current);
      current = part;
    }
  }
  emit(current);
}

}  // namespace detail

/// Recursive splitter: breaks on the first separator present in the text,
/// greedily merges neighbouring pieces while they fit in `chunk_size`
/// whitespace tokens, and recurses with the remaining separators into any
/// piece that is still too long. Chunks are whitespace-trimmed and nonempty.
inline std::vector<std::string> split_chunks(
    std::string_view text_in, std::size_t chunk_size,
    const std::vector<std::string>& separators = default_separators()) {
  if (chunk_size < 1) throw ArgumentError("chunk_size must be >= 1");
  std::vector<std::string> out;
  detail::split_recursive(text_in, chunk_size, std::span<const std::string>(separators), out);
  return out;
}

/// Argmin of cosine similarity to the prompt; lowest index wins ties.
/// Chunks whose embedding is absent (std::nullopt) are skipped.
inline NegativeSample select_negative_embedded(
    const std::vector<std::string>& chunks,
    const std::vector<std::optional<SentenceEmbedding>>& chunk_embeddings,
    const SentenceEmbedding& prompt_embedding) {
  if (chunks.empty()) throw ArgumentError("no chunks to choose a negative sample from");
  if (chunks.size() != chunk_embeddings.size()) {
    throw ArgumentError("chunk and embedding counts differ");
  }
  NegativeSample best;
  double best_sim = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (!chunk_embeddings[i]) continue;
    const double sim = cosine_similarity(*chunk_embeddings[i], prompt_embedding);
    if (sim < best_sim) {
      best_sim = sim;
      best = {chunks[i], i, sim};
      found = true;
    }
  }
  if (!found) throw ParseError("no chunk of the negative context could be parsed");
  return best;
}

inline NegativeSample select_negative(const std::vector<std::string>& chunks,
                                      const SentenceEmbedding& prompt_embedding,
                                      const Embedder& embedder) {
  std::vector<std::optional<SentenceEmbedding>> embs;
  embs.reserve(chunks.size());
  for (const auto& c : chunks) {
    try {
      embs.emplace_back(embedder.embed_text(c));
    } catch (const ParseError&) {
      embs.emplace_back(std::nullopt);
    }
  }
  return select_negative_embedded(chunks, embs, prompt_embedding);
}

}  // namespace tstkit

#endif  // TSTKIT_NEG_SAMPLER_HPP
