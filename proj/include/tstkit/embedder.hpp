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

#ifndef TSTKIT_EMBEDDER_HPP
#define TSTKIT_EMBEDDER_HPP

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tstkit/common.hpp"
#include "tstkit/conllu.hpp"
#include "tstkit/graph_embed.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

/// A (source-style, target-style) demonstration pair.
struct FewShotPair {
  std::string id;
  std::string source;
  std::string target;
  std::string source_style;
  std::string target_style;

  friend bool operator==(const FewShotPair&, const FewShotPair&) = default;
};

/// Embeddings keyed by (graph content hash, model seed, layers, dim).
///
/// On disk: magic "TSTEMB01", u64 entry count, then per entry
/// u64 key, u64 dim, dim little-endian doubles.
class EmbeddingCache {
 public:
  static std::uint64_t key(const DependencyGraph& g, const DgcnModel& m) {
    std::uint64_t h = detail::fnv1a("graph");
    for (const auto& n : g.nodes) {
      h = detail::fnv1a(n, h);
      h = detail::fnv1a(std::string_view("\x1f", 1), h);
    }
    for (const auto& e : g.edges) {
      h = detail::fnv1a(std::to_string(e.head) + ">" + std::to_string(e.dependent) +
                            ":" + e.relation + "\x1e",
                        h);
    }
    h ^= detail::splitmix64(m.seed());
    h = detail::splitmix64(h ^ (m.num_layers() * 0x100000001B3ULL));
    h = detail::splitmix64(h ^ m.dim());
    return h;
  }

  std::optional<Vector> find(std::uint64_t k) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    ++hits_;
    return it->second;
  }

  void insert(std::uint64_t k, Vector v) {
    std::lock_guard lock(mu_);
    entries_.insert_or_assign(k, std::move(v));
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  std::size_t hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }

  void save(const std::string& path) const {
    std::lock_guard lock(mu_);
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write embedding cache " + tmp);
      out.write("TSTEMB01", 8);
      write_u64(out, entries_.size());
      std::vector<std::uint64_t> keys;
      for (const auto& [k, v] : entries_) keys.push_back(k);
      std::sort(keys.begin(), keys.end());
      for (auto k : keys) {
        const auto& v = entries_.at(k);
        write_u64(out, k);
        write_u64(out, v.size());
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
      }
      if (!out) throw Error("failed writing embedding cache " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
      throw Error("cannot move embedding cache into place: " + path);
    }
  }

  /// Merges the entries stored at `path`; a missing file is not an error.
  void load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "TSTEMB01", 8) != 0) {
      throw ParseError("not an embedding cache: " + path);
    }
    const std::uint64_t n = read_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint64_t k = read_u64(in);
      const std::uint64_t d = read_u64(in);
      if (d > (1u << 20)) throw ParseError("corrupt embedding cache: " + path);
      Vector v(d);
      in.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(d * sizeof(double)));
      if (!in) throw ParseError("truncated embedding cache: " + path);
      std::lock_guard lock(mu_);
      entries_.insert_or_assign(k, std::move(v));
    }
  }

 private:
  static void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  static std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ParseError("truncated embedding cache");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, Vector> entries_;
  mutable std::size_t hits_ = 0;
};

/// Resolves raw sentences to dependency graphs and embeds them with one
/// model. The cache, when attached, is consulted before every forward pass.
class Embedder {
 public:
  Embedder(const DgcnModel& model, const GraphStore& graphs,
           EmbeddingCache* cache = nullptr)
      : model_(&model), graphs_(&graphs), cache_(cache) {}

  const DgcnModel& model() const { return *model_; }

  SentenceEmbedding embed_graph(const DependencyGraph& g) const {
    if (!cache_) return embed_sentence(g, *model_);
    const auto k = EmbeddingCache::key(g, *model_);
    if (auto hit = cache_->find(k)) return {std::move(*hit), g.sentence_id};
    auto e = embed_sentence(g, *model_);
    cache_->insert(k, e.values);
    return e;
  }

  SentenceEmbedding embed_sentence_text(std::string_view sentence,
                                        const std::string& id = {}) const {
    return embed_graph(graphs_->resolve(sentence, id));
  }

  /// Pair sides are looked up under the ids "<pair id>:source" and
  /// "<pair id>:target" before falling back to text matching.
  SentenceEmbedding embed_pair(const FewShotPair& pair) const {
    auto side = [&](const std::string& txt, const char* name) {
      try {
        return embed_sentence_text(txt, pair.id.empty() ? "" : pair.id + ":" + name);
      } catch (const Error& e) {
        throw ParseError("pair '" + pair.id + "' " + name + " side: " + e.what());
      }
    };
    return mean_embedding({side(pair.source, "source"), side(pair.target, "target")},
                          pair.id);
  }

  /// Mean of per-sentence embeddings; sentences without tokens are skipped.
  SentenceEmbedding embed_text(std::string_view passage, std::string id = {}) const {
    std::vector<SentenceEmbedding> parts;
    for (const auto& s : text::split_sentences(passage)) {
      if (text::word_tokens(s).empty()) continue;
      parts.push_back(embed_sentence_text(s));
    }
    if (parts.empty()) throw ParseError("text has no parseable sentences");
    return mean_embedding(parts, std::move(id));
  }

 private:
  const DgcnModel* model_;
  const GraphStore* graphs_;
  EmbeddingCache* cache_;
};

}  // namespace tstkit

#endif  // TSTKIT_EMBEDDER_HPP
