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

#ifndef TSTKIT_GRAPH_EMBED_HPP
#define TSTKIT_GRAPH_EMBED_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "tstkit/common.hpp"
#include "tstkit/conllu.hpp"
#include "tstkit/rng.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

/// Dense row-major matrix, one row per graph node.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct SentenceEmbedding {
  Vector values;
  std::string source_id;
};

// ---------------------------------------------------------------------------
// Initial node features
// ---------------------------------------------------------------------------

/// Seeded token-keyed initializer. For token t (lowercased), seed s, and
/// component j:
///
///   base = fnv1a64(t) ^ splitmix64(s)
///   v[j] = 2 * ((splitmix64(base + j) >> 11) * 2^-53) - 1
///
/// so every entry lies in [-1, 1).
inline Vector hash_features(std::string_view token, std::uint64_t seed,
                            std::size_t dim) {
  const std::uint64_t base =
      detail::fnv1a(text::lowercase(token)) ^ detail::splitmix64(seed);
  Vector v(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const std::uint64_t x = detail::splitmix64(base + j);
    v[j] = 2.0 * (static_cast<double>(x >> 11) * 0x1.0p-53) - 1.0;
  }
  return v;
}

using WordVectorTable = std::unordered_map<std::string, Vector>;

/// Reads `token v1 ... vd` lines. Every vector must have `dim` components.
inline WordVectorTable read_word_vectors(std::istream& in, std::size_t dim) {
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = text::split_whitespace(line);
    if (toks.empty()) continue;
    if (toks.size() != dim + 1) {
      throw ParseError("word vector must have " + std::to_string(dim) +
                           " components",
                       line_no);
    }
    Vector v(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      try {
        std::size_t used = 0;
        v[j] = std::stod(toks[j + 1], &used);
        if (used != toks[j + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("bad decimal '" + toks[j + 1] + "'", line_no);
      }
      if (!std::isfinite(v[j])) throw ParseError("non-finite component", line_no);
    }
    table[toks[0]] = std::move(v);
  }
  return table;
}

/// Word-vector table lookup with the hash initializer as fallback.
class FeatureSource {
 public:
  FeatureSource(std::uint64_t seed, std::size_t dim,
                std::shared_ptr<const WordVectorTable> table = nullptr)
      : seed_(seed), dim_(dim), table_(std::move(table)) {}

  std::size_t dim() const { return dim_; }

  Vector features(const std::string& token) const {
    if (table_) {
      if (auto it = table_->find(token); it != table_->end()) return it->second;
      if (auto it = table_->find(text::lowercase(token)); it != table_->end()) {
        return it->second;
      }
    }
    return hash_features(token, seed_, dim_);
  }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  std::shared_ptr<const WordVectorTable> table_;
};

inline FeatureMatrix init_node_features(const DependencyGraph& graph,
                                        const FeatureSource& source) {
  FeatureMatrix h(graph.nodes.size(), source.dim());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Vector v = source.features(graph.nodes[i]);
    std::copy(v.begin(), v.end(), h.row(i));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Relations and parameters
// ---------------------------------------------------------------------------

/// Relation label -> id. Holds "self", "unk", the universal dependency
/// relations, and a "rev:<label>" inverse for each of them.
class RelationVocab {
 public:
  static constexpr const char* kSelf = "self";
  static constexpr const char* kUnk = "unk";

  RelationVocab() = default;

  static RelationVocab universal() {
    static const char* kLabels[] = {
        "acl",       "advcl",    "advmod",     "amod",     "appos",
        "aux",       "case",     "cc",         "ccomp",    "clf",
        "compound",  "conj",     "cop",        "csubj",    "dep",
        "det",       "discourse", "dislocated", "expl",    "fixed",
        "flat",      "goeswith", "iobj",       "list",     "mark",
        "nmod",      "nsubj",    "nummod",     "obj",      "obl",
        "orphan",    "parataxis", "punct",     "reparandum", "root",
        "vocative",  "xcomp"};
    std::vector<std::string> labels(std::begin(kLabels), std::end(kLabels));
    return from_labels(labels);
  }

  static RelationVocab from_labels(const std::vector<std::string>& labels) {
    RelationVocab v;
    v.insert(kSelf);
    v.insert(kUnk);
    for (const auto& l : labels) {
      v.insert(l);
      v.insert("rev:" + l);
    }
    return v;
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t self_id() const { return ids_.at(kSelf); }

  /// Exact label, then the label without its ":subtype", then "unk".
  std::size_t id(const std::string& label) const {
    if (auto it = ids_.find(label); it != ids_.end()) return it->second;
    const bool inverse = label.rfind("rev:", 0) == 0;
    const std::string bare = inverse ? label.substr(4) : label;
    const std::string base = bare.substr(0, bare.find(':'));
    if (auto it = ids_.find(inverse ? "rev:" + base : base); it != ids_.end()) {
      return it->second;
    }
    return ids_.at(kUnk);
  }

  std::size_t inverse_id(const std::string& label) const {
    return id("rev:" + label);
  }

 private:
  void insert(const std::string& label) {
    if (ids_.emplace(label, names_.size()).second) names_.push_back(label);
  }

  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
};

/// W_r (dim x dim, row-major), b_r, gate weights and gate bias for one relation.
struct RelationParams {
  std::vector<double> weight;
  Vector bias;
  Vector gate_weight;
  double gate_bias = 0.0;
};

struct LayerParams {
  std::vector<RelationParams> relations;  // indexed by relation id
};

/// Per-node incoming arcs after adding a "self" loop for every node and a
/// "rev:<label>" arc for every dependency.
struct AugmentedGraph {
  struct InEdge {
    std::size_t source;
    std::size_t relation;
  };
  std::vector<std::vector<InEdge>> in_edges;
};

inline AugmentedGraph augment(const DependencyGraph& g, const RelationVocab& vocab) {
  AugmentedGraph a;
  a.in_edges.resize(g.nodes.size());
  const std::size_t self = vocab.self_id();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) a.in_edges[i].push_back({i, self});
  for (const auto& e : g.edges) {
    a.in_edges[e.dependent].push_back({e.head, vocab.id(e.relation)});
    a.in_edges[e.head].push_back({e.dependent, vocab.inverse_id(e.relation)});
  }
  return a;
}

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// One gated graph convolution:
///   h_i' = ReLU( sum_{j in N(i)} g_ij * (W_r h_j + b_r) ),
///   g_ij = sigmoid(gate_r . h_i + gate_bias_r),
/// where r is the relation on the augmented arc j -> i.
inline FeatureMatrix dgcn_layer(const FeatureMatrix& features,
                                const AugmentedGraph& graph,
                                const LayerParams& layer) {
  if (features.rows != graph.in_edges.size()) {
    throw ContractViolation("feature rows do not match graph nodes");
  }
  const std::size_t d = features.cols;
  FeatureMatrix out(features.rows, d);
  Vector msg(d);
  for (std::size_t i = 0; i < features.rows; ++i) {
    const double* hi = features.row(i);
    double* oi = out.row(i);
    for (const auto& e : graph.in_edges[i]) {
      if (e.relation >= layer.relations.size()) {
        throw ContractViolation("relation id outside layer parameters");
      }
      const RelationParams& p = layer.relations[e.relation];
      if (p.bias.size() != d || p.gate_weight.size() != d || p.weight.size() != d * d) {
        throw ContractViolation("layer parameters do not match feature dim " +
                                std::to_string(d));
      }
      double z = p.gate_bias;
      for (std::size_t c = 0; c < d; ++c) z += p.gate_weight[c] * hi[c];
      const double gate = sigmoid(z);
      const double* hj = features.row(e.source);
      for (std::size_t r = 0; r < d; ++r) {
        const double* w = p.weight.data() + r * d;
        double acc = p.bias[r];
        for (std::size_t c = 0; c < d; ++c) acc += w[c] * hj[c];
        oi[r] += gate * acc;
      }
    }
    for (std::size_t r = 0; r < d; ++r) oi[r] = std::max(0.0, oi[r]);
  }
  return out;
}

/// Stack of gated relational graph convolutions plus the node feature source.
/// Immutable after construction; safe to share across threads.
class DgcnModel {
 public:
  DgcnModel(std::size_t num_layers, std::size_t dim, std::uint64_t seed,
            RelationVocab vocab, std::vector<LayerParams> layers,
            std::shared_ptr<const WordVectorTable> word_vectors = nullptr)
      : num_layers_(num_layers),
        dim_(dim),
        seed_(seed),
        vocab_(std::move(vocab)),
        layers_(std::move(layers)),
        word_vectors_(std::move(word_vectors)) {
    if (dim_ == 0) throw ArgumentError("model dim must be >= 1");
    if (layers_.size() != num_layers_) {
      throw ArgumentError("layer count does not match parameters");
    }
    for (const auto& layer : layers_) {
      if (layer.relations.size() != vocab_.size()) {
        throw ArgumentError("layer parameters do not cover relation vocabulary");
      }
      for (const auto& p : layer.relations) {
        if (p.weight.size() != dim_ * dim_ || p.bias.size() != dim_ ||
            p.gate_weight.size() != dim_) {
          throw ArgumentError("relation parameters do not match dim");
        }
        auto finite = [](const auto& xs) {
          return std::all_of(xs.begin(), xs.end(),
                             [](double x) { return std::isfinite(x); });
        };
        if (!finite(p.weight) || !finite(p.bias) || !finite(p.gate_weight) ||
            !std::isfinite(p.gate_bias)) {
          throw ArgumentError("model parameters must be finite");
        }
      }
    }
    if (word_vectors_) {
      for (const auto& [tok, v] : *word_vectors_) {
        if (v.size() != dim_) {
          throw ArgumentError("word vector for '" + tok + "' has wrong dim");
        }
      }
    }
  }

  /// Untrained model: every parameter uniform in [-1/sqrt(d), 1/sqrt(d)].
  static DgcnModel random(std::size_t num_layers, std::size_t dim,
                          std::uint64_t seed,
                          RelationVocab vocab = RelationVocab::universal(),
                          std::shared_ptr<const WordVectorTable> word_vectors = nullptr) {
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    auto draw = [&] { return rng.uniform(-scale, scale); };
    std::vector<LayerParams> layers(num_layers);
    for (auto& layer : layers) {
      layer.relations.resize(vocab.size());
      for (auto& p : layer.relations) {
        p.weight.resize(dim * dim);
        for (auto& w : p.weight) w = draw();
        p.bias.resize(dim);
        for (auto& b : p.bias) b = draw();
        p.gate_weight.resize(dim);
        for (auto& g : p.gate_weight) g = draw();
        p.gate_bias = draw();
      }
    }
    return DgcnModel(num_layers, dim, seed, std::move(vocab), std::move(layers),
                     std::move(word_vectors));
  }

  static DgcnModel zeros(std::size_t num_layers, std::size_t dim, std::uint64_t seed,
                         RelationVocab vocab = RelationVocab::universal()) {
    std::vector<LayerParams> layers(num_layers);
    for (auto& layer : layers) {
      layer.relations.assign(vocab.size(),
                             RelationParams{std::vector<double>(dim * dim, 0.0),
                                            Vector(dim, 0.0), Vector(dim, 0.0), 0.0});
    }
    return DgcnModel(num_layers, dim, seed, std::move(vocab), std::move(layers));
  }

  std::size_t num_layers() const { return num_layers_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  const RelationVocab& vocab() const { return vocab_; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  bool has_word_vectors() const { return word_vectors_ != nullptr; }

  FeatureSource feature_source() const { return FeatureSource(seed_, dim_, word_vectors_); }

  DgcnModel with_word_vectors(std::shared_ptr<const WordVectorTable> table) const {
    return DgcnModel(num_layers_, dim_, seed_, vocab_, layers_, std::move(table));
  }

 private:
  std::size_t num_layers_;
  std::size_t dim_;
  std::uint64_t seed_;
  RelationVocab vocab_;
  std::vector<LayerParams> layers_;
  std::shared_ptr<const WordVectorTable> word_vectors_;
};

// Weight files are JSON:
//   {"layers": k, "dim": d, "seed": s, "relations": [labels...],
//    "params": [[{"weight": [...d*d], "bias": [...], "gate_weight": [...],
//                 "gate_bias": x}, ...per relation], ...per layer]}
inline nlohmann::json weights_to_json(const DgcnModel& m) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& layer : m.layers()) {
    nlohmann::json rel = nlohmann::json::array();
    for (const auto& p : layer.relations) {
      rel.push_back({{"weight", p.weight},
                     {"bias", p.bias},
                     {"gate_weight", p.gate_weight},
                     {"gate_bias", p.gate_bias}});
    }
    params.push_back(std::move(rel));
  }
  return {{"layers", m.num_layers()},
          {"dim", m.dim()},
          {"seed", m.seed()},
          {"relations", m.vocab().names()},
          {"params", std::move(params)}};
}

inline DgcnModel weights_from_json(const nlohmann::json& j) {
  try {
    const auto names = j.at("relations").get<std::vector<std::string>>();
    std::vector<std::string> base;
    for (const auto& n : names) {
      if (n != RelationVocab::kSelf && n != RelationVocab::kUnk && n.rfind("rev:", 0) != 0) {
        base.push_back(n);
      }
    }
    RelationVocab vocab = RelationVocab::from_labels(base);
    if (vocab.names() != names) {
      throw ParseError("relation list must be self, unk, then label/rev:label pairs");
    }
    std::vector<LayerParams> layers;
    for (const auto& jl : j.at("params")) {
      LayerParams layer;
      for (const auto& jr : jl) {
        layer.relations.push_back({jr.at("weight").get<std::vector<double>>(),
                                   jr.at("bias").get<Vector>(),
                                   jr.at("gate_weight").get<Vector>(),
                                   jr.at("gate_bias").get<double>()});
      }
      layers.push_back(std::move(layer));
    }
    return DgcnModel(j.at("layers").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                     j.at("seed").get<std::uint64_t>(), std::move(vocab), std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weight file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

inline SentenceEmbedding embed_sentence(const DependencyGraph& graph,
                                        const DgcnModel& model) {
  graph.validate();
  const AugmentedGraph aug = augment(graph, model.vocab());
  FeatureMatrix h = init_node_features(graph, model.feature_source());
  for (const auto& layer : model.layers()) h = dgcn_layer(h, aug, layer);
  Vector mean(model.dim(), 0.0);
  for (std::size_t i = 0; i < h.rows; ++i) {
    for (std::size_t c = 0; c < h.cols; ++c) mean[c] += h(i, c);
  }
  for (auto& x : mean) x /= static_cast<double>(h.rows);
  return {std::move(mean), graph.sentence_id};
}

inline SentenceEmbedding mean_embedding(const std::vector<SentenceEmbedding>& parts,
                                        std::string source_id = {}) {
  if (parts.empty()) throw ArgumentError("mean of zero embeddings");
  Vector mean(parts.front().values.size(), 0.0);
  for (const auto& p : parts) {
    if (p.values.size() != mean.size()) throw ContractViolation("embedding dim mismatch");
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += p.values[c];
  }
  for (auto& x : mean) x /= static_cast<double>(parts.size());
  return {std::move(mean), std::move(source_id)};
}

/// Element-wise mean of the source and target sentence embeddings.
inline SentenceEmbedding embed_pair(const DependencyGraph& source,
                                    const DependencyGraph& target,
                                    const DgcnModel& model, std::string pair_id = {}) {
  return mean_embedding({embed_sentence(source, model), embed_sentence(target, model)},
                        std::move(pair_id));
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("cosine of vectors with different dims (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine_similarity(const SentenceEmbedding& a, const SentenceEmbedding& b) {
  return cosine_similarity(std::span<const double>(a.values),
                           std::span<const double>(b.values));
}

}  // namespace tstkit

#endif  // TSTKIT_GRAPH_EMBED_HPP
