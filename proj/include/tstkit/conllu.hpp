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

#ifndef TSTKIT_CONLLU_HPP
#define TSTKIT_CONLLU_HPP

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tstkit/common.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

struct DependencyEdge {
  std::size_t head = 0;
  std::size_t dependent = 0;
  std::string relation;

  friend bool operator==(const DependencyEdge&, const DependencyEdge&) = default;
};

/// Word nodes of one sentence plus its labeled head->dependent arcs.
struct DependencyGraph {
  std::vector<std::string> nodes;
  std::vector<DependencyEdge> edges;
  std::string sentence_id;
  std::string text;  // "# text =" comment when present

  /// Throws ContractViolation when indices are out of range, a triple is
  /// duplicated, or the graph has no nodes.
  void validate() const {
    if (nodes.empty()) throw ContractViolation("dependency graph has no nodes");
    std::set<std::tuple<std::size_t, std::size_t, std::string>> seen;
    for (const auto& e : edges) {
      if (e.head >= nodes.size() || e.dependent >= nodes.size()) {
        throw ContractViolation("edge index out of range in sentence '" +
                                sentence_id + "'");
      }
      if (!seen.emplace(e.head, e.dependent, e.relation).second) {
        throw ContractViolation("duplicate edge in sentence '" + sentence_id +
                                "'");
      }
    }
  }
};

namespace detail {

inline std::optional<long> parse_long(std::string_view s) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string_view comment_value(std::string_view line,
                                      std::string_view key) {
  // "# key = value"
  std::string_view rest = line.substr(1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  if (rest.substr(0, key.size()) != key) return {};
  rest.remove_prefix(key.size());
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  if (rest.empty() || rest.front() != '=') return {};
  rest.remove_prefix(1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  return rest;
}

}  // namespace detail

/// Reads CoNLL-U text. Multiword-token ranges ("1-2") and empty nodes ("1.1")
/// are skipped; every other row must carry consecutive integer IDs.
inline std::vector<DependencyGraph> read_conllu(std::string_view input) {
  std::vector<DependencyGraph> graphs;
  DependencyGraph cur;
  std::vector<std::pair<long, std::size_t>> heads;  // (head, line) per token
  std::vector<std::string> rels;
  bool open = false;

  auto finish = [&] {
    if (!open) return;
    if (cur.nodes.empty()) {
      // comment-only block
      cur = DependencyGraph{};
      open = false;
      return;
    }
    for (std::size_t i = 0; i < heads.size(); ++i) {
      const auto [head, line] = heads[i];
      if (head < 0 || static_cast<std::size_t>(head) > cur.nodes.size()) {
        throw ParseError("HEAD out of range", line);
      }
      if (head == 0) continue;
      cur.edges.push_back({static_cast<std::size_t>(head - 1), i, rels[i]});
    }
    if (cur.sentence_id.empty()) {
      cur.sentence_id = std::to_string(graphs.size());
    }
    graphs.push_back(std::move(cur));
    cur = DependencyGraph{};
    heads.clear();
    rels.clear();
    open = false;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= input.size()) {
    std::size_t end = input.find('\n', pos);
    if (end == std::string_view::npos) end = input.size();
    std::string_view line = input.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const bool last = end == input.size();
    pos = end + 1;

    if (text::trim(line).empty()) {
      finish();
      if (last) break;
      continue;
    }
    if (line.front() == '#') {
      open = true;
      if (auto v = detail::comment_value(line, "sent_id"); !v.empty()) {
        cur.sentence_id = std::string(v);
      } else if (auto t = detail::comment_value(line, "text"); !t.empty()) {
        cur.text = std::string(t);
      }
      if (last) break;
      continue;
    }

    auto cols = text::split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       line_no);
    }
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      if (last) break;
      continue;
    }
    auto id_val = detail::parse_long(id);
    if (!id_val) throw ParseError("non-integer ID '" + id + "'", line_no);
    auto head_val = detail::parse_long(cols[6]);
    if (!head_val) {
      throw ParseError("non-integer HEAD '" + cols[6] + "'", line_no);
    }
    open = true;
    if (*id_val != static_cast<long>(cur.nodes.size()) + 1) {
      throw ParseError("token IDs must be consecutive from 1", line_no);
    }
    cur.nodes.push_back(cols[1]);
    heads.emplace_back(*head_val, line_no);
    rels.push_back(cols[7]);
    if (last) break;
  }
  finish();
  return graphs;
}

/// Lowercased, punctuation-split token sequence joined by single spaces.
/// Used to match raw sentences against parsed ones.
inline std::string normalize_sentence(std::string_view s) {
  std::string out;
  for (const auto& t : text::word_tokens(s)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

/// Parse used when no dependency analysis is available: every token is a
/// dependent of the first token with relation "dep".
inline DependencyGraph flat_graph(std::string_view sentence,
                                  std::string sentence_id = {}) {
  DependencyGraph g;
  g.nodes = text::word_tokens(sentence);
  if (g.nodes.empty()) throw ParseError("sentence has no tokens");
  for (std::size_t i = 1; i < g.nodes.size(); ++i) {
    g.edges.push_back({0, i, "dep"});
  }
  g.sentence_id = std::move(sentence_id);
  g.text = std::string(sentence);
  return g;
}

/// Parsed sentences indexed by sentence id and by normalized text.
class GraphStore {
 public:
  void add(DependencyGraph g) {
    std::string key = normalize_sentence(g.text.empty() ? join_nodes(g) : g.text);
    const std::size_t idx = graphs_.size();
    if (!g.sentence_id.empty()) by_id_.emplace(g.sentence_id, idx);
    by_text_.emplace(std::move(key), idx);
    graphs_.push_back(std::move(g));
  }

  void add_conllu(std::string_view conllu) {
    for (auto& g : read_conllu(conllu)) add(std::move(g));
  }

  std::size_t size() const { return graphs_.size(); }

  const DependencyGraph* find_id(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &graphs_[it->second];
  }

  const DependencyGraph* find_text(std::string_view sentence) const {
    auto it = by_text_.find(normalize_sentence(sentence));
    return it == by_text_.end() ? nullptr : &graphs_[it->second];
  }

  /// Id match, then text match, then the flat fallback parse.
  DependencyGraph resolve(std::string_view sentence,
                          const std::string& id = {}) const {
    if (!id.empty()) {
      if (const auto* g = find_id(id)) return *g;
    }
    if (const auto* g = find_text(sentence)) return *g;
    return flat_graph(sentence, id);
  }

 private:
  static std::string join_nodes(const DependencyGraph& g) {
    std::string s;
    for (const auto& n : g.nodes) {
      if (!s.empty()) s.push_back(' ');
      s += n;
    }
    return s;
  }

  std::vector<DependencyGraph> graphs_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_text_;
};

}  // namespace tstkit

#endif  // TSTKIT_CONLLU_HPP
