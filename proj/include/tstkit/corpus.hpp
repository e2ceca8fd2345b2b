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

#ifndef TSTKIT_CORPUS_HPP
#define TSTKIT_CORPUS_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tstkit/common.hpp"
#include "tstkit/embedder.hpp"
#include "tstkit/text.hpp"

namespace tstkit {

/// One JSONL corpus line: {id?, source, target?, reference?, source_style,
/// target_style}. Records without an id get their 0-based record index.
struct CorpusRecord {
  std::string id;
  std::string source;
  std::optional<std::string> target;
  std::optional<std::string> reference;
  std::string source_style;
  std::string target_style;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

inline nlohmann::json to_json(const CorpusRecord& r) {
  nlohmann::json j = {{"id", r.id},
                      {"source", r.source},
                      {"source_style", r.source_style},
                      {"target_style", r.target_style}};
  if (r.target) j["target"] = *r.target;
  if (r.reference) j["reference"] = *r.reference;
  return j;
}

inline std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& name = "corpus") {
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t line_no = 0;
  auto required = [&](const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw ParseError(name + ": missing string field '" + key + "'", line_no);
    }
    return j[key].get<std::string>();
  };
  auto optional = [&](const nlohmann::json& j, const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw ParseError(name + ": field '" + key + "' must be a string", line_no);
    return j[key].get<std::string>();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(name + ": " + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError(name + ": record must be a JSON object", line_no);
    CorpusRecord r;
    r.source = required(j, "source");
    if (text::trim(r.source).empty()) throw ParseError(name + ": empty 'source'", line_no);
    r.source_style = required(j, "source_style");
    r.target_style = required(j, "target_style");
    r.target = optional(j, "target");
    r.reference = optional(j, "reference");
    r.id = optional(j, "id").value_or(std::to_string(out.size()));
    out.push_back(std::move(r));
  }
  return out;
}

/// Reads a JSONL corpus. An empty file is an error.
inline std::vector<CorpusRecord> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path);
  auto recs = parse_corpus(in, path);
  if (recs.empty()) throw ParseError(path + ": corpus is empty");
  return recs;
}

inline void save_corpus(const std::vector<CorpusRecord>& recs, std::ostream& out) {
  for (const auto& r : recs) out << to_json(r).dump() << '\n';
}

/// Records that carry a target side, as demonstration pairs.
inline std::vector<FewShotPair> to_fewshot_pairs(const std::vector<CorpusRecord>& recs) {
  std::vector<FewShotPair> pairs;
  for (const auto& r : recs) {
    if (!r.target) throw ArgumentError("few-shot record '" + r.id + "' has no target");
    pairs.push_back({r.id, r.source, *r.target, r.source_style, r.target_style});
  }
  return pairs;
}

}  // namespace tstkit

#endif  // TSTKIT_CORPUS_HPP
