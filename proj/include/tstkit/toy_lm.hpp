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

#ifndef TSTKIT_TOY_LM_HPP
#define TSTKIT_TOY_LM_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tstkit/common.hpp"
#include "tstkit/decoder.hpp"

namespace tstkit {

/// Bigram language model: the next-token distribution depends only on the
/// last context token, with a dedicated row for the empty context.
class ToyBigramProvider final : public LogitProvider {
 public:
  using Row = std::vector<double>;

  ToyBigramProvider(std::vector<std::string> vocab, Row start_row,
                    std::map<std::string, Row> rows)
      : vocab_(std::move(vocab)), start_(std::move(start_row)) {
    std::unordered_map<std::string, TokenId> ids;
    for (TokenId i = 0; i < vocab_.size(); ++i) {
      if (!ids.emplace(vocab_[i], i).second) {
        throw ArgumentError("duplicate vocabulary entry '" + vocab_[i] + "'");
      }
    }
    check_row(start_, "<start>");
    rows_.resize(vocab_.size());
    for (auto& [tok, row] : rows) {
      auto it = ids.find(tok);
      if (it == ids.end()) throw ArgumentError("row for unknown token '" + tok + "'");
      check_row(row, tok);
      rows_[it->second] = std::move(row);
    }
  }

  /// Rows are sparse maps token -> probability; missing entries are zero.
  static ToyBigramProvider from_json(const nlohmann::json& j) {
    try {
      auto vocab = j.at("vocab").get<std::vector<std::string>>();
      std::unordered_map<std::string, std::size_t> ids;
      for (std::size_t i = 0; i < vocab.size(); ++i) ids.emplace(vocab[i], i);
      auto dense = [&](const nlohmann::json& sparse, const std::string& owner) {
        Row row(vocab.size(), 0.0);
        for (const auto& [tok, p] : sparse.items()) {
          auto it = ids.find(tok);
          if (it == ids.end()) {
            throw ArgumentError("row '" + owner + "' mentions unknown token '" + tok + "'");
          }
          row[it->second] = p.get<double>();
        }
        return row;
      };
      Row start = dense(j.at("start"), "<start>");
      std::map<std::string, Row> rows;
      for (const auto& [tok, sparse] : j.at("rows").items()) rows[tok] = dense(sparse, tok);
      return ToyBigramProvider(std::move(vocab), std::move(start), std::move(rows));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bigram table: ") + e.what());
    }
  }

  const std::vector<std::string>& vocab() const override { return vocab_; }

  const Row& row_for(const TokenSeq& context) const {
    if (context.empty()) return start_;
    const TokenId last = context.back();
    if (last >= rows_.size() || rows_[last].empty()) {
      throw ArgumentError("no bigram row for token '" +
                          (last < vocab_.size() ? vocab_[last] : std::to_string(last)) + "'");
    }
    return rows_[last];
  }

  Vector logits(const TokenSeq& context) const override {
    const Row& row = row_for(context);
    Vector out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] > 0.0 ? std::log(row[i]) : kNegInf;
    return out;
  }

 private:
  void check_row(const Row& row, const std::string& owner) const {
    if (row.size() != vocab_.size()) {
      throw ArgumentError("row '" + owner + "' has wrong length");
    }
    double s = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw ArgumentError("row '" + owner + "' has a negative entry");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw ArgumentError("row '" + owner + "' sums to " + std::to_string(s));
    }
  }

  std::vector<std::string> vocab_;
  Row start_;
  std::vector<Row> rows_;
};

/// Bigram model interpolated with a unigram cache over the context:
///   p(y | ctx) = (1 - w) * bigram(y | last) + w * count_ctx(y) / |ctx|,
/// where tokens listed in `uncached` are ignored by the cache. Words that
/// occur in the conditioning text become more likely, so the prompt, plain
/// and negative contexts produce genuinely different distributions.
class CacheBigramProvider final : public LogitProvider {
 public:
  CacheBigramProvider(ToyBigramProvider base, double cache_weight,
                      std::set<std::string> uncached = {"<unk>"})
      : base_(std::move(base)), weight_(cache_weight) {
    if (!(weight_ >= 0.0 && weight_ <= 1.0)) throw ArgumentError("cache weight must be in [0, 1]");
    const auto& v = base_.vocab();
    skip_.assign(v.size(), false);
    for (TokenId i = 0; i < v.size(); ++i) skip_[i] = uncached.count(v[i]) > 0;
  }

  const std::vector<std::string>& vocab() const override { return base_.vocab(); }

  Vector logits(const TokenSeq& context) const override {
    const auto& row = base_.row_for(context);
    Vector counts(row.size(), 0.0);
    double total = 0.0;
    for (auto t : context) {
      if (t < skip_.size() && !skip_[t]) {
        counts[t] += 1.0;
        total += 1.0;
      }
    }
    Vector out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double p = total > 0.0 ? (1.0 - weight_) * row[i] + weight_ * counts[i] / total : row[i];
      out[i] = p > 0.0 ? std::log(p) : kNegInf;
    }
    return out;
  }

 private:
  ToyBigramProvider base_;
  double weight_;
  std::vector<bool> skip_;
};

/// Loads `{"vocab", "start", "rows", "cache_weight"?}`; a positive cache
/// weight yields a CacheBigramProvider.
inline std::unique_ptr<LogitProvider> load_toy_provider(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open toy language model " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  auto base = ToyBigramProvider::from_json(j);
  const double w = j.value("cache_weight", 0.0);
  if (w > 0.0) return std::make_unique<CacheBigramProvider>(std::move(base), w);
  return std::make_unique<ToyBigramProvider>(std::move(base));
}

}  // namespace tstkit

#endif  // TSTKIT_TOY_LM_HPP
