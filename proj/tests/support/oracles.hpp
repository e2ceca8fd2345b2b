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

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Written without reusing library internals.
#ifndef TSTKIT_TESTS_SUPPORT_ORACLES_HPP
#define TSTKIT_TESTS_SUPPORT_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "tstkit/rng.hpp"
#include "tstkit/sampler.hpp"

namespace oracle {

struct Blobs {
  tstkit::PointSet points;
  std::vector<int> blob;
};

// Four unit-variance blobs at (+-10, +-10); `per_blob` points each.
inline Blobs four_blobs(std::uint64_t seed, std::size_t per_blob = 50, double spread = 1.0) {
  const double cx[] = {-10, 10, -10, 10}, cy[] = {-10, -10, 10, 10};
  tstkit::Rng rng(seed);
  Blobs b;
  for (std::size_t i = 0; i < 4 * per_blob; ++i) {
    const int k = static_cast<int>(i % 4);
    b.points.push_back({{cx[k] + spread * rng.normal(), cy[k] + spread * rng.normal()}, i});
    b.blob.push_back(k);
  }
  return b;
}

// Blob oracle: label by the nearest true blob center.
inline int blob_of(const tstkit::Vector& x) {
  return (x[0] > 0 ? 1 : 0) + (x[1] > 0 ? 2 : 0);
}

struct LloydOut {
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> assign;
};

// Plain Lloyd on a dense distance table.
inline LloydOut lloyd(const tstkit::PointSet& pts, std::vector<std::vector<double>> c,
                      double tol, int max_iter) {
  const std::size_t n = pts.size(), k = c.size(), d = pts[0].x.size();
  std::vector<std::size_t> a(n);
  auto assign_all = [&] {
    std::vector<std::vector<double>> dist(n, std::vector<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double s = 0;
        for (std::size_t t = 0; t < d; ++t) s += (pts[i].x[t] - c[j][t]) * (pts[i].x[t] - c[j][t]);
        dist[i][j] = s;
      }
      a[i] = static_cast<std::size_t>(std::min_element(dist[i].begin(), dist[i].end()) -
                                      dist[i].begin());
    }
  };
  for (int it = 0; it < max_iter; ++it) {
    assign_all();
    double moved = 0;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> m(d, 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] != j) continue;
        for (std::size_t t = 0; t < d; ++t) m[t] += pts[i].x[t];
        ++cnt;
      }
      if (cnt == 0) continue;
      double sh = 0;
      for (std::size_t t = 0; t < d; ++t) {
        m[t] /= static_cast<double>(cnt);
        sh += (m[t] - c[j][t]) * (m[t] - c[j][t]);
      }
      moved = std::max(moved, std::sqrt(sh));
      c[j] = m;
    }
    if (moved < tol) break;
  }
  assign_all();
  return {c, a};
}

// Marginal law of the second k-means++ seed: average over the uniform first
// pick of D^2 / sum D^2.
inline std::vector<double> second_seed_law(const tstkit::PointSet& pts) {
  const std::size_t n = pts.size();
  std::vector<double> law(n, 0.0);
  for (std::size_t f = 0; f < n; ++f) {
    std::vector<double> w(n);
    double tot = 0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = 0;
      for (std::size_t t = 0; t < pts[j].x.size(); ++t) {
        w[j] += std::pow(pts[j].x[t] - pts[f].x[t], 2);
      }
      tot += w[j];
    }
    for (std::size_t j = 0; j < n; ++j) law[j] += w[j] / tot / static_cast<double>(n);
  }
  return law;
}


// Ten-token bigram table with a unigram cache over the context. The oracle
// evaluates it from the string tables, independent of the provider classes.
struct ToyTable {
  std::vector<std::string> vocab;
  std::map<std::string, double> start;
  std::map<std::string, std::map<std::string, double>> rows;
  double cache_weight = 0.0;
  std::vector<std::string> uncached = {"<unk>"};
};

inline ToyTable ten_token_table() {
  ToyTable t;
  t.vocab = {"<unk>", "Output:", "</s>", "the", "food", "was", "good", "great", "bad", "awful"};
  t.start = {{"the", 0.6}, {"food", 0.4}};
  t.rows["<unk>"] = {{"the", .31}, {"food", .21}, {"was", .19}, {"good", .11}, {"bad", .09},
                     {"great", .06}, {"awful", .03}};
  t.rows["Output:"] = {{"the", .47}, {"food", .12}, {"was", .04}, {"good", .11}, {"great", .1},
                       {"bad", .09}, {"awful", .07}};
  t.rows["</s>"] = {{"the", .5}, {"food", .4}, {"good", .04}, {"great", .03}, {"bad", .02},
                    {"awful", .01}};
  t.rows["the"] = {{"food", .7}, {"good", .11}, {"bad", .09}, {"great", .06}, {"awful", .04}};
  t.rows["food"] = {{"was", .8}, {"</s>", .12}, {"the", .08}};
  t.rows["was"] = {{"bad", .35}, {"awful", .14}, {"good", .26}, {"great", .15}, {"</s>", .1}};
  t.rows["good"] =
      {{"</s>", .6}, {"food", .2}, {"the", .14}, {"great", .04}, {"good", .02}};
  t.rows["great"] =
      {{"</s>", .5}, {"food", .28}, {"the", .15}, {"good", .05}, {"great", .02}};
  t.rows["bad"] =
      {{"</s>", .61}, {"food", .2}, {"the", .13}, {"awful", .04}, {"bad", .02}};
  t.rows["awful"] =
      {{"</s>", .52}, {"food", .26}, {"the", .15}, {"bad", .05}, {"awful", .02}};
  t.cache_weight = 0.3;
  return t;
}

inline std::string to_json_text(const ToyTable& t) {
  auto obj = [](const std::map<std::string, double>& m) {
    std::string s = "{";
    for (const auto& [k, v] : m) {
      if (s.size() > 1) s += ",";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      s += "\"" + k + "\":" + buf;
    }
    return s + "}";
  };
  std::string s = "{\"vocab\":[";
  for (std::size_t i = 0; i < t.vocab.size(); ++i) s += (i ? ",\"" : "\"") + t.vocab[i] + "\"";
  s += "],\"start\":" + obj(t.start) + ",\"rows\":{";
  bool first = true;
  for (const auto& [k, row] : t.rows) {
    s += (first ? "\"" : ",\"") + k + "\":" + obj(row);
    first = false;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t.cache_weight);
  return s + "},\"cache_weight\":" + buf + "}";
}

inline std::vector<std::string> words(const std::string& text, const ToyTable& t) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    const bool known = std::find(t.vocab.begin(), t.vocab.end(), cur) != t.vocab.end();
    out.push_back(known ? cur : "<unk>");
    cur.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

inline std::vector<long double> toy_probs(const ToyTable& t, const std::vector<std::string>& ctx) {
  const auto& row = ctx.empty() ? t.start : t.rows.at(ctx.back());
  std::map<std::string, long double> count;
  long double total = 0;
  for (const auto& w : ctx) {
    if (std::find(t.uncached.begin(), t.uncached.end(), w) != t.uncached.end()) continue;
    count[w] += 1;
    total += 1;
  }
  std::vector<long double> p;
  for (const auto& v : t.vocab) {
    const auto it = row.find(v);
    const long double b = it == row.end() ? 0.0L : it->second;
    p.push_back(total > 0 ? (1 - t.cache_weight) * b + t.cache_weight * count[v] / total : b);
  }
  return p;
}

struct ContrastiveOut {
  std::vector<std::string> tokens;
  long double min_margin = 1e300L;  // smallest gap between best and runner-up
};

// Exhaustive per-step evaluation of the contrastive objective over the whole
// vocabulary, greedy selection, lowest index on ties.
template <class ProbFn>
ContrastiveOut contrastive_greedy(ProbFn probs, std::vector<std::string> cp,
                                  std::vector<std::string> cx, std::vector<std::string> cn,
                                  const std::vector<std::string>& vocab, long double alpha,
                                  long double beta, long double eps, long double floor_lp,
                                  int steps) {
  ContrastiveOut out;
  for (int s = 0; s < steps; ++s) {
    const auto pp = probs(cp), px = probs(cx), pn = probs(cn);
    const long double top = *std::max_element(pp.begin(), pp.end());
    std::vector<std::pair<long double, std::size_t>> scored;
    for (std::size_t y = 0; y < vocab.size(); ++y) {
      if (pp[y] <= 0 || pp[y] < eps * top) continue;
      const long double lx = px[y] > 0 ? std::max(std::log(px[y]), floor_lp) : floor_lp;
      const long double ln = pn[y] > 0 ? std::max(std::log(pn[y]), floor_lp) : floor_lp;
      scored.emplace_back((1 + alpha + beta) * std::log(pp[y]) - alpha * lx - beta * ln, y);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scored.size(); ++i) {
      if (scored[i].first > scored[best].first) best = i;
    }
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (i != best) out.min_margin = std::min(out.min_margin, scored[best].first - scored[i].first);
    }
    const std::string& w = vocab[scored[best].second];
    out.tokens.push_back(w);
    cp.push_back(w);
    cx.push_back(w);
    cn.push_back(w);
  }
  return out;
}

}  // namespace oracle

#endif  // TSTKIT_TESTS_SUPPORT_ORACLES_HPP
