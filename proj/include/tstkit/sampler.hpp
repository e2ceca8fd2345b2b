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

#ifndef TSTKIT_SAMPLER_HPP
#define TSTKIT_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tstkit/common.hpp"
#include "tstkit/embedder.hpp"
#include "tstkit/rng.hpp"

namespace tstkit {

struct LabeledPoint {
  Vector x;
  std::size_t pair_index = 0;
};

using PointSet = std::vector<LabeledPoint>;

struct ClusterResult {
  std::vector<Vector> centers;
  std::vector<std::size_t> assignments;
  std::vector<std::size_t> representative_indices;
  std::size_t iterations = 0;
};

inline double squared_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace detail {

inline void check_points(const PointSet& points) {
  if (points.empty()) throw ArgumentError("point set is empty");
  const auto d = points.front().x.size();
  for (const auto& p : points) {
    if (p.x.size() != d) throw ArgumentError("points have mixed dimensions");
  }
}

inline std::size_t nearest(const Vector& x, const std::vector<Vector>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double d = squared_distance(x, centers[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace detail

/// k-means++ seeding. Returns indices into `points`: the first uniformly at
/// random, each later one with probability D(x)^2 / sum D^2, where D is the
/// distance to the nearest center chosen so far. If every remaining point
/// coincides with a center the draw falls back to a uniform pick among the
/// points not yet chosen.
inline std::vector<std::size_t> kmeanspp_seed_indices(const PointSet& points,
                                                      std::size_t k, Rng& rng) {
  detail::check_points(points);
  if (k < 1 || k > points.size()) {
    throw ArgumentError("k-means++ needs 1 <= K <= |points| (K=" + std::to_string(k) +
                        ", |points|=" + std::to_string(points.size()) + ")");
  }
  const std::size_t n = points.size();
  std::vector<std::size_t> chosen;
  std::vector<bool> used(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t idx = rng.index(n);
  chosen.push_back(idx);
  used[idx] = true;
  while (chosen.size() < k) {
    const Vector& last = points[chosen.back()].x;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i].x, last));
      total += d2[i];
    }
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double cum = 0.0;
      idx = n;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target && d2[i] > 0.0) {
          idx = i;
          break;
        }
      }
      if (idx == n) {  // rounding at the top end
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            idx = i;
            break;
          }
        }
      }
    } else {
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i]) free.push_back(i);
      }
      idx = free[rng.index(free.size())];
    }
    chosen.push_back(idx);
    used[idx] = true;
  }
  return chosen;
}

inline std::vector<Vector> kmeanspp_seed(const PointSet& points, std::size_t k, Rng& rng) {
  std::vector<Vector> centers;
  for (auto i : kmeanspp_seed_indices(points, k, rng)) centers.push_back(points[i].x);
  return centers;
}

/// Lloyd iterations: assign every point to its nearest center (lowest index
/// on ties), move each center to the mean of its members, and stop once no
/// center moves by `tol` or more (L2) or after `max_iter` updates. A center
/// with no members stays where it is. Assignments in the result are made
/// against the returned centers.
inline ClusterResult lloyd_refine(const PointSet& points, std::vector<Vector> centers,
                                  double tol = 1e-6, std::size_t max_iter = 100) {
  detail::check_points(points);
  if (centers.empty()) throw ArgumentError("no initial centers");
  if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
  const std::size_t dim = points.front().x.size();
  for (const auto& c : centers) {
    if (c.size() != dim) throw ArgumentError("center dimension mismatch");
  }

  ClusterResult result;
  std::vector<std::size_t> assign(points.size());
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      assign[i] = detail::nearest(points[i].x, centers);
    }
    std::vector<Vector> sums(centers.size(), Vector(dim, 0.0));
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[assign[i]];
      for (std::size_t c = 0; c < dim; ++c) s[c] += points[i].x[c];
      ++counts[assign[i]];
    }
    double shift = 0.0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      for (auto& v : sums[k]) v /= static_cast<double>(counts[k]);
      shift = std::max(shift, std::sqrt(squared_distance(sums[k], centers[k])));
      centers[k] = std::move(sums[k]);
    }
    result.iterations = iter + 1;
    if (shift < tol) break;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    assign[i] = detail::nearest(points[i].x, centers);
  }
  result.centers = std::move(centers);
  result.assignments = std::move(assign);
  return result;
}

/// Maps each center, in order, to the pair index of its nearest point not
/// already taken by an earlier center.
inline std::vector<std::size_t> deembed(const std::vector<Vector>& centers,
                                        const PointSet& points) {
  detail::check_points(points);
  if (centers.empty()) throw ArgumentError("no centers to de-embed");
  if (centers.size() > points.size()) {
    throw ArgumentError("more centers than points; representatives cannot be distinct");
  }
  std::vector<bool> taken(points.size(), false);
  std::vector<std::size_t> reps;
  for (const auto& c : centers) {
    std::size_t best = points.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      const double d = squared_distance(points[i].x, c);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    taken[best] = true;
    reps.push_back(points[best].pair_index);
  }
  return reps;
}

struct ClusterOptions {
  double tol = 1e-6;
  std::size_t max_iter = 100;
};

/// Seeding, Lloyd refinement and de-embedding over an embedded point set.
inline ClusterResult cluster_representatives(const PointSet& points, std::size_t k,
                                             Rng& rng, ClusterOptions opt = {}) {
  auto result = lloyd_refine(points, kmeanspp_seed(points, k, rng), opt.tol, opt.max_iter);
  result.representative_indices = deembed(result.centers, points);
  return result;
}

/// Picks K representative pairs from `corpus`, returned in cluster order.
inline std::vector<FewShotPair> select_fewshots(const std::vector<FewShotPair>& corpus,
                                                std::size_t k, const Embedder& embedder,
                                                Rng& rng, ClusterOptions opt = {}) {
  if (k < 1 || k > corpus.size()) {
    throw ArgumentError("need 1 <= K <= corpus size (K=" + std::to_string(k) +
                        ", corpus=" + std::to_string(corpus.size()) + ")");
  }
  PointSet points;
  points.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    points.push_back({embedder.embed_pair(corpus[i]).values, i});
  }
  const auto result = cluster_representatives(points, k, rng, opt);
  std::vector<FewShotPair> out;
  for (auto i : result.representative_indices) out.push_back(corpus[i]);
  return out;
}

}  // namespace tstkit

#endif  // TSTKIT_SAMPLER_HPP
