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

#ifndef TSTKIT_TUNER_HPP
#define TSTKIT_TUNER_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "json.hpp"
#include "tstkit/common.hpp"
#include "tstkit/eval.hpp"
#include "tstkit/rng.hpp"

namespace tstkit {

struct Interval {
  double lo = 0.0;
  double hi = 10.0;
};

struct SearchBox {
  Interval alpha{0.0, 10.0};
  Interval beta{0.0, 10.0};
  std::size_t budget = 30;

  void validate() const {
    if (!(alpha.lo <= alpha.hi) || !(beta.lo <= beta.hi)) throw ArgumentError("empty search interval");
    if (budget < 1) throw ArgumentError("budget must be >= 1");
  }
};

struct Trial {
  double alpha = 0.0;
  double beta = 0.0;
  double objective_value = 0.0;  // -inf for failed trials
  std::size_t eval_index = 0;
  bool failed = false;
  std::string error;
};

enum class TunerMode { kGaussianProcess, kRandomSearch };

struct TunerOptions {
  TunerMode mode = TunerMode::kGaussianProcess;
  double length_scale = 2.0;
  double noise = 1e-6;
  std::size_t candidates = 256;
  std::size_t local_starts = 8;
  double start_alpha = 5.0;
  double start_beta = 5.0;
};

struct TuneResult {
  Trial best;
  std::vector<Trial> trace;
};

namespace detail {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Zero-mean GP with a unit-variance squared-exponential kernel, fitted to
/// standardized observations.
class GaussianProcess2d {
 public:
  GaussianProcess2d(const std::vector<Eigen::Vector2d>& xs, const std::vector<double>& ys,
                    double length_scale, double noise)
      : xs_(xs), ls2_(length_scale * length_scale) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double var = 0.0;
    for (double y : ys) var += (y - mean) * (y - mean);
    const double sd = ys.size() > 1 ? std::sqrt(var / static_cast<double>(ys.size())) : 0.0;
    y_mean_ = mean;
    y_scale_ = sd > 0.0 ? sd : 1.0;

    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(xs[i], xs[j]);
      k(i, i) += noise;
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = (ys[static_cast<std::size_t>(i)] - y_mean_) / y_scale_;
    llt_.compute(k);
    alpha_ = llt_.solve(y);
  }

  double kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
    return std::exp(-0.5 * (a - b).squaredNorm() / ls2_);
  }

  /// Posterior mean and standard deviation in the original objective units.
  std::pair<double, double> predict(const Eigen::Vector2d& x) const {
    const auto n = static_cast<Eigen::Index>(xs_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(x, xs_[static_cast<std::size_t>(i)]);
    const double mu = ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = std::max(1.0 - v.squaredNorm(), 0.0);
    return {y_mean_ + y_scale_ * mu, y_scale_ * std::sqrt(var)};
  }

  /// Expected improvement over `best` for maximization.
  double expected_improvement(const Eigen::Vector2d& x, double best) const {
    const auto [mu, sd] = predict(x);
    if (sd <= 1e-12) return std::max(mu - best, 0.0);
    const double z = (mu - best) / sd;
    return (mu - best) * normal_cdf(z) + sd * normal_pdf(z);
  }

 private:
  std::vector<Eigen::Vector2d> xs_;
  double ls2_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

inline Eigen::Vector2d clamp_to(const Eigen::Vector2d& x, const SearchBox& box) {
  return {std::clamp(x(0), box.alpha.lo, box.alpha.hi), std::clamp(x(1), box.beta.lo, box.beta.hi)};
}

}  // namespace detail

/// Maximizes `objective` over the box. The first trial is always at the
/// start point; later ones maximize expected improvement under a GP
/// surrogate (random candidates, then compass search from the best few),
/// or are uniform draws in random-search mode. An objective that throws
/// yields a failed trial with value -inf and the search continues.
inline TuneResult optimize(const std::function<double(double, double)>& objective,
                           const SearchBox& box, std::uint64_t seed, const TunerOptions& opt = {}) {
  box.validate();
  Rng rng(seed);
  TuneResult result;
  auto random_point = [&] {
    const double a = rng.uniform(box.alpha.lo, box.alpha.hi);
    const double b = rng.uniform(box.beta.lo, box.beta.hi);
    return Eigen::Vector2d(a, b);
  };

  auto evaluate = [&](const Eigen::Vector2d& x) {
    Trial t{x(0), x(1), 0.0, result.trace.size(), false, {}};
    try {
      t.objective_value = objective(x(0), x(1));
      if (std::isnan(t.objective_value)) throw Error("objective returned NaN");
    } catch (const std::exception& e) {
      t.failed = true;
      t.error = e.what();
      t.objective_value = -std::numeric_limits<double>::infinity();
    }
    result.trace.push_back(t);
  };

  evaluate(detail::clamp_to({opt.start_alpha, opt.start_beta}, box));

  while (result.trace.size() < box.budget) {
    std::vector<Eigen::Vector2d> xs;
    std::vector<double> ys;
    for (const auto& t : result.trace) {
      if (!t.failed) {
        xs.emplace_back(t.alpha, t.beta);
        ys.push_back(t.objective_value);
      }
    }
    if (opt.mode == TunerMode::kRandomSearch || xs.empty()) {
      evaluate(random_point());
      continue;
    }
    const detail::GaussianProcess2d gp(xs, ys, opt.length_scale, opt.noise);
    const double best_y = *std::max_element(ys.begin(), ys.end());
    auto acq = [&](const Eigen::Vector2d& x) { return gp.expected_improvement(x, best_y); };

    std::vector<std::pair<double, Eigen::Vector2d>> cands;
    cands.reserve(opt.candidates);
    for (std::size_t c = 0; c < opt.candidates; ++c) {
      const auto x = random_point();
      cands.emplace_back(acq(x), x);
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    const double span = std::max(box.alpha.hi - box.alpha.lo, box.beta.hi - box.beta.lo);
    auto best = cands.front();
    const std::size_t starts = std::min(opt.local_starts, cands.size());
    for (std::size_t s = 0; s < starts; ++s) {
      auto [val, x] = cands[s];
      for (double step = 0.05 * span; step > 1e-4 * span;) {
        bool moved = false;
        for (const Eigen::Vector2d& dir : {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0),
                                          Eigen::Vector2d(0, 1), Eigen::Vector2d(0, -1)}) {
          const Eigen::Vector2d y = detail::clamp_to(x + step * dir, box);
          const double v = acq(y);
          if (v > val) {
            val = v;
            x = y;
            moved = true;
          }
        }
        if (!moved) step *= 0.5;
      }
      if (val > best.first) best = {val, x};
    }
    evaluate(best.second);
  }

  result.best = result.trace.front();
  for (const auto& t : result.trace) {
    if (t.objective_value > result.best.objective_value) result.best = t;
  }
  return result;
}

inline nlohmann::json to_json(const Trial& t) {
  nlohmann::json j = {{"eval_index", t.eval_index}, {"alpha", t.alpha}, {"beta", t.beta}};
  if (t.failed) {
    j["objective"] = nullptr;
    j["failed"] = true;
    j["error"] = t.error;
  } else {
    j["objective"] = t.objective_value;
    j["failed"] = false;
  }
  return j;
}

/// One JSON object per line, in evaluation order.
inline void write_trace(const std::vector<Trial>& trace, std::ostream& out) {
  for (const auto& t : trace) out << to_json(t).dump() << '\n';
}

inline std::vector<Trial> read_trace(std::istream& in) {
  std::vector<Trial> trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Trial t;
      t.eval_index = j.at("eval_index").get<std::size_t>();
      t.alpha = j.at("alpha").get<double>();
      t.beta = j.at("beta").get<double>();
      t.failed = j.value("failed", false);
      t.objective_value = t.failed ? -std::numeric_limits<double>::infinity()
                                   : j.at("objective").get<double>();
      t.error = j.value("error", std::string());
      trace.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return trace;
}

struct ObjectiveWeights {
  double accuracy = 1.0;
  double bleu = 1.0;
  double ppl = 1.0;
  double ppl_cap = 500.0;
};

/// w_acc * accuracy + w_bleu * r-sBLEU / 100 - w_ppl * min(PPL / cap, 1).
inline double composite_objective(double accuracy, double r_sbleu, double ppl,
                                  const ObjectiveWeights& w = {}) {
  return w.accuracy * accuracy + w.bleu * (r_sbleu / 100.0) -
         w.ppl * std::min(ppl / w.ppl_cap, 1.0);
}

struct DevItem {
  std::string input;
  std::string reference;
  std::string target_style;
};

/// Transfers one dev input with the decoding weights under evaluation.
using TransferFn = std::function<std::string(const DevItem&)>;

/// Runs `transfer` over the dev set and scores the outputs with the
/// composite objective (accuracy per item's own target style).
inline double validation_objective(const TransferFn& transfer, const std::vector<DevItem>& dev,
                                   const StyleClassifier& classifier,
                                   const LogitProvider& ppl_provider,
                                   const ObjectiveWeights& w = {}) {
  if (dev.empty()) throw ArgumentError("empty dev set");
  std::vector<std::string> outputs, refs;
  std::size_t hits = 0;
  double nll = 0.0, tokens = 0.0;
  const Tokenizer tok(ppl_provider.vocab());
  for (const auto& item : dev) {
    auto out = transfer(item);
    if (style_accuracy(classifier, {out}, item.target_style) > 0.0) ++hits;
    const auto ids = tok.encode(out);
    TokenSeq ctx;
    for (auto id : ids) {
      nll -= logprobs(ppl_provider, ctx).values[id];
      ctx.push_back(id);
    }
    tokens += static_cast<double>(ids.size());
    outputs.push_back(std::move(out));
    refs.push_back(item.reference);
  }
  const double acc = static_cast<double>(hits) / static_cast<double>(dev.size());
  const double ppl = tokens > 0.0 ? std::exp(nll / tokens) : w.ppl_cap;
  return composite_objective(acc, corpus_bleu(outputs, refs), ppl, w);
}

}  // namespace tstkit

#endif  // TSTKIT_TUNER_HPP
