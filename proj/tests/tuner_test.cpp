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

#include <gtest/gtest.h>

#include <sstream>

#include "tstkit/toy_lm.hpp"
#include "tstkit/tuner.hpp"

namespace {

using tstkit::SearchBox;

double bowl(double a, double b) { return -(a - 2) * (a - 2) - (b - 3) * (b - 3); }

TEST(Optimize, BudgetOneIsStartPoint) {
  SearchBox box;
  box.budget = 1;
  const auto r = tstkit::optimize(bowl, box, 0);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.best.alpha, 5.0);
  EXPECT_EQ(r.best.beta, 5.0);
  EXPECT_EQ(r.best.objective_value, bowl(5, 5));
}

TEST(Optimize, ConstantObjective) {
  SearchBox box;
  box.budget = 12;
  const auto r = tstkit::optimize([](double, double) { return 0.25; }, box, 3);
  EXPECT_EQ(r.trace.size(), 12u);
  EXPECT_EQ(r.best.objective_value, 0.25);
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(r.trace[i].eval_index, i);
}

TEST(Optimize, BowlOptimumWithinHalf) {
  const auto r = tstkit::optimize(bowl, SearchBox{}, 0);
  EXPECT_EQ(r.trace.size(), 30u);
  EXPECT_EQ(r.trace[0].alpha, 5.0);
  EXPECT_EQ(r.trace[0].beta, 5.0);
  EXPECT_LE(std::abs(r.best.alpha - 2.0), 0.5);
  EXPECT_LE(std::abs(r.best.beta - 3.0), 0.5);
  double running = -HUGE_VAL;
  for (const auto& t : r.trace) {
    EXPECT_GE(t.alpha, 0.0);
    EXPECT_LE(t.alpha, 10.0);
    EXPECT_GE(t.beta, 0.0);
    EXPECT_LE(t.beta, 10.0);
    running = std::max(running, t.objective_value);
  }
  EXPECT_EQ(running, r.best.objective_value);
}

TEST(Optimize, ReproducibleUnderSeed) {
  const auto a = tstkit::optimize(bowl, SearchBox{}, 11);
  const auto b = tstkit::optimize(bowl, SearchBox{}, 11);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].alpha, b.trace[i].alpha);
    EXPECT_EQ(a.trace[i].beta, b.trace[i].beta);
  }
}

TEST(Optimize, FailingObjectiveContinues) {
  SearchBox box;
  box.budget = 10;
  int calls = 0;
  const auto r = tstkit::optimize(
      [&](double a, double b) {
        if (++calls % 3 == 1) throw tstkit::TransportError("backend unavailable");
        return bowl(a, b);
      },
      box, 1);
  EXPECT_EQ(r.trace.size(), 10u);
  EXPECT_TRUE(r.trace[0].failed);
  EXPECT_EQ(r.trace[0].objective_value, -HUGE_VAL);
  EXPECT_FALSE(r.best.failed);
  EXPECT_NE(r.trace[0].error.find("backend"), std::string::npos);
}

TEST(Optimize, RandomSearchModeAndValidation) {
  tstkit::TunerOptions opt;
  opt.mode = tstkit::TunerMode::kRandomSearch;
  SearchBox box;
  box.alpha = {1.0, 2.0};
  box.beta = {0.0, 0.5};
  box.budget = 20;
  const auto r = tstkit::optimize(bowl, box, 4, opt);
  EXPECT_EQ(r.trace[0].alpha, 2.0);  // start point clamped into the box
  EXPECT_EQ(r.trace[0].beta, 0.5);
  for (const auto& t : r.trace) {
    EXPECT_GE(t.alpha, 1.0);
    EXPECT_LE(t.beta, 0.5);
  }
  box.budget = 0;
  EXPECT_THROW(tstkit::optimize(bowl, box, 0), tstkit::ArgumentError);
  box.budget = 3;
  box.alpha = {2.0, 1.0};
  EXPECT_THROW(tstkit::optimize(bowl, box, 0), tstkit::ArgumentError);
}

TEST(Trace, JsonLinesRoundTrip) {
  SearchBox box;
  box.budget = 5;
  int calls = 0;
  const auto r = tstkit::optimize(
      [&](double a, double b) {
        if (++calls == 2) throw tstkit::Error("bad trial");
        return bowl(a, b);
      },
      box, 2);
  std::stringstream ss;
  tstkit::write_trace(r.trace, ss);
  const std::string text = ss.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_NE(text.find("\"objective\":null"), std::string::npos);
  const auto back = tstkit::read_trace(ss);
  ASSERT_EQ(back.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back[i].alpha, r.trace[i].alpha);
    EXPECT_EQ(back[i].beta, r.trace[i].beta);
    EXPECT_EQ(back[i].objective_value, r.trace[i].objective_value);
    EXPECT_EQ(back[i].failed, r.trace[i].failed);
  }
  std::istringstream bad("{\"eval_index\":0}\n");
  EXPECT_THROW(tstkit::read_trace(bad), tstkit::ParseError);
}

TEST(Composite, FormulaCases) {
  EXPECT_NEAR(tstkit::composite_objective(0.8, 40, 120), 0.96, 1e-12);
  EXPECT_DOUBLE_EQ(tstkit::composite_objective(1.0, 100, 0), 2.0);
  EXPECT_DOUBLE_EQ(tstkit::composite_objective(0.0, 0, 500), -1.0);
  EXPECT_DOUBLE_EQ(tstkit::composite_objective(0.0, 0, 9000), -1.0);
  EXPECT_DOUBLE_EQ(tstkit::composite_objective(1.0, 50, 250, {2.0, 0.0, 1.0, 1000.0}), 1.75);
}

TEST(Composite, ValidationObjectiveOnToyDev) {
  std::vector<std::string> v = {"<unk>", "good", "bad", "food"};
  std::map<std::string, std::vector<double>> rows;
  for (const auto& t : v) rows[t] = {0.25, 0.25, 0.25, 0.25};
  const tstkit::ToyBigramProvider uni(v, {0.25, 0.25, 0.25, 0.25}, rows);
  const tstkit::LexiconClassifier lex({{"positive", {"good"}}, {"negative", {"bad"}}});
  const std::vector<tstkit::DevItem> dev = {{"bad food", "good food", "positive"},
                                            {"good food", "bad food", "negative"}};
  const auto echo_good = [](const tstkit::DevItem&) { return std::string("good food"); };
  // accuracy 1/2, r-sBLEU corpus("good food" x2 vs refs), PPL 4.
  const double bleu = tstkit::corpus_bleu({"good food", "good food"}, {"good food", "bad food"});
  EXPECT_NEAR(tstkit::validation_objective(echo_good, dev, lex, uni),
              0.5 + bleu / 100.0 - 4.0 / 500.0, 1e-12);
  EXPECT_THROW(tstkit::validation_objective(echo_good, {}, lex, uni), tstkit::ArgumentError);
}

}  // namespace
