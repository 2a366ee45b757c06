// Copyright 2026 The llmp Authors. All Rights Reserved.
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

#include <doctest.h>

#include <cmath>
#include <map>

#include "llmp/backend.hpp"
#include "llmp/common.hpp"
#include "oracles.hpp"

using namespace llmp;
using namespace llmp::backend;

namespace {

// Emits "2.5" then the newline terminal with probability one.
TableLM deterministic_25() {
  TableLM lm({{"\n", 1.0}});
  lm.add(", ", {{"2", 1.0}}).add("2", {{".", 1.0}}).add("2.", {{"5", 1.0}});
  return lm;
}

numcodec::NumericFormat fmt(int precision) {
  numcodec::NumericFormat f;
  f.precision = precision;
  return f;
}

}  // namespace

TEST_CASE("complete: deterministic table path") {
  const auto lm = deterministic_25();
  const auto c = lm.complete("7, ", SamplingParams{}, 1);
  CHECK(c.text == "2.5");
  CHECK(c.stopped);
}

TEST_CASE("complete: max_tokens cuts off before the stop sequence") {
  const auto lm = deterministic_25();
  SamplingParams p;
  p.max_tokens = 2;
  const auto c = lm.complete("1, ", p, 1);
  CHECK(c.text == "2.");
  CHECK_FALSE(c.stopped);
}

TEST_CASE("complete: cheat backend answers f(x) at the generation point") {
  const CheatFunctionBackend cheat([](std::span<const double> x) { return x[0]; }, 0.0,
                                   prompting::PairFormat::CommaSpaceNewline, fmt(2), "identity");
  const auto c = cheat.complete("1, 1.00\n7, ", SamplingParams{}, 4);
  CHECK(c.text == "7.00");
  CHECK(c.stopped);
  // Token-level generation agrees with the shortcut.
  CHECK(cheat.DistributionModel::complete("1, 1.00\n7, ", SamplingParams{}, 4).text == "7.00");
  const auto q = cheat.parse_query("a\n3, 4\n-2.5, 1.");
  REQUIRE(q);
  CHECK(q->x == std::vector<double>{-2.5});
  CHECK(q->partial == "1.");
  CHECK_FALSE(cheat.parse_query("3, 4\n"));
}

TEST_CASE("complete: seeded uniform output is reproducible") {
  const UniformDigitLM lm;
  const auto a = lm.complete("p", SamplingParams{}, 77);
  const auto b = lm.complete("p", SamplingParams{}, 77);
  CHECK(a.text == b.text);
  CHECK(a.stopped == b.stopped);
  bool differs = false;
  for (std::uint64_t s = 0; s < 20 && !differs; ++s) differs = lm.complete("p", SamplingParams{}, s).text != a.text;
  CHECK(differs);
}

TEST_CASE("score_continuation: masking renormalizes over numeric tokens") {
  TableLM lm({{"1", 0.5}, {"a", 0.5}});
  const auto vocab = oracle::numeric_vocabulary("\n");
  const std::vector<std::string> cont = {"1"};
  const auto s = lm.score_continuation("", cont, vocab);
  CHECK(s.token_log_probs[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::exp(s.log_probs[0][1]) == doctest::Approx(1.0));
}

TEST_CASE("score_continuation: uniform and deterministic models") {
  const UniformDigitLM lm;
  const auto vocab = oracle::numeric_vocabulary("\n");
  const std::vector<std::string> cont = {"1", "2", ".", "5", "\n"};
  const auto s = lm.score_continuation("x", cont, vocab);
  REQUIRE(s.token_log_probs.size() == 5);
  for (double v : s.token_log_probs) CHECK(v == doctest::Approx(std::log(1.0 / 13.0)).epsilon(1e-14));
  for (const auto& row : s.log_probs)
    for (double v : row) CHECK(v == doctest::Approx(std::log(1.0 / 13.0)).epsilon(1e-14));

  const auto det = deterministic_25();
  const std::vector<std::string> path = {"2", ".", "5", "\n"};
  for (double v : det.score_continuation("0, ", path, vocab).token_log_probs) CHECK(v == 0.0);

  const std::vector<std::string> bad = {"x"};
  CHECK_THROWS_AS(lm.score_continuation("", bad, vocab), Error);
}

TEST_CASE("apply_sampling: temperature and top-p") {
  const TokenDistribution d = {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}};
  SamplingParams p;
  const auto same = apply_sampling(d, p);
  REQUIRE(same.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same[i].second == doctest::Approx(d[i].second).epsilon(1e-15));

  p.temperature = 0.5;
  const auto sharp = apply_sampling(d, p);
  const double z = 0.25 + 0.09 + 0.04;
  CHECK(sharp[0].second == doctest::Approx(0.25 / z).epsilon(1e-12));
  CHECK(sharp[2].second == doctest::Approx(0.04 / z).epsilon(1e-12));

  p.temperature = 1.0;
  p.top_p = 0.8;
  const auto nucleus = apply_sampling(d, p);
  REQUIRE(nucleus.size() == 2);
  CHECK(nucleus[0].second == doctest::Approx(0.625));
  CHECK(nucleus[1].second == doctest::Approx(0.375));

  p.top_p = 0.1;
  CHECK(apply_sampling(d, p).size() == 1);
}

TEST_CASE("sampling params validation") {
  SamplingParams p;
  p.temperature = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.top_p = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.max_tokens = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("property: context-free sampling matches the masked distribution") {
  const UniformDigitLM lm({{"1", 4}, {"2", 2}, {"3", 1}, {".", 1}, {"\n", 2}}, "\n");
  const auto vocab = oracle::numeric_vocabulary("\n");
  SamplingParams p;
  p.max_tokens = 1;
  p.stop.clear();
  std::map<std::string, int> counts;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[lm.complete("", p, static_cast<std::uint64_t>(i)).text];
  double tv = 0.0;
  for (const auto& tok : vocab) {
    const double emp = counts.count(tok) ? counts[tok] / static_cast<double>(n) : 0.0;
    tv += std::fabs(emp - oracle::masked_prob(lm, "", tok, vocab));
  }
  CHECK(tv / 2 < 0.05);
  // top_p = 1 keeps the whole support.
  CHECK(counts.size() == 5);
}

TEST_CASE("table model from JSON") {
  const auto lm = TableLM::from_json_text(
      R"({"fallback": {"\n": 1}, "entries": [{"suffix": "", "dist": {"4": 3, "5": 1}},
                                             {"suffix": "4", "dist": {"\n": 1}}]})");
  const auto d = lm.next_token("x: ");
  REQUIRE(d.size() == 2);
  CHECK(d[0].second == doctest::Approx(0.75));
  CHECK(lm.next_token("x: 4")[0].first == "\n");
  CHECK_THROWS_AS(TableLM::from_json_text("{"), Error);
  CHECK_THROWS_AS(TableLM::from_json_text("{}"), Error);
}

TEST_CASE("table model prefers the longest matching suffix") {
  TableLM lm({{"0", 1}});
  lm.add("1", {{"2", 1}}).add("11", {{"3", 1}});
  CHECK(lm.next_token("a1")[0].first == "2");
  CHECK(lm.next_token("a11")[0].first == "3");
  CHECK(lm.next_token("a")[0].first == "0");
}

TEST_CASE("uniform model rejects non-numeric tokens") {
  CHECK_THROWS_AS(UniformDigitLM({{"a", 1}}, "\n"), Error);
  CHECK_THROWS_AS(UniformDigitLM("ab"), Error);
}

TEST_CASE("cheat backend with noise scores a discretized Gaussian") {
  const CheatFunctionBackend cheat([](std::span<const double>) { return 0.5; }, 0.1,
                                   prompting::PairFormat::CommaSpaceNewline, fmt(1), "half");
  const double p = oracle::string_mass(cheat, "1, ", "0.5", "\n");
  const double expect = 0.5 * (std::erf(0.05 / (0.1 * std::sqrt(2.0))) * 2);
  CHECK(p == doctest::Approx(expect).epsilon(1e-6));
}
