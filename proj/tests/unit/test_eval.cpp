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

#include "llmp/common.hpp"
#include "llmp/eval.hpp"

using namespace llmp;
using namespace llmp::eval;

TEST_CASE("nll and mae") {
  const std::vector<double> lp = {-1.0, -3.0};
  CHECK(nll(lp) == 2.0);
  const std::vector<double> med = {1.0, 2.0, 4.0};
  const std::vector<double> truth = {1.5, 2.0, 3.0};
  CHECK(mae(med, truth) == doctest::Approx(0.5));
  CHECK_THROWS_AS(nll(std::vector<double>{}), Error);
  CHECK_THROWS_AS(mae(med, lp), Error);
  try {
    mae(std::vector<double>{}, std::vector<double>{});
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("quantiles of 1..100") {
  std::vector<double> s;
  for (int i = 100; i >= 1; --i) s.push_back(i);
  const auto t = summarize(s);
  CHECK(t.samples.front() == 1.0);
  CHECK(t.median == 50.0);
  CHECK(t.lower == 3.0);
  CHECK(t.upper == 98.0);
  CHECK(t.at(100) == 10.0);
  CHECK(t.at(900) == 90.0);
  CHECK(t.quantiles.size() == kQuantileLevels.size());
}

TEST_CASE("nearest rank on small samples") {
  const std::vector<double> one = {4.0};
  for (int p : kQuantileLevels) CHECK(quantile_sorted(one, p) == 4.0);
  const std::vector<double> three = {1, 2, 3};
  CHECK(quantile_sorted(three, 500) == 2.0);
  CHECK(quantile_sorted(three, 25) == 1.0);
  CHECK(quantile_sorted(three, 975) == 3.0);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
}

TEST_CASE("property: quantiles are monotone and affine-equivariant") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(1 + rng.below(60));
    for (double& v : s) v = rng.normal();
    const double a = rng.uniform(0.1, 5.0), b = rng.uniform(-3, 3);
    std::vector<double> t = s;
    for (double& v : t) v = a * v + b;
    const auto qs = summarize(s), qt = summarize(t);
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
      if (i > 0) REQUIRE(qs.quantiles[i].second >= qs.quantiles[i - 1].second);
      REQUIRE(qt.quantiles[i].second == a * qs.quantiles[i].second + b);
    }
  }
}

TEST_CASE("summaries per target") {
  const std::vector<std::vector<double>> per = {{1, 2, 3}, {5}};
  const auto s = summarize(per);
  REQUIRE(s.size() == 2);
  CHECK(s[0].median == 2.0);
  CHECK(s[1].median == 5.0);
}
