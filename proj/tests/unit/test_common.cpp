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

#include <algorithm>
#include <cmath>
#include <set>

#include "llmp/common.hpp"

using llmp::Error;
using llmp::ErrorCode;
using llmp::Rng;

TEST_CASE("mt19937_64 stream is the standard one") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("uniform stays in [0, 1) and has the right mean") {
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal draws have unit variance") {
  Rng rng(2);
  double s = 0.0, ss = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(ss / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below is unbiased over a small range") {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("permutation is a permutation and depends on the seed") {
  Rng a(4), b(4), c(5);
  const auto pa = a.permutation(50);
  CHECK(pa == b.permutation(50));
  CHECK(pa != c.permutation(50));
  auto sorted = pa;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("derived seeds separate streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(llmp::derive_seed(7, a, b));
  CHECK(seen.size() == 400);
  CHECK(llmp::derive_seed(7, 1, 2) == llmp::derive_seed(7, 1, 2));
}

TEST_CASE("errors carry their code in the message") {
  const Error e(ErrorCode::ZeroScale, "a is zero");
  CHECK(e.code() == ErrorCode::ZeroScale);
  CHECK(std::string(e.what()).find("ZeroScale") != std::string::npos);
}
