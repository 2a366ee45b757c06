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
#include <limits>

#include "llmp/common.hpp"
#include "llmp/numcodec.hpp"

using namespace llmp;
using numcodec::NumericFormat;

namespace {
NumericFormat fmt(int n, bool neg = true) {
  NumericFormat f;
  f.precision = n;
  f.allow_negative = neg;
  return f;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}
}  // namespace

TEST_CASE("serialize: canonical decimal text") {
  CHECK(numcodec::serialize_value(12, fmt(0)) == "12");
  CHECK(numcodec::serialize_value(2.537, fmt(2)) == "2.54");
  CHECK(numcodec::serialize_value(-0.5, fmt(1)) == "-0.5");
  CHECK(numcodec::serialize_value(3, fmt(2)) == "3.00");
  CHECK(numcodec::serialize_value(1e6, fmt(1)) == "1000000.0");
  CHECK(numcodec::serialize_value(0.000001, fmt(3)) == "0.000");
}

TEST_CASE("serialize: half away from zero on the decimal expansion") {
  CHECK(numcodec::serialize_value(2.5, fmt(0)) == "3");
  CHECK(numcodec::serialize_value(-2.5, fmt(0)) == "-3");
  CHECK(numcodec::serialize_value(0.125, fmt(2)) == "0.13");
  // 2.675 is stored as 2.67499999...; the shortest decimal form is "2.675".
  CHECK(numcodec::serialize_value(2.675, fmt(2)) == "2.68");
  CHECK(numcodec::serialize_value(9.995, fmt(2)) == "10.00");
}

TEST_CASE("serialize: negative zero becomes zero") {
  CHECK(numcodec::serialize_value(-0.0, fmt(2)) == "0.00");
  CHECK(numcodec::serialize_value(-0.001, fmt(2)) == "0.00");
  CHECK(numcodec::serialize_value(-0.004, fmt(0)) == "0");
}

TEST_CASE("serialize: errors") {
  CHECK(code_of([] { numcodec::serialize_value(std::nan(""), fmt(2)); }) == ErrorCode::NonFinite);
  CHECK(code_of([] { numcodec::serialize_value(INFINITY, fmt(2)); }) == ErrorCode::NonFinite);
  CHECK(code_of([] { numcodec::serialize_value(-1.0, fmt(2, false)); }) ==
        ErrorCode::NegativeDisallowed);
  // Rounds to zero, so no sign survives.
  CHECK(numcodec::serialize_value(-0.001, fmt(2, false)) == "0.00");
}

TEST_CASE("parse: literals and rejections") {
  CHECK(numcodec::parse_value("3.14\n", fmt(2)) == 3.14);
  CHECK(numcodec::parse_value("  -7 ", fmt(0)) == -7.0);
  CHECK(numcodec::parse_value("007.5", fmt(1)) == 7.5);
  CHECK(code_of([] { numcodec::parse_value("NaN", fmt(2)); }) == ErrorCode::NonNumeric);
  CHECK(code_of([] { numcodec::parse_value("1e5", fmt(2)); }) == ErrorCode::NonNumeric);
  CHECK(code_of([] { numcodec::parse_value("+1", fmt(2)); }) == ErrorCode::NonNumeric);
  CHECK(code_of([] { numcodec::parse_value("", fmt(2)); }) == ErrorCode::NonNumeric);
  for (const char* bad : {"1.2.3", "1-2", "-", ".", "1.", ".5", "--1"})
    CHECK(code_of([&] { numcodec::parse_value(bad, fmt(2)); }) == ErrorCode::Malformed);
  CHECK(numcodec::is_number("2.5", fmt(1)));
  CHECK_FALSE(numcodec::is_number("abc", fmt(1)));
}

TEST_CASE("tokenize: one token per character") {
  using V = std::vector<std::string>;
  CHECK(numcodec::tokenize_numeric("12.5") == V{"1", "2", ".", "5"});
  CHECK(numcodec::tokenize_numeric("-0.5") == V{"-", "0", ".", "5"});
  CHECK(numcodec::tokenize_numeric("7") == V{"7"});
}

TEST_CASE("format: bin width and vocabulary") {
  CHECK(fmt(0).bin_width() == 1.0);
  CHECK(fmt(3).bin_width() == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(fmt(2).vocabulary().size() == 13);
  NumericFormat none = fmt(2);
  none.terminal.clear();
  CHECK(none.vocabulary().size() == 12);
}

TEST_CASE("property: parse(serialize(y)) == round(y) and serialize is canonical") {
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    const int n = static_cast<int>(rng.below(5));
    const double scale = std::pow(10.0, static_cast<double>(rng.below(7)) - 2.0);
    const double y = rng.uniform(-1.0, 1.0) * scale;
    const auto s = numcodec::serialize_value(y, fmt(n));
    REQUIRE(numcodec::parse_value(s, fmt(n)) == numcodec::round_value(y, n));
    const auto dot = s.find('.');
    if (n == 0) {
      REQUIRE(dot == std::string::npos);
    } else {
      REQUIRE(s.size() - dot - 1 == static_cast<std::size_t>(n));
    }
    REQUIRE(s.find('-', 1) == std::string::npos);
    if (numcodec::parse_value(s, fmt(n)) == 0.0) REQUIRE(s.front() != '-');
    std::string joined;
    for (const auto& t : numcodec::tokenize_numeric(s)) joined += t;
    REQUIRE(joined == s);
  }
}

TEST_CASE("property: serialize preserves order across distinct bins") {
  Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    const double a = rng.uniform(-50, 50), b = rng.uniform(-50, 50);
    const double ra = numcodec::round_value(a, 2), rb = numcodec::round_value(b, 2);
    if (ra == rb) continue;
    const double pa = numcodec::parse_value(numcodec::serialize_value(a, fmt(2)), fmt(2));
    const double pb = numcodec::parse_value(numcodec::serialize_value(b, fmt(2)), fmt(2));
    REQUIRE((a < b) == (pa < pb));
  }
}
