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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace llmp::numcodec {

// Decimal layout of serialized values. Each value occupies a bin of width
// 10^-precision; `terminal` is the character that follows a value in a prompt
// (empty for formats with no inter-pair separator).
struct NumericFormat {
  int precision = 2;
  bool allow_negative = true;
  std::string terminal = "\n";

  double bin_width() const;
  // The tokens a scored continuation may use: digits, '.', '-', and the
  // terminal when there is one.
  std::vector<std::string> vocabulary() const;
};

// Canonical decimal text: no '+', no exponent, exactly `precision` fraction
// digits, and no negative zero.
std::string serialize_value(double y, const NumericFormat& fmt);

// Rounds y to fmt.precision decimals (half away from zero on the shortest
// round-trip decimal expansion) and returns the resulting double.
double round_value(double y, int precision);

// Parses a plain decimal literal after trimming whitespace and the terminal.
// Throws NonNumeric when the text contains anything other than digits, '.'
// and '-', and Malformed when those characters are arranged badly.
double parse_value(std::string_view text, const NumericFormat& fmt);

// True when parse_value would succeed.
bool is_number(std::string_view text, const NumericFormat& fmt);

// One token per character.
std::vector<std::string> tokenize_numeric(std::string_view s);

}  // namespace llmp::numcodec
