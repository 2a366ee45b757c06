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

#include "llmp/numcodec.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

#include "llmp/common.hpp"

namespace llmp::numcodec {

double NumericFormat::bin_width() const { return std::pow(10.0, -precision); }

std::vector<std::string> NumericFormat::vocabulary() const {
  std::vector<std::string> v;
  for (char c = '0'; c <= '9'; ++c) v.emplace_back(1, c);
  v.emplace_back(".");
  v.emplace_back("-");
  if (!terminal.empty()) v.emplace_back(terminal.substr(0, 1));
  return v;
}

namespace {

// Shortest fixed-notation expansion of |y| that round-trips.
std::string shortest_fixed(double y) {
  std::array<char, 512> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), y, std::chars_format::fixed);
  if (res.ec != std::errc{}) throw Error(ErrorCode::NonFinite, "value too large to format");
  return std::string(buf.data(), res.ptr);
}

// Rounds a non-negative fixed decimal string to `precision` fraction digits.
std::string round_decimal(const std::string& digits, int precision) {
  std::string int_part = digits;
  std::string frac_part;
  if (auto dot = digits.find('.'); dot != std::string::npos) {
    int_part = digits.substr(0, dot);
    frac_part = digits.substr(dot + 1);
  }
  const auto n = static_cast<std::size_t>(precision);
  bool round_up = frac_part.size() > n && frac_part[n] >= '5';
  frac_part.resize(n, '0');

  std::string all = int_part + frac_part;
  if (round_up) {
    int i = static_cast<int>(all.size()) - 1;
    while (i >= 0) {
      if (all[i] == '9') {
        all[i] = '0';
        --i;
      } else {
        ++all[i];
        break;
      }
    }
    if (i < 0) all.insert(all.begin(), '1');
  }
  const std::size_t int_len = all.size() - n;
  std::string out = all.substr(0, int_len);
  // strip leading zeros but keep one
  std::size_t nz = out.find_first_not_of('0');
  out = nz == std::string::npos ? "0" : out.substr(nz);
  if (n > 0) out += "." + all.substr(int_len);
  return out;
}

bool all_zero_digits(const std::string& s) {
  for (char c : s)
    if (c != '0' && c != '.') return false;
  return true;
}

}  // namespace

std::string serialize_value(double y, const NumericFormat& fmt) {
  if (!std::isfinite(y)) throw Error(ErrorCode::NonFinite, "cannot serialize non-finite value");
  if (fmt.precision < 0) throw Error(ErrorCode::InvalidArgument, "negative precision");
  std::string mag = round_decimal(shortest_fixed(std::fabs(y)), fmt.precision);
  const bool negative = std::signbit(y) && !all_zero_digits(mag);
  if (negative && !fmt.allow_negative)
    throw Error(ErrorCode::NegativeDisallowed, "negative value " + mag);
  return negative ? "-" + mag : mag;
}

double round_value(double y, int precision) {
  NumericFormat fmt;
  fmt.precision = precision;
  return parse_value(serialize_value(y, fmt), fmt);
}

namespace {

std::string_view trim(std::string_view text, const NumericFormat& fmt) {
  auto is_trim = [&](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
           (!fmt.terminal.empty() && fmt.terminal.find(c) != std::string::npos);
  };
  while (!text.empty() && is_trim(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_trim(text.back())) text.remove_suffix(1);
  return text;
}

enum class Shape { Ok, NonNumeric, Malformed };

Shape classify(std::string_view t) {
  if (t.empty()) return Shape::NonNumeric;
  for (char c : t)
    if (!((c >= '0' && c <= '9') || c == '.' || c == '-')) return Shape::NonNumeric;
  std::size_t i = 0;
  if (t[i] == '-') ++i;
  std::size_t int_digits = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i, ++int_digits;
  if (int_digits == 0) return Shape::Malformed;
  if (i == t.size()) return Shape::Ok;
  if (t[i] != '.') return Shape::Malformed;
  ++i;
  std::size_t frac_digits = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i, ++frac_digits;
  if (frac_digits == 0 || i != t.size()) return Shape::Malformed;
  return Shape::Ok;
}

}  // namespace

double parse_value(std::string_view text, const NumericFormat& fmt) {
  const std::string_view t = trim(text, fmt);
  switch (classify(t)) {
    case Shape::NonNumeric:
      throw Error(ErrorCode::NonNumeric, "not a number: '" + std::string(text) + "'");
    case Shape::Malformed:
      throw Error(ErrorCode::Malformed, "malformed number: '" + std::string(text) + "'");
    case Shape::Ok:
      break;
  }
  double value = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value, std::chars_format::fixed);
  if (res.ec != std::errc{} || !std::isfinite(value))
    throw Error(ErrorCode::Malformed, "out of range: '" + std::string(text) + "'");
  return value == 0.0 ? 0.0 : value;
}

bool is_number(std::string_view text, const NumericFormat& fmt) {
  return classify(trim(text, fmt)) == Shape::Ok;
}

std::vector<std::string> tokenize_numeric(std::string_view s) {
  std::vector<std::string> tokens;
  tokens.reserve(s.size());
  for (char c : s) tokens.emplace_back(1, c);
  return tokens;
}

}  // namespace llmp::numcodec
