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

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llmp {

enum class ErrorCode {
  // numcodec
  NonFinite,
  NegativeDisallowed,
  NonNumeric,
  Malformed,
  // prompting
  DistanceOnTextKeys,
  KindMismatch,
  ZeroScale,
  // backend
  BackendUnavailable,
  Timeout,
  UnsupportedScoring,
  InvalidArgument,
  // density / process
  MaxAttemptsExceeded,
  // eval
  EmptyInput,
  LengthMismatch,
  // gp
  DegenerateData,
  NumericalFailure,
  // bbo
  OutOfBounds,
  WrongDimension,
  // harness
  UnknownFunction,
  ParseError,
  SchemaMismatch,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Seeded generator whose derived variates are identical on every platform.
// std::mt19937_64 output is fully specified; the std distributions are not,
// so the transforms below are written out.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller (the second variate is discarded).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a parent seed and stream indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace llmp
