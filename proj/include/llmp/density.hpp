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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmp/backend.hpp"
#include "llmp/numcodec.hpp"

namespace llmp::density {

// Density of the width-10^-n bin that contains y: the product of masked
// token probabilities of serialize(y) followed by the terminal, divided by
// the bin width. log_pdf == log_mass + n*ln(10) exactly.
struct MarginalDensity {
  double y = 0.0;  // canonical (rounded) value
  std::string text;
  int precision = 0;
  double log_mass = 0.0;
  double log_pdf = 0.0;
};

MarginalDensity log_pdf(const backend::LanguageModel& model, std::string_view prompt, double y,
                        const numcodec::NumericFormat& fmt);

// Chain-rule density of a multi-output value written as
// y1 <joiner> y2 <joiner> ... yk <terminal>. Intermediate components are
// terminated by the first character of the joiner. `y` and `text` refer to
// the first component; log_pdf adds k*n*ln(10).
MarginalDensity log_pdf_joint(const backend::LanguageModel& model, std::string_view prompt,
                              std::span<const double> ys, const numcodec::NumericFormat& fmt,
                              std::string_view joiner);

struct SampleOutcome {
  double value = 0.0;
  std::string text;
  int attempts = 0;
  int rejected = 0;
};

struct SampleSet {
  std::vector<double> values;
  std::vector<std::string> texts;
  int attempts = 0;
  int rejected = 0;
};

// Default attempt budget for n requested samples.
inline int default_max_attempts(int n) { return 10 * n; }

// Draws completions until one is a number. A completion cut off by
// max_tokens before the stop sequence is rejected. Throws
// MaxAttemptsExceeded when the budget runs out.
SampleOutcome sample_value(const backend::LanguageModel& model, std::string_view prompt,
                           const backend::SamplingParams& params,
                           const numcodec::NumericFormat& fmt, int max_attempts,
                           std::uint64_t seed);

// n accepted samples sharing one attempt budget.
SampleSet sample_values(const backend::LanguageModel& model, std::string_view prompt,
                        const backend::SamplingParams& params, const numcodec::NumericFormat& fmt,
                        int n, int max_attempts, std::uint64_t seed);

// Multi-output variant: accepts completions that split into `arity` numbers.
struct VectorOutcome {
  std::vector<double> values;
  std::string text;
  int attempts = 0;
  int rejected = 0;
};
VectorOutcome sample_vector(const backend::LanguageModel& model, std::string_view prompt,
                            const backend::SamplingParams& params,
                            const numcodec::NumericFormat& fmt, std::string_view joiner,
                            std::size_t arity, int max_attempts, std::uint64_t seed);

// log_pdf at each grid value after canonicalization; values that round to
// the same bin are scored once, in first-seen order.
std::vector<MarginalDensity> density_grid(const backend::LanguageModel& model,
                                          std::string_view prompt, std::span<const double> y_grid,
                                          const numcodec::NumericFormat& fmt);

}  // namespace llmp::density
