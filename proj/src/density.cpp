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

#include "llmp/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "llmp/common.hpp"

namespace llmp::density {

namespace {

double bin_correction(int precision) { return precision * std::numbers::ln10; }

std::vector<std::string> vocabulary_with(std::string_view terminal) {
  std::vector<std::string> v;
  for (char c = '0'; c <= '9'; ++c) v.emplace_back(1, c);
  v.emplace_back(".");
  v.emplace_back("-");
  if (!terminal.empty()) v.emplace_back(terminal.substr(0, 1));
  return v;
}

double score_component(const backend::LanguageModel& model, std::string_view prompt,
                       const std::string& text, std::string_view terminal) {
  auto tokens = numcodec::tokenize_numeric(text);
  if (!terminal.empty()) tokens.emplace_back(terminal.substr(0, 1));
  const auto vocab = vocabulary_with(terminal);
  return model.score_continuation(prompt, tokens, vocab).total();
}

}  // namespace

MarginalDensity log_pdf(const backend::LanguageModel& model, std::string_view prompt, double y,
                        const numcodec::NumericFormat& fmt) {
  MarginalDensity d;
  d.text = numcodec::serialize_value(y, fmt);
  d.y = numcodec::parse_value(d.text, fmt);
  d.precision = fmt.precision;
  d.log_mass = score_component(model, prompt, d.text, fmt.terminal);
  d.log_pdf = d.log_mass + bin_correction(fmt.precision);
  return d;
}

MarginalDensity log_pdf_joint(const backend::LanguageModel& model, std::string_view prompt,
                              std::span<const double> ys, const numcodec::NumericFormat& fmt,
                              std::string_view joiner) {
  if (ys.empty()) throw Error(ErrorCode::EmptyInput, "no output values to score");
  if (ys.size() > 1 && joiner.empty())
    throw Error(ErrorCode::InvalidArgument, "multi-output scoring needs a joiner");
  MarginalDensity d;
  d.precision = fmt.precision;
  std::string context(prompt);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const std::string text = numcodec::serialize_value(ys[i], fmt);
    if (i == 0) {
      d.text = text;
      d.y = numcodec::parse_value(text, fmt);
    }
    const bool last = i + 1 == ys.size();
    d.log_mass += score_component(model, context, text, last ? std::string_view(fmt.terminal)
                                                             : joiner.substr(0, 1));
    context += text;
    context += joiner;
  }
  d.log_pdf = d.log_mass + static_cast<double>(ys.size()) * bin_correction(fmt.precision);
  return d;
}

SampleOutcome sample_value(const backend::LanguageModel& model, std::string_view prompt,
                           const backend::SamplingParams& params,
                           const numcodec::NumericFormat& fmt, int max_attempts,
                           std::uint64_t seed) {
  if (max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= 1");
  SampleOutcome out;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    ++out.attempts;
    const auto c = model.complete(prompt, params, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const bool complete_value = c.stopped || params.stop.empty();
    if (complete_value && numcodec::is_number(c.text, fmt)) {
      out.value = numcodec::parse_value(c.text, fmt);
      out.text = c.text;
      return out;
    }
    ++out.rejected;
  }
  throw Error(ErrorCode::MaxAttemptsExceeded,
              "no numeric completion in " + std::to_string(max_attempts) + " attempts");
}

SampleSet sample_values(const backend::LanguageModel& model, std::string_view prompt,
                        const backend::SamplingParams& params, const numcodec::NumericFormat& fmt,
                        int n, int max_attempts, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  if (max_attempts < n) throw Error(ErrorCode::InvalidArgument, "attempt budget below sample count");
  SampleSet set;
  std::uint64_t stream = 0;
  while (static_cast<int>(set.values.size()) < n) {
    if (set.attempts >= max_attempts)
      throw Error(ErrorCode::MaxAttemptsExceeded,
                  "only " + std::to_string(set.values.size()) + " of " + std::to_string(n) +
                      " samples in " + std::to_string(max_attempts) + " attempts");
    ++set.attempts;
    const auto c = model.complete(prompt, params, derive_seed(seed, stream++, 1));
    if ((c.stopped || params.stop.empty()) && numcodec::is_number(c.text, fmt)) {
      set.values.push_back(numcodec::parse_value(c.text, fmt));
      set.texts.push_back(c.text);
    } else {
      ++set.rejected;
    }
  }
  return set;
}

VectorOutcome sample_vector(const backend::LanguageModel& model, std::string_view prompt,
                            const backend::SamplingParams& params,
                            const numcodec::NumericFormat& fmt, std::string_view joiner,
                            std::size_t arity, int max_attempts, std::uint64_t seed) {
  if (arity == 1) {
    const auto s = sample_value(model, prompt, params, fmt, max_attempts, seed);
    return {{s.value}, s.text, s.attempts, s.rejected};
  }
  if (max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= 1");
  VectorOutcome out;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    ++out.attempts;
    const auto c = model.complete(prompt, params, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<double> values;
    bool ok = c.stopped || params.stop.empty();
    std::string_view rest = c.text;
    while (ok) {
      const auto j = rest.find(joiner);
      const auto part = rest.substr(0, j);
      if (!numcodec::is_number(part, fmt)) {
        ok = false;
        break;
      }
      values.push_back(numcodec::parse_value(part, fmt));
      if (j == std::string_view::npos) break;
      rest.remove_prefix(j + joiner.size());
    }
    if (ok && values.size() == arity) {
      out.values = std::move(values);
      out.text = c.text;
      return out;
    }
    ++out.rejected;
  }
  throw Error(ErrorCode::MaxAttemptsExceeded,
              "no well-formed " + std::to_string(arity) + "-output completion");
}

std::vector<MarginalDensity> density_grid(const backend::LanguageModel& model,
                                          std::string_view prompt, std::span<const double> y_grid,
                                          const numcodec::NumericFormat& fmt) {
  std::vector<MarginalDensity> out;
  std::vector<std::string> seen;
  for (double y : y_grid) {
    const std::string text = numcodec::serialize_value(y, fmt);
    if (std::find(seen.begin(), seen.end(), text) != seen.end()) continue;
    seen.push_back(text);
    out.push_back(log_pdf(model, prompt, numcodec::parse_value(text, fmt), fmt));
  }
  return out;
}

}  // namespace llmp::density
