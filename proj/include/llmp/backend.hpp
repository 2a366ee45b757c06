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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmp/numcodec.hpp"
#include "llmp/prompting.hpp"

namespace llmp::backend {

struct SamplingParams {
  double temperature = 1.0;
  double top_p = 1.0;
  std::string stop = "\n";  // terminal separator; empty means none
  int max_tokens = 16;

  void validate() const;
};

struct Completion {
  std::string text;      // stop sequence excluded
  bool stopped = false;  // true when generation ended on the stop sequence
};

// Per-position log-probabilities over the numeric vocabulary for a scored
// continuation. Rows are renormalized after masking out every token that is
// not in the vocabulary.
struct TokenScores {
  std::vector<std::string> vocabulary;
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> log_probs;  // [position][vocabulary index]
  std::vector<double> token_log_probs;         // chosen token at each position

  double total() const;
};

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual Completion complete(std::string_view prompt, const SamplingParams& params,
                              std::uint64_t seed) const = 0;

  // Position t conditions on prompt + continuation[0..t). Every continuation
  // token must belong to `vocabulary`.
  virtual TokenScores score_continuation(std::string_view prompt,
                                         std::span<const std::string> continuation,
                                         std::span<const std::string> vocabulary) const = 0;

  virtual std::string identity() const = 0;
};

// Probabilities over whole tokens, in a fixed order (the order is part of
// the sampling contract: ties and cumulative sums walk it front to back).
using TokenDistribution = std::vector<std::pair<std::string, double>>;

// Temperature rescales log-probabilities by 1/temperature; top-p keeps the
// smallest most-probable prefix whose mass reaches top_p. Zero-probability
// tokens are dropped.
TokenDistribution apply_sampling(const TokenDistribution& dist, const SamplingParams& params);

// Probabilities restricted to `vocabulary` and renormalized. All zeros when
// the vocabulary carries no mass.
std::vector<double> mask_to_vocabulary(const TokenDistribution& dist,
                                       std::span<const std::string> vocabulary);

// Base for in-process models defined by a next-token distribution.
class DistributionModel : public LanguageModel {
 public:
  virtual TokenDistribution next_token(std::string_view context) const = 0;

  Completion complete(std::string_view prompt, const SamplingParams& params,
                      std::uint64_t seed) const override;
  TokenScores score_continuation(std::string_view prompt,
                                 std::span<const std::string> continuation,
                                 std::span<const std::string> vocabulary) const override;
};

// Context-free model over the 13-token numeric vocabulary.
class UniformDigitLM final : public DistributionModel {
 public:
  explicit UniformDigitLM(std::string terminal = "\n");
  // Weights need not be normalized; tokens outside the numeric vocabulary
  // are rejected.
  UniformDigitLM(std::map<std::string, double> weights, std::string terminal);

  TokenDistribution next_token(std::string_view context) const override;
  std::string identity() const override { return "mock:uniform"; }

 private:
  TokenDistribution dist_;
};

// Next-token distribution looked up by the longest table suffix of the
// context, with a fallback when no suffix matches.
class TableLM final : public DistributionModel {
 public:
  explicit TableLM(TokenDistribution fallback);

  TableLM& add(std::string suffix, TokenDistribution dist);

  // {"fallback": {"tok": p, ...}, "entries": [{"suffix": "...", "dist": {...}}]}
  static TableLM from_json_text(std::string_view text);

  TokenDistribution next_token(std::string_view context) const override;
  std::string identity() const override { return "mock:table"; }

 private:
  TokenDistribution fallback_;
  std::vector<std::pair<std::string, TokenDistribution>> entries_;
};

using Objective = std::function<double(std::span<const double>)>;

// Reads the query key from a prompt that ends at a generation point and
// answers with serialize(f(x) + sigma*z). Scoring uses the matching
// discretized Gaussian (a point mass when sigma == 0).
class CheatFunctionBackend final : public DistributionModel {
 public:
  CheatFunctionBackend(Objective f, double sigma, prompting::PairFormat pair_format,
                       numcodec::NumericFormat format, std::string name = "f");

  Completion complete(std::string_view prompt, const SamplingParams& params,
                      std::uint64_t seed) const override;
  TokenDistribution next_token(std::string_view context) const override;
  std::string identity() const override { return "mock:cheat:" + name_; }

  // Parses the key at the generation point and returns it with the partial
  // value generated after it. Empty optional when the context does not end
  // at a generation point.
  struct Query {
    std::vector<double> x;
    std::string partial;
  };
  std::optional<Query> parse_query(std::string_view context) const;

 private:
  std::vector<std::pair<std::string, double>> candidates(double mean) const;

  Objective f_;
  double sigma_;
  prompting::Grammar grammar_;
  numcodec::NumericFormat format_;
  std::string name_;
};

}  // namespace llmp::backend
