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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llmp/numcodec.hpp"

namespace llmp::prompting {

// An input location: a numeric vector (one or more dimensions) or a
// free-text feature string.
using Key = std::variant<std::vector<double>, std::string>;

bool is_numeric(const Key& key);
std::size_t key_arity(const Key& key);  // 0 for text keys

struct Observation {
  Key key;
  std::vector<double> values;  // one entry per output
};

struct TrainingSet {
  std::vector<Observation> observations;
  std::string text;  // optional problem description

  // Throws KindMismatch when keys mix kinds, numeric arity differs, or
  // output arity differs.
  void validate() const;
};

// The six pair layouts. Values sit where the pattern shows '_'.
enum class PairFormat {
  CommaTight,         // "_,_"
  LetterPrefix,       // "x_y_"
  CommaNewline,       // "_,_\n"
  CommaSpaceNewline,  // "_, _\n"
  Paren,              // "(_, _)"
  Labeled,            // "x=_, y=_\n"
};

inline constexpr PairFormat kAllPairFormats[] = {
    PairFormat::CommaTight,        PairFormat::LetterPrefix, PairFormat::CommaNewline,
    PairFormat::CommaSpaceNewline, PairFormat::Paren,        PairFormat::Labeled};

// A pair renders as open + key + mid + values + close. Multi-dimensional keys
// and multi-output values are joined with `joiner`.
struct Grammar {
  std::string open;
  std::string mid;
  std::string close;
  std::string joiner;

  // Character that terminates a value: first of close, else first of open
  // (the next pair's prefix), else empty.
  std::string terminal() const;
};

const Grammar& grammar(PairFormat f);
std::string_view pattern(PairFormat f);
// Accepts either the pattern ("_, _\n" with a literal backslash-n or a real
// newline) or a CLI name (comma, comma-newline, compact-newline, paren,
// labeled, xy).
PairFormat parse_pair_format(std::string_view name);
std::string_view cli_name(PairFormat f);

enum class OrderKind { Sequential, Random, Distance };

struct Ordering {
  OrderKind kind = OrderKind::Distance;
  std::uint64_t seed = 0;
};

OrderKind parse_order_kind(std::string_view name);
std::string_view to_string(OrderKind kind);

// y' = a*y + b.
struct AffineScale {
  double a = 1.0;
  double b = 0.0;

  double apply(double y) const { return a * y + b; }
  double invert(double y) const { return (y - b) / a; }
  // log p(y) = log p'(y') + ln|a|
  double log_density_correction() const;
};

struct ExampleBlock {
  std::string label;
  std::vector<Observation> observations;
};

struct PromptConfig {
  PairFormat pair_format = PairFormat::CommaSpaceNewline;
  Ordering ordering{};
  std::optional<std::string> text_prefix;
  std::vector<ExampleBlock> example_blocks;
  std::optional<std::string> query_label;  // label line above the main block
  numcodec::NumericFormat format{};
  std::optional<AffineScale> scale;

  // `format` with the terminal implied by the pair format.
  numcodec::NumericFormat value_format() const;
  const Grammar& pair_grammar() const { return grammar(pair_format); }
};

// Permutation of `observations` under `ordering` relative to `target`.
// Sequential: ascending key (lexicographic over dimensions). Random: seeded
// shuffle. Distance: farthest first, nearest last. Ties keep input order.
std::vector<std::size_t> order_observations(std::span<const Observation> observations,
                                            const Key& target, const Ordering& ordering);

std::string render_key(const Key& key, const PromptConfig& cfg);
std::string render_pair(const Observation& obs, const PromptConfig& cfg);

// Prompt ending at the generation point for `target_key`.
std::string build_marginal_prompt(const PromptConfig& cfg, const TrainingSet& train,
                                  const Key& target_key);

// Conditioning set = training observations plus already-drawn targets.
// Distance ordering re-sorts the union; sequential and random order the
// training block and append the drawn targets in draw order.
std::string extend_autoregressive(const PromptConfig& cfg, const TrainingSet& train,
                                  std::span<const Observation> sampled_targets,
                                  const Key& next_key);

// Scales every output value. Throws ZeroScale when a == 0.
TrainingSet apply_scale(const TrainingSet& train, const AffineScale& scale);

// Reuses serialized pairs across many prompts over the same training set
// (the optimizer builds hundreds per trial).
class PromptBuilder {
 public:
  PromptBuilder(PromptConfig cfg, TrainingSet train);

  std::string marginal(const Key& target_key) const;
  std::string extend(std::span<const Observation> sampled_targets, const Key& next_key) const;

  const PromptConfig& config() const { return cfg_; }
  const TrainingSet& training() const { return train_; }

 private:
  std::string header() const;
  std::string generation_point(const Key& key) const;

  PromptConfig cfg_;
  TrainingSet train_;
  std::vector<std::string> rendered_;
  std::string header_;
};

}  // namespace llmp::prompting
