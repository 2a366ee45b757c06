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
#include <string>
#include <vector>

#include "llmp/backend.hpp"
#include "llmp/prompting.hpp"

// Joint predictive distributions over a set of targets. Independent mode
// multiplies per-target marginals; autoregressive mode chains conditionals,
// each prompt carrying the targets handled before it.
//
// When the prompt config carries an affine scale, the model sees scaled
// values, samples are mapped back, and log-densities are reported in the
// original units (raw model value + ln|a|).
namespace llmp::process {

enum class Mode { Independent, Autoregressive };

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode);

struct TargetSet {
  std::vector<prompting::Key> keys;
  std::vector<std::vector<double>> truths;  // empty, or one value row per key

  bool has_truths() const { return !truths.empty(); }
  std::size_t size() const { return keys.size(); }
  // Throws KindMismatch when keys or truth rows disagree with `train`.
  void validate(const prompting::TrainingSet& train) const;
};

struct JointResult {
  Mode mode = Mode::Independent;
  std::vector<double> conditionals;  // indexed by target
  double joint = 0.0;                // conditionals summed in target order
  std::vector<std::size_t> order;    // order the targets were conditioned in
};

// Targets ascending by distance to their nearest training input; ties keep
// input order. Text keys keep input order.
std::vector<std::size_t> nearest_first_order(const prompting::TrainingSet& train,
                                             const TargetSet& targets);

struct RunOptions {
  int threads = 1;  // concurrent independent evaluations
};

JointResult joint_loglik_independent(const backend::LanguageModel& model,
                                     const prompting::PromptConfig& cfg,
                                     const prompting::TrainingSet& train, const TargetSet& targets,
                                     const RunOptions& run = {});

// Teacher forcing: conditional t sees the true values of the targets
// handled before it. `order` defaults to nearest_first_order.
JointResult joint_loglik_autoregressive(const backend::LanguageModel& model,
                                        const prompting::PromptConfig& cfg,
                                        const prompting::TrainingSet& train,
                                        const TargetSet& targets,
                                        std::optional<std::vector<std::size_t>> order = std::nullopt);

struct PathSample {
  std::vector<std::vector<double>> values;  // [target][output]; empty when failed
  std::uint64_t seed = 0;
  bool failed = false;
  int rejected = 0;  // non-numeric completions discarded along the way
  int restarts = 0;  // whole-path resamples after a position ran out of retries
};

struct SampleOptions {
  Mode mode = Mode::Independent;
  int paths = 50;
  backend::SamplingParams params{};  // stop is replaced by the pair terminal
  std::uint64_t seed = 0;
  int retry_cap = 10;  // attempts per position
  std::optional<std::vector<std::size_t>> order;  // autoregressive only
  int threads = 1;
};

// Paths are returned in index order whatever the thread count; path s uses
// seeds derived from (seed, s) only.
std::vector<PathSample> sample_paths(const backend::LanguageModel& model,
                                     const prompting::PromptConfig& cfg,
                                     const prompting::TrainingSet& train, const TargetSet& targets,
                                     const SampleOptions& options);

// Samples of output `output` at each target, skipping failed paths.
std::vector<std::vector<double>> samples_by_target(const std::vector<PathSample>& paths,
                                                   std::size_t target_count,
                                                   std::size_t output = 0);

struct GapResult {
  std::vector<std::string> labels;  // "distance", "random-0", ...
  std::vector<double> joints;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double spread = 0.0;  // max - min
};

// Joint log-likelihood under the distance ordering (numeric keys only) and
// k seeded random permutations of the targets.
GapResult exchangeability_gap(const backend::LanguageModel& model,
                              const prompting::PromptConfig& cfg,
                              const prompting::TrainingSet& train, const TargetSet& targets,
                              int k, std::uint64_t seed, Mode mode = Mode::Autoregressive);

}  // namespace llmp::process
