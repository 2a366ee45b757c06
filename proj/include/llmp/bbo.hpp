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
#include "llmp/common.hpp"
#include "llmp/prompting.hpp"

namespace llmp::bbo {

// Benchmark objectives in maximization form. Formulas are listed in
// docs/benchmarks.md.
enum class Benchmark { Sinusoidal, Gramacy, Branin, Bohachevsky, Goldstein, Hartmann3 };

struct BenchmarkInfo {
  Benchmark id;
  std::string_view name;
  std::size_t dims;
  std::vector<double> lower;
  std::vector<double> upper;
  double known_max;  // reference optimum, 3 decimals
};

const BenchmarkInfo& info(Benchmark b);
const std::vector<Benchmark>& all_benchmarks();
Benchmark parse_benchmark(std::string_view name);  // UnknownFunction

// Throws WrongDimension or OutOfBounds.
double eval_benchmark(Benchmark b, std::span<const double> x);

struct GridMax {
  std::vector<double> x;
  double value = 0.0;
};

// Maximum over a regular grid with `points` nodes per dimension, then
// `refinements` rounds of a 21-node grid over shrinking boxes around the
// incumbent.
GridMax grid_maximum(Benchmark b, std::size_t points, int refinements = 12);

struct OptConfig {
  int trials = 100;
  int candidates = 500;
  int cold_start = 7;
  std::vector<double> lower;
  std::vector<double> upper;
  std::uint64_t seed = 0;
  prompting::PromptConfig prompt{};
  backend::SamplingParams params{};
  int retry_cap = 10;
  int threads = 1;

  void validate() const;
};

OptConfig default_config(Benchmark b);

struct TrialRecord {
  int trial = 0;  // 1-based
  std::vector<double> x;
  double y = 0.0;
  double best_y = 0.0;
  bool cold_start = false;
  bool fallback = false;  // model step failed, uniform query used instead
  std::string failure;
};

struct OptTrace {
  std::vector<TrialRecord> trials;
  std::vector<double> max_x;
  double max_y = 0.0;

  // One {"trial","x","y","best_y"} object per line.
  std::string to_jsonl() const;
};

// Seeded uniform draw in the box, rounded to the prompt key precision so
// the queried point is the one the model sees.
std::vector<double> uniform_point(const OptConfig& cfg, Rng& rng);

// Cold-start queries as optimize would draw them.
std::vector<std::vector<double>> cold_start_points(const OptConfig& cfg);

// Thompson sampling: after the cold start, each trial draws `candidates`
// uniform points, samples one value per point from its marginal prompt over
// all observations so far, and queries the objective at the largest sample.
OptTrace optimize(const backend::LanguageModel& model, const backend::Objective& objective,
                  const OptConfig& cfg);

}  // namespace llmp::bbo
