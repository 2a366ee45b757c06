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

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace llmp::eval {

// Negative mean log-density, in nats.
double nll(std::span<const double> log_pdfs);

// Mean absolute error between predictive medians and true values.
double mae(std::span<const double> medians, std::span<const double> truths);

// Reported quantile levels in per-mille: 2.5%, 10%, 20%, ..., 90%, 97.5%.
inline constexpr std::array<int, 11> kQuantileLevels = {25,  100, 200, 300, 400, 500,
                                                        600, 700, 800, 900, 975};

// Nearest-rank quantile of an ascending sample: element ceil(p*n), 1-based.
double quantile_sorted(std::span<const double> sorted, int permille);

struct TargetSummary {
  std::vector<double> samples;  // ascending
  double median = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
  std::vector<std::pair<int, double>> quantiles;  // (per-mille level, value)

  double at(int permille) const;
};

TargetSummary summarize(std::span<const double> samples);

std::vector<TargetSummary> summarize(const std::vector<std::vector<double>>& samples_per_target);

}  // namespace llmp::eval
