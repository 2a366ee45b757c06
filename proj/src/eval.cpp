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

#include "llmp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llmp/common.hpp"

namespace llmp::eval {

double nll(std::span<const double> log_pdfs) {
  if (log_pdfs.empty()) throw Error(ErrorCode::EmptyInput, "nll of no log-densities");
  double sum = 0.0;
  for (double v : log_pdfs) sum += v;
  return -sum / static_cast<double>(log_pdfs.size());
}

double mae(std::span<const double> medians, std::span<const double> truths) {
  if (medians.size() != truths.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(medians.size()) + " medians vs " +
                                               std::to_string(truths.size()) + " truths");
  if (medians.empty()) throw Error(ErrorCode::EmptyInput, "mae of no targets");
  double sum = 0.0;
  for (std::size_t i = 0; i < medians.size(); ++i) sum += std::fabs(medians[i] - truths[i]);
  return sum / static_cast<double>(medians.size());
}

double quantile_sorted(std::span<const double> sorted, int permille) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of no samples");
  const auto n = static_cast<long long>(sorted.size());
  long long rank = (static_cast<long long>(permille) * n + 999) / 1000;
  rank = std::clamp(rank, 1LL, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

double TargetSummary::at(int permille) const { return quantile_sorted(samples, permille); }

TargetSummary summarize(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "summary of no samples");
  TargetSummary s;
  s.samples.assign(samples.begin(), samples.end());
  std::sort(s.samples.begin(), s.samples.end());
  s.median = quantile_sorted(s.samples, 500);
  s.lower = quantile_sorted(s.samples, 25);
  s.upper = quantile_sorted(s.samples, 975);
  for (int level : kQuantileLevels) s.quantiles.emplace_back(level, quantile_sorted(s.samples, level));
  return s;
}

std::vector<TargetSummary> summarize(const std::vector<std::vector<double>>& samples_per_target) {
  std::vector<TargetSummary> out;
  out.reserve(samples_per_target.size());
  for (const auto& s : samples_per_target) out.push_back(summarize(s));
  return out;
}

}  // namespace llmp::eval
