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
#include <vector>

#include "llmp/prompting.hpp"

// Zero-mean Gaussian-process regression with a squared-exponential kernel
//   k(x, x') = signal_variance * exp(-|x - x'|^2 / (2 * length_scale^2))
// and Gaussian observation noise. Hyperparameters maximize the log marginal
// likelihood.
namespace llmp::gp {

struct Hyperparams {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.0;
};

// Inputs are row vectors of equal dimension.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  std::size_t dims() const { return x.empty() ? 0 : x.front().size(); }
};

// Relative diagonal jitter added before factorization.
inline constexpr double kJitter = 1e-8;

double log_marginal_likelihood(const Dataset& data, const Hyperparams& h);

struct FitOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
};

// Multi-start coordinate ascent over (log length_scale, log signal_variance,
// log noise_variance). The first start is data-derived, the rest are seeded
// draws from the search box.
Hyperparams fit(const Dataset& data, const FitOptions& options = {});

// Single local search from `start`.
Hyperparams refine(const Dataset& data, const Hyperparams& start);

struct Posterior {
  std::vector<double> mean;
  std::vector<double> variance;             // latent function variance
  std::vector<double> predictive_variance;  // variance + noise_variance
  std::vector<double> log_pdf;              // at truths, when given
};

Posterior predict(const Hyperparams& h, const Dataset& data,
                  std::span<const std::vector<double>> targets,
                  std::optional<std::span<const double>> truths = std::nullopt);

// One independent GP per output dimension of a numeric training set.
struct MultiOutputModel {
  std::vector<Hyperparams> per_output;
};

MultiOutputModel fit_multi(const prompting::TrainingSet& train, const FitOptions& options = {});

// Per-output posteriors; truths[j] (if given) holds output j at every target.
std::vector<Posterior> predict_multi(const MultiOutputModel& model,
                                     const prompting::TrainingSet& train,
                                     std::span<const std::vector<double>> targets,
                                     const std::vector<std::vector<double>>* truths = nullptr);

Dataset dataset_for_output(const prompting::TrainingSet& train, std::size_t output);

}  // namespace llmp::gp
