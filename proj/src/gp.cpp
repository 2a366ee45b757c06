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

#include "llmp/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "llmp/common.hpp"
#include "llmp/simd.hpp"

namespace llmp::gp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Row-major input rows to the dimension-major layout the kernels expect.
std::vector<double> to_soa(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = n ? rows.front().size() : 0;
  std::vector<double> soa(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) soa[k * n + i] = rows[i][k];
  return soa;
}

// Pairwise squared distances, computed once per data set.
Eigen::MatrixXd distance_matrix(const Dataset& data) {
  const std::size_t n = data.size();
  const auto soa = to_soa(data.x);
  Eigen::MatrixXd d2(n, n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    simd::squared_distances(soa, n, data.x[i], row);
    for (std::size_t j = 0; j < n; ++j) d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return d2;
}

// exp() of anything below this is denormal or zero; flushing it keeps the
// factorization off the slow denormal path.
constexpr double kExpFloor = -700.0;

double kernel_value(double d2, double inv, double signal_variance) {
  const double a = -d2 * inv;
  return a < kExpFloor ? 0.0 : signal_variance * std::exp(a);
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& d2, const Hyperparams& h) {
  const double inv = 1.0 / (2.0 * h.length_scale * h.length_scale);
  const Eigen::ArrayXXd a = d2.array() * -inv;
  Eigen::MatrixXd k = (a < kExpFloor).select(0.0, a.exp() * h.signal_variance);
  k.diagonal().array() += h.noise_variance + kJitter * h.signal_variance;
  return k;
}

double lml_from_distances(const Eigen::MatrixXd& d2, const Eigen::VectorXd& y, const Hyperparams& h) {
  const Eigen::LLT<Eigen::MatrixXd> llt(kernel_from_distances(d2, h));
  if (llt.info() != Eigen::Success) return kNegInf;
  const Eigen::VectorXd alpha = llt.solve(y);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  const double v = -0.5 * y.dot(alpha) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
  return std::isfinite(v) ? v : kNegInf;
}

void check_data(const Dataset& data) {
  if (data.x.size() != data.y.size())
    throw Error(ErrorCode::LengthMismatch, "inputs and outputs differ in length");
  if (data.size() == 0) throw Error(ErrorCode::DegenerateData, "no training points");
  const std::size_t d = data.dims();
  if (d == 0) throw Error(ErrorCode::DegenerateData, "zero-dimensional inputs");
  for (const auto& row : data.x)
    if (row.size() != d) throw Error(ErrorCode::KindMismatch, "input rows differ in dimension");
  for (double v : data.y)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite training output");
}

// Hyperparameter search needs a spread of inputs to scale its box.
void check_fittable(const Dataset& data) {
  check_data(data);
  if (data.size() < 2) throw Error(ErrorCode::DegenerateData, "need at least two training points");
  bool distinct = false;
  for (const auto& row : data.x)
    if (row != data.x.front()) distinct = true;
  if (!distinct) throw Error(ErrorCode::DegenerateData, "all training inputs are identical");
}

// Search box in log space, scaled to the data.
struct Box {
  std::array<double, 3> lo;
  std::array<double, 3> hi;
  double span = 1.0;
  double power = 1.0;
};

Box search_box(const Dataset& data) {
  double span = 0.0;
  for (std::size_t k = 0; k < data.dims(); ++k) {
    double lo = data.x.front()[k], hi = lo;
    for (const auto& row : data.x) {
      lo = std::min(lo, row[k]);
      hi = std::max(hi, row[k]);
    }
    span = std::max(span, hi - lo);
  }
  double power = 0.0;
  for (double v : data.y) power += v * v;
  power = std::max(power / static_cast<double>(data.size()), 1e-12);
  return {{std::log(1e-3 * span), std::log(1e-6 * power), std::log(1e-10 * power)},
          {std::log(1e3 * span), std::log(1e4 * power), std::log(10.0 * power)},
          span,
          power};
}

Hyperparams from_log(const std::array<double, 3>& t) {
  return {std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
}

std::array<double, 3> to_log(const Hyperparams& h, const Box& box) {
  std::array<double, 3> t{std::log(h.length_scale), std::log(h.signal_variance),
                          std::log(std::max(h.noise_variance, 1e-300))};
  for (int i = 0; i < 3; ++i) t[i] = std::clamp(t[i], box.lo[i], box.hi[i]);
  return t;
}

// Pattern search: each coordinate tries +/- step and keeps moving while the
// objective improves; the step halves after a pass without progress.
std::array<double, 3> coordinate_ascent(const Eigen::MatrixXd& d2, const Eigen::VectorXd& y,
                                        const Box& box, std::array<double, 3> t, double& best) {
  best = lml_from_distances(d2, y, from_log(t));
  double step = 1.0;
  int evaluations = 0;
  while (step > 1e-7 && evaluations < 4000) {
    bool moved = false;
    for (int i = 0; i < 3; ++i) {
      for (double dir : {1.0, -1.0}) {
        bool improved_here = false;
        for (;;) {
          auto cand = t;
          cand[i] = std::clamp(t[i] + dir * step, box.lo[i], box.hi[i]);
          if (cand[i] == t[i]) break;
          const double v = lml_from_distances(d2, y, from_log(cand));
          ++evaluations;
          // Gains below the tolerance count as flat, so plateaus end the search.
          if (!(v > best + 1e-10 * (1.0 + std::fabs(best)))) break;
          t = cand;
          best = v;
          improved_here = moved = true;
        }
        if (improved_here) break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return t;
}

Eigen::VectorXd to_vector(const std::vector<double>& y) {
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

}  // namespace

double log_marginal_likelihood(const Dataset& data, const Hyperparams& h) {
  check_data(data);
  return lml_from_distances(distance_matrix(data), to_vector(data.y), h);
}

Hyperparams fit(const Dataset& data, const FitOptions& options) {
  check_fittable(data);
  const auto d2 = distance_matrix(data);
  const auto y = to_vector(data.y);
  const Box box = search_box(data);

  Rng rng(options.seed);
  std::array<double, 3> best_t{};
  double best = kNegInf;
  const int restarts = std::max(options.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    std::array<double, 3> start;
    if (r == 0) {
      // Length scale a fifth of the input span, signal at the output power,
      // noise a hundredth of it.
      start = {std::log(0.2 * box.span), std::log(box.power), std::log(0.01 * box.power)};
    } else {
      for (int i = 0; i < 3; ++i) start[i] = rng.uniform(box.lo[i], box.hi[i]);
    }
    double v = kNegInf;
    const auto t = coordinate_ascent(d2, y, box, start, v);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  if (!std::isfinite(best))
    throw Error(ErrorCode::NumericalFailure, "no hyperparameters gave a positive-definite kernel");
  return from_log(best_t);
}

Hyperparams refine(const Dataset& data, const Hyperparams& start) {
  check_fittable(data);
  const auto d2 = distance_matrix(data);
  const auto y = to_vector(data.y);
  const Box box = search_box(data);
  double v = kNegInf;
  const auto t = coordinate_ascent(d2, y, box, to_log(start, box), v);
  if (!std::isfinite(v)) throw Error(ErrorCode::NumericalFailure, "kernel not positive definite");
  return from_log(t);
}

Posterior predict(const Hyperparams& h, const Dataset& data,
                  std::span<const std::vector<double>> targets,
                  std::optional<std::span<const double>> truths) {
  check_data(data);
  if (truths && truths->size() != targets.size())
    throw Error(ErrorCode::LengthMismatch, "truths and targets differ in length");
  const std::size_t n = data.size();
  const Eigen::LLT<Eigen::MatrixXd> llt(kernel_from_distances(distance_matrix(data), h));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "kernel matrix is not positive definite");
  const Eigen::VectorXd alpha = llt.solve(to_vector(data.y));
  const auto soa = to_soa(data.x);
  const double inv = 1.0 / (2.0 * h.length_scale * h.length_scale);

  Posterior post;
  std::vector<double> dist(n);
  Eigen::VectorXd kstar(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t].size() != data.dims())
      throw Error(ErrorCode::KindMismatch, "target dimension differs from training inputs");
    simd::squared_distances(soa, n, targets[t], dist);
    for (std::size_t i = 0; i < n; ++i)
      kstar(static_cast<Eigen::Index>(i)) = kernel_value(dist[i], inv, h.signal_variance);
    const double mean = simd::dot({kstar.data(), n}, {alpha.data(), n});
    const Eigen::VectorXd v = llt.matrixL().solve(kstar);
    const double var = std::max(h.signal_variance - v.squaredNorm(), 0.0);
    post.mean.push_back(mean);
    post.variance.push_back(var);
    post.predictive_variance.push_back(var + h.noise_variance);
    if (truths) {
      const double s2 = std::max(var + h.noise_variance, std::numeric_limits<double>::min());
      const double r = (*truths)[t] - mean;
      post.log_pdf.push_back(-0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * r * r / s2);
    }
  }
  return post;
}

Dataset dataset_for_output(const prompting::TrainingSet& train, std::size_t output) {
  Dataset d;
  for (const auto& obs : train.observations) {
    if (!prompting::is_numeric(obs.key))
      throw Error(ErrorCode::KindMismatch, "the GP baseline needs numeric keys");
    if (output >= obs.values.size()) throw Error(ErrorCode::KindMismatch, "output index out of range");
    d.x.push_back(std::get<std::vector<double>>(obs.key));
    d.y.push_back(obs.values[output]);
  }
  return d;
}

MultiOutputModel fit_multi(const prompting::TrainingSet& train, const FitOptions& options) {
  train.validate();
  if (train.observations.empty()) throw Error(ErrorCode::DegenerateData, "empty training set");
  MultiOutputModel m;
  const std::size_t outputs = train.observations.front().values.size();
  for (std::size_t j = 0; j < outputs; ++j) {
    FitOptions o = options;
    o.seed = derive_seed(options.seed, j);
    m.per_output.push_back(fit(dataset_for_output(train, j), o));
  }
  return m;
}

std::vector<Posterior> predict_multi(const MultiOutputModel& model,
                                     const prompting::TrainingSet& train,
                                     std::span<const std::vector<double>> targets,
                                     const std::vector<std::vector<double>>* truths) {
  std::vector<Posterior> out;
  for (std::size_t j = 0; j < model.per_output.size(); ++j) {
    std::optional<std::span<const double>> t;
    if (truths) t = std::span<const double>((*truths)[j]);
    out.push_back(predict(model.per_output[j], dataset_for_output(train, j), targets, t));
  }
  return out;
}

}  // namespace llmp::gp
