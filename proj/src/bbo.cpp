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

#include "llmp/bbo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <json.hpp>

#include "llmp/density.hpp"
#include "llmp/simd.hpp"
#include "parallel.hpp"

namespace llmp::bbo {

namespace {

constexpr double kPi = std::numbers::pi;

double sinusoidal(std::span<const double> x) { return -(std::cos(x[0]) + std::sin(3.0 * x[0])); }

double gramacy(std::span<const double> x) {
  const double v = x[0];
  return -(std::sin(10.0 * kPi * v) / (2.0 * v) + std::pow(v - 1.0, 4));
}

// Scaled by 1/10 after negation.
double branin(std::span<const double> x) {
  const double b = 5.1 / (4.0 * kPi * kPi);
  const double c = 5.0 / kPi;
  const double t = 1.0 / (8.0 * kPi);
  const double u = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return -(u * u + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0) / 10.0;
}

double bohachevsky(std::span<const double> x) {
  return -(x[0] * x[0] + 2.0 * x[1] * x[1] - 0.3 * std::cos(3.0 * kPi * x[0]) -
           0.4 * std::cos(4.0 * kPi * x[1]) + 0.7);
}

double goldstein(std::span<const double> x) {
  const double a = x[0], b = x[1];
  const double p = 1.0 + (a + b + 1.0) * (a + b + 1.0) *
                             (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
  const double q = 30.0 + (2.0 * a - 3.0 * b) * (2.0 * a - 3.0 * b) *
                              (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
  return -p * q;
}

double hartmann3(std::span<const double> x) {
  static constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
  static constexpr double A[4][3] = {{3, 10, 30}, {0.1, 10, 35}, {3, 10, 30}, {0.1, 10, 35}};
  static constexpr double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                     {0.4699, 0.4387, 0.7470},
                                     {0.1091, 0.8732, 0.5547},
                                     {0.0381, 0.5743, 0.8828}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 3; ++j) e += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    sum += alpha[i] * std::exp(-e);
  }
  return sum;
}

const std::vector<BenchmarkInfo>& table() {
  static const std::vector<BenchmarkInfo> t = {
      {Benchmark::Sinusoidal, "sinusoidal", 1, {0.0}, {2.0 * kPi}, 1.879},
      {Benchmark::Gramacy, "gramacy", 1, {0.5}, {2.5}, 0.869},
      {Benchmark::Branin, "branin", 2, {-5.0, 0.0}, {10.0, 15.0}, -0.040},
      {Benchmark::Bohachevsky, "bohachevsky", 2, {-100.0, -100.0}, {100.0, 100.0}, 0.0},
      {Benchmark::Goldstein, "goldstein", 2, {-2.0, -2.0}, {2.0, 2.0}, -3.0},
      {Benchmark::Hartmann3, "hartmann3", 3, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 3.863},
  };
  return t;
}

double eval_unchecked(Benchmark b, std::span<const double> x) {
  switch (b) {
    case Benchmark::Sinusoidal: return sinusoidal(x);
    case Benchmark::Gramacy: return gramacy(x);
    case Benchmark::Branin: return branin(x);
    case Benchmark::Bohachevsky: return bohachevsky(x);
    case Benchmark::Goldstein: return goldstein(x);
    case Benchmark::Hartmann3: return hartmann3(x);
  }
  return 0.0;
}

// Evaluates every node of a grid with `points` nodes per dimension over
// [lo, hi]; keeps the first maximum in row-major order.
GridMax scan(Benchmark b, const std::vector<double>& lo, const std::vector<double>& hi,
             std::size_t points) {
  const std::size_t d = lo.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  GridMax best{{}, -std::numeric_limits<double>::infinity()};
  for (;;) {
    for (std::size_t k = 0; k < d; ++k)
      x[k] = points == 1 ? lo[k]
                         : lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx[k]) /
                                       static_cast<double>(points - 1);
    const double v = eval_unchecked(b, x);
    if (v > best.value) best = {x, v};
    std::size_t k = 0;
    while (k < d && ++idx[k] == points) idx[k++] = 0;
    if (k == d) break;
  }
  return best;
}

}  // namespace

const BenchmarkInfo& info(Benchmark b) { return table()[static_cast<std::size_t>(b)]; }

const std::vector<Benchmark>& all_benchmarks() {
  static const std::vector<Benchmark> all = {Benchmark::Sinusoidal,  Benchmark::Gramacy,
                                             Benchmark::Branin,      Benchmark::Bohachevsky,
                                             Benchmark::Goldstein,   Benchmark::Hartmann3};
  return all;
}

Benchmark parse_benchmark(std::string_view name) {
  for (const auto& e : table())
    if (e.name == name) return e.id;
  throw Error(ErrorCode::UnknownFunction, "unknown benchmark '" + std::string(name) + "'");
}

double eval_benchmark(Benchmark b, std::span<const double> x) {
  const auto& bi = info(b);
  if (x.size() != bi.dims)
    throw Error(ErrorCode::WrongDimension, std::string(bi.name) + " takes " +
                                               std::to_string(bi.dims) + " inputs, got " +
                                               std::to_string(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!(x[k] >= bi.lower[k] && x[k] <= bi.upper[k]))
      throw Error(ErrorCode::OutOfBounds, std::string(bi.name) + " input " + std::to_string(k) +
                                              " outside its domain");
  return eval_unchecked(b, x);
}

GridMax grid_maximum(Benchmark b, std::size_t points, int refinements) {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least two points per axis");
  const auto& bi = info(b);
  GridMax best = scan(b, bi.lower, bi.upper, points);
  std::vector<double> half(bi.dims);
  for (std::size_t k = 0; k < bi.dims; ++k)
    half[k] = (bi.upper[k] - bi.lower[k]) / static_cast<double>(points - 1);
  for (int r = 0; r < refinements; ++r) {
    std::vector<double> lo(bi.dims), hi(bi.dims);
    for (std::size_t k = 0; k < bi.dims; ++k) {
      lo[k] = std::max(bi.lower[k], best.x[k] - half[k]);
      hi[k] = std::min(bi.upper[k], best.x[k] + half[k]);
    }
    const GridMax local = scan(b, lo, hi, 21);
    if (local.value > best.value) best = local;
    for (double& h : half) h /= 5.0;
  }
  return best;
}

void OptConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (candidates < 1) throw Error(ErrorCode::InvalidArgument, "candidates must be >= 1");
  if (cold_start < 1 || cold_start >= trials)
    throw Error(ErrorCode::InvalidArgument, "cold start must be in [1, trials)");
  if (lower.empty() || lower.size() != upper.size())
    throw Error(ErrorCode::WrongDimension, "bounds must be non-empty and of equal length");
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(lower[k] < upper[k]))
      throw Error(ErrorCode::InvalidArgument, "bounds must be finite with lower < upper");
  if (retry_cap < 1) throw Error(ErrorCode::InvalidArgument, "retry cap must be >= 1");
}

OptConfig default_config(Benchmark b) {
  OptConfig cfg;
  cfg.lower = info(b).lower;
  cfg.upper = info(b).upper;
  return cfg;
}

std::vector<double> uniform_point(const OptConfig& cfg, Rng& rng) {
  std::vector<double> x(cfg.lower.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = numcodec::round_value(rng.uniform(cfg.lower[k], cfg.upper[k]),
                                           cfg.prompt.format.precision);
    x[k] = std::clamp(v, cfg.lower[k], cfg.upper[k]);
  }
  return x;
}

std::vector<std::vector<double>> cold_start_points(const OptConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 0));
  std::vector<std::vector<double>> out;
  for (int i = 0; i < cfg.cold_start; ++i) out.push_back(uniform_point(cfg, rng));
  return out;
}

std::string OptTrace::to_jsonl() const {
  std::string out;
  for (const auto& t : trials) {
    nlohmann::ordered_json j;
    j["trial"] = t.trial;
    j["x"] = t.x;
    j["y"] = t.y;
    j["best_y"] = t.best_y;
    out += j.dump();
    out += '\n';
  }
  return out;
}

OptTrace optimize(const backend::LanguageModel& model, const backend::Objective& objective,
                  const OptConfig& cfg) {
  cfg.validate();
  OptTrace trace;
  prompting::TrainingSet observed;
  auto record = [&](int trial, std::vector<double> x, bool cold, bool fallback, std::string failure) {
    const double y = objective(x);
    observed.observations.push_back({x, {y}});
    TrialRecord r{trial, std::move(x), y, y, cold, fallback, std::move(failure)};
    if (!trace.trials.empty()) r.best_y = std::max(y, trace.trials.back().best_y);
    if (trace.trials.empty() || y > trace.max_y) {
      trace.max_y = y;
      trace.max_x = r.x;
    }
    trace.trials.push_back(std::move(r));
  };

  for (auto& x : cold_start_points(cfg)) record(static_cast<int>(trace.trials.size()) + 1, x, true, false, "");

  backend::SamplingParams params = cfg.params;
  params.stop = cfg.prompt.value_format().terminal;
  const auto fmt = cfg.prompt.value_format();
  const auto m = static_cast<std::size_t>(cfg.candidates);
  std::vector<std::vector<double>> candidates(m);
  std::vector<double> draws(m);

  for (int trial = cfg.cold_start + 1; trial <= cfg.trials; ++trial) {
    Rng rng(derive_seed(cfg.seed, 1, static_cast<std::uint64_t>(trial)));
    for (auto& c : candidates) c = uniform_point(cfg, rng);
    std::string failure;
    try {
      const prompting::PromptBuilder builder(cfg.prompt, observed);
      detail::parallel_for(m, cfg.threads, [&](std::size_t i) {
        const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), i + 1);
        try {
          draws[i] = density::sample_value(model, builder.marginal(candidates[i]), params, fmt,
                                           cfg.retry_cap, seed)
                         .value;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MaxAttemptsExceeded) throw;
          draws[i] = -std::numeric_limits<double>::infinity();
        }
      });
      if (std::none_of(draws.begin(), draws.end(), [](double v) { return std::isfinite(v); }))
        failure = "no candidate produced a numeric sample";
    } catch (const Error& e) {
      failure = e.what();
    }
    if (failure.empty()) {
      record(trial, candidates[simd::argmax(draws)], false, false, "");
    } else {
      record(trial, uniform_point(cfg, rng), false, true, failure);
    }
  }
  return trace;
}

}  // namespace llmp::bbo
