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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "llmp/common.hpp"
#include "llmp/gp.hpp"
#include "oracles.hpp"

using namespace llmp;
using namespace llmp::gp;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d) {
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(-3, 3);
    double f = 0.0;
    for (double v : x) f += std::sin(v);
    data.x.push_back(x);
    data.y.push_back(f + 0.1 * rng.normal());
  }
  return data;
}

double sample_variance(const std::vector<double>& y) {
  double m = 0.0;
  for (double v : y) m += v;
  m /= static_cast<double>(y.size());
  double s = 0.0;
  for (double v : y) s += (v - m) * (v - m);
  return s / static_cast<double>(y.size() - 1);
}

}  // namespace

TEST_CASE("one training point: closed-form posterior") {
  const Dataset data{{{0.0}}, {1.0}};
  const Hyperparams h{1.0, 1.0, 0.0};
  const std::vector<std::vector<double>> xs = {{1.0}};
  const auto p = predict(h, data, xs);
  CHECK(std::fabs(p.mean[0] - std::exp(-0.5)) <= 1e-8);
  CHECK(std::fabs(p.variance[0] - (1.0 - std::exp(-1.0))) <= 1e-8);
  CHECK(p.mean[0] == doctest::Approx(0.60653).epsilon(1e-5));
  CHECK(p.variance[0] == doctest::Approx(0.63212).epsilon(1e-5));
  CHECK(p.predictive_variance[0] == p.variance[0]);
}

TEST_CASE("one training point: log marginal likelihood") {
  const Dataset data{{{0.3}}, {1.2}};
  const Hyperparams h{0.7, 2.0, 0.5};
  const double s = 2.0 * (1 + kJitter) + 0.5;
  const double expect = -0.5 * 1.44 / s - 0.5 * std::log(s) - 0.5 * std::log(2 * std::numbers::pi);
  CHECK(log_marginal_likelihood(data, h) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("ten points: posterior equals the dense solve") {
  Rng rng(12);
  for (std::size_t d : {1u, 2u, 3u}) {
    const auto data = random_dataset(rng, 10, d);
    const Hyperparams h{1.3, 0.8, 0.01};
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 7; ++i) {
      std::vector<double> x(d);
      for (double& v : x) v = rng.uniform(-4, 4);
      xs.push_back(x);
    }
    std::vector<double> truths(xs.size(), 0.25);
    const auto p = predict(h, data, xs, truths);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto o = oracle::gp_posterior(data.x, data.y, 1.3, 0.8, 0.01, kJitter, xs[i]);
      CHECK(std::fabs(p.mean[i] - o.mean) <= 1e-8);
      CHECK(std::fabs(p.variance[i] - o.variance) <= 1e-8);
      const double v = o.variance + 0.01;
      const double lp = -0.5 * std::log(2 * std::numbers::pi * v) - 0.5 * (0.25 - o.mean) * (0.25 - o.mean) / v;
      CHECK(std::fabs(p.log_pdf[i] - lp) <= 1e-8);
    }
  }
}

TEST_CASE("property: latent variance lies in [0, signal variance]") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = random_dataset(rng, 2 + rng.below(15), 1 + rng.below(3));
    const Hyperparams h{rng.uniform(0.2, 3), rng.uniform(0.1, 4), rng.uniform(0, 0.5)};
    std::vector<std::vector<double>> xs(5, std::vector<double>(data.dims()));
    for (auto& x : xs)
      for (double& v : x) v = rng.uniform(-5, 5);
    const auto p = predict(h, data, xs);
    for (double v : p.variance) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= h.signal_variance * (1 + 1e-12));
    }
  }
}

TEST_CASE("fit: noiseless linear data drives the noise down") {
  Dataset data;
  for (int i = 0; i < 12; ++i) {
    data.x.push_back({static_cast<double>(i)});
    data.y.push_back(0.5 * i - 2.0);
  }
  const auto h = fit(data);
  CHECK(h.noise_variance <= 1e-3 * sample_variance(data.y));
  const std::vector<std::vector<double>> xs = {{5.5}};
  CHECK(predict(h, data, xs).mean[0] == doctest::Approx(0.75).epsilon(1e-2));
}

TEST_CASE("fit: pure noise has training NLL near the Gaussian entropy") {
  Rng rng(21);
  Dataset data;
  for (int i = 0; i < 120; ++i) {
    data.x.push_back({rng.uniform(0, 10)});
    data.y.push_back(rng.normal());
  }
  const auto h = fit(data, {3, 0});
  const double nll_per_point = -log_marginal_likelihood(data, h) / 120.0;
  const double entropy = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e);
  CHECK(std::fabs(nll_per_point - entropy) <= 0.2);
}

TEST_CASE("fit is deterministic and refine reaches a stationary point") {
  Rng rng(33);
  const auto data = random_dataset(rng, 25, 1);
  const auto a = fit(data, {8, 5});
  const auto b = fit(data, {8, 5});
  CHECK(a.length_scale == b.length_scale);
  CHECK(a.noise_variance == b.noise_variance);

  const double base = log_marginal_likelihood(data, a);
  CHECK(base >= log_marginal_likelihood(data, {1.0, 1.0, 0.1}));
  // Central-difference gradient in log space.
  const double eps = 1e-4;
  for (int k = 0; k < 3; ++k) {
    auto shift = [&](double s) {
      Hyperparams h = a;
      double* p = k == 0 ? &h.length_scale : k == 1 ? &h.signal_variance : &h.noise_variance;
      *p *= std::exp(s);
      return log_marginal_likelihood(data, h);
    };
    const double grad = (shift(eps) - shift(-eps)) / (2 * eps);
    CHECK(std::fabs(grad) < 1e-3);
  }
  const auto again = refine(data, a);
  CHECK(std::fabs(log_marginal_likelihood(data, again) - base) < 1e-6);
}

TEST_CASE("degenerate data") {
  const Dataset one{{{1.0}}, {2.0}};
  try {
    fit(one);
    FAIL("expected DegenerateData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateData);
  }
  const Dataset same{{{1.0}, {1.0}}, {2.0, 3.0}};
  CHECK_THROWS_AS(fit(same), Error);
  const Dataset ragged{{{1.0}, {1.0, 2.0}}, {2.0, 3.0}};
  CHECK_THROWS_AS(log_marginal_likelihood(ragged, {}), Error);
}

TEST_CASE("multi-output model fits each output on its own") {
  prompting::TrainingSet train;
  Rng rng(6);
  for (int i = 0; i < 15; ++i) {
    const double x = rng.uniform(0, 6);
    train.observations.push_back({std::vector<double>{x}, {std::sin(x), std::cos(x) * 3}});
  }
  const auto model = fit_multi(train, {4, 9});
  REQUIRE(model.per_output.size() == 2);
  const std::vector<std::vector<double>> xs = {{1.0}, {2.5}};
  const auto posts = predict_multi(model, train, xs);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto data = dataset_for_output(train, j);
    const auto single = predict(fit(data, {4, derive_seed(9, j)}), data, xs);
    CHECK(posts[j].mean == single.mean);
    CHECK(posts[j].variance == single.variance);
  }
  prompting::TrainingSet text;
  text.observations = {{std::string("a"), {1.0}}, {std::string("b"), {2.0}}};
  CHECK_THROWS_AS(fit_multi(text), Error);
}
