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

#include "llmp/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "llmp/common.hpp"
#include "llmp/density.hpp"
#include "parallel.hpp"

namespace llmp::process {

using prompting::Key;
using prompting::Observation;
using prompting::PromptBuilder;
using prompting::PromptConfig;
using prompting::TrainingSet;

Mode parse_mode(std::string_view name) {
  if (name == "independent") return Mode::Independent;
  if (name == "autoregressive") return Mode::Autoregressive;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Mode mode) {
  return mode == Mode::Independent ? "independent" : "autoregressive";
}

void TargetSet::validate(const TrainingSet& train) const {
  train.validate();
  if (has_truths() && truths.size() != keys.size())
    throw Error(ErrorCode::LengthMismatch, "truth rows and target keys differ in length");
  if (train.observations.empty()) return;
  const auto& ref = train.observations.front();
  for (const auto& k : keys)
    if (prompting::is_numeric(k) != prompting::is_numeric(ref.key) ||
        prompting::key_arity(k) != prompting::key_arity(ref.key))
      throw Error(ErrorCode::KindMismatch, "target key kind differs from training keys");
  for (const auto& row : truths)
    if (row.size() != ref.values.size())
      throw Error(ErrorCode::KindMismatch, "truth row arity differs from training outputs");
}

namespace {

// Model-side view of an experiment: scaled training set and truths, plus
// the log-density shift back to original units.
struct Scaled {
  TrainingSet train;
  TargetSet targets;
  std::optional<prompting::AffineScale> scale;
  double correction = 0.0;
};

Scaled scaled_view(const PromptConfig& cfg, const TrainingSet& train, const TargetSet& targets) {
  targets.validate(train);
  Scaled s{train, targets, cfg.scale, 0.0};
  if (cfg.scale) {
    s.train = prompting::apply_scale(train, *cfg.scale);
    for (auto& row : s.targets.truths)
      for (double& y : row) y = cfg.scale->apply(y);
    s.correction = cfg.scale->log_density_correction();
  }
  return s;
}

void require_truths(const TargetSet& targets) {
  if (!targets.has_truths())
    throw Error(ErrorCode::InvalidArgument, "likelihood evaluation needs true target values");
}

double score(const backend::LanguageModel& model, const PromptConfig& cfg, const std::string& prompt,
             const std::vector<double>& values) {
  const auto fmt = cfg.value_format();
  if (values.size() == 1) return density::log_pdf(model, prompt, values.front(), fmt).log_pdf;
  return density::log_pdf_joint(model, prompt, values, fmt, cfg.pair_grammar().joiner).log_pdf;
}

double sum_in_order(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void check_order(const std::vector<std::size_t>& order, std::size_t n) {
  std::vector<bool> seen(n, false);
  if (order.size() != n) throw Error(ErrorCode::InvalidArgument, "order must list every target once");
  for (std::size_t i : order) {
    if (i >= n || seen[i]) throw Error(ErrorCode::InvalidArgument, "order must list every target once");
    seen[i] = true;
  }
}

}  // namespace

std::vector<std::size_t> nearest_first_order(const TrainingSet& train, const TargetSet& targets) {
  std::vector<std::size_t> idx(targets.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (targets.keys.empty() || !prompting::is_numeric(targets.keys.front()) ||
      train.observations.empty())
    return idx;
  std::vector<double> nearest(targets.size(), std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& q = std::get<std::vector<double>>(targets.keys[t]);
    for (const auto& obs : train.observations) {
      const auto& x = std::get<std::vector<double>>(obs.key);
      double d2 = 0.0;
      for (std::size_t d = 0; d < q.size(); ++d) d2 += (x[d] - q[d]) * (x[d] - q[d]);
      nearest[t] = std::min(nearest[t], d2);
    }
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return nearest[a] < nearest[b]; });
  return idx;
}

JointResult joint_loglik_independent(const backend::LanguageModel& model, const PromptConfig& cfg,
                                     const TrainingSet& train, const TargetSet& targets,
                                     const RunOptions& run) {
  require_truths(targets);
  const Scaled s = scaled_view(cfg, train, targets);
  const PromptBuilder builder(cfg, s.train);
  JointResult r;
  r.mode = Mode::Independent;
  r.conditionals.resize(targets.size());
  r.order.resize(targets.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  detail::parallel_for(targets.size(), run.threads, [&](std::size_t t) {
    r.conditionals[t] =
        score(model, cfg, builder.marginal(s.targets.keys[t]), s.targets.truths[t]) + s.correction;
  });
  r.joint = sum_in_order(r.conditionals);
  return r;
}

JointResult joint_loglik_autoregressive(const backend::LanguageModel& model,
                                        const PromptConfig& cfg, const TrainingSet& train,
                                        const TargetSet& targets,
                                        std::optional<std::vector<std::size_t>> order) {
  require_truths(targets);
  const Scaled s = scaled_view(cfg, train, targets);
  const PromptBuilder builder(cfg, s.train);
  JointResult r;
  r.mode = Mode::Autoregressive;
  r.order = order ? *order : nearest_first_order(train, targets);
  check_order(r.order, targets.size());
  r.conditionals.resize(targets.size());
  std::vector<Observation> history;
  for (std::size_t t : r.order) {
    const auto& key = s.targets.keys[t];
    r.conditionals[t] =
        score(model, cfg, builder.extend(history, key), s.targets.truths[t]) + s.correction;
    history.push_back({key, s.targets.truths[t]});
  }
  r.joint = sum_in_order(r.conditionals);
  return r;
}

namespace {

std::vector<double> draw(const backend::LanguageModel& model, const PromptConfig& cfg,
                         const std::string& prompt, const backend::SamplingParams& params,
                         std::size_t arity, int retry_cap, std::uint64_t seed, int& rejected) {
  const auto fmt = cfg.value_format();
  const auto out = density::sample_vector(model, prompt, params, fmt, cfg.pair_grammar().joiner,
                                          arity, retry_cap, seed);
  rejected += out.rejected;
  return out.values;
}

// One attempt at a full path. Returns false when a position exhausted its
// retries.
bool try_path(const backend::LanguageModel& model, const PromptConfig& cfg,
              const PromptBuilder& builder, const TargetSet& targets, const SampleOptions& opt,
              const backend::SamplingParams& params, const std::vector<std::size_t>& order,
              std::size_t arity, std::uint64_t seed, PathSample& path) {
  path.values.assign(targets.size(), {});
  std::vector<Observation> history;
  for (std::size_t t : order) {
    const auto& key = targets.keys[t];
    const std::string prompt = opt.mode == Mode::Autoregressive ? builder.extend(history, key)
                                                                : builder.marginal(key);
    try {
      path.values[t] = draw(model, cfg, prompt, params, arity, opt.retry_cap,
                            derive_seed(seed, t), path.rejected);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MaxAttemptsExceeded) throw;
      path.rejected += opt.retry_cap;
      return false;
    }
    if (opt.mode == Mode::Autoregressive) history.push_back({key, path.values[t]});
  }
  return true;
}

}  // namespace

std::vector<PathSample> sample_paths(const backend::LanguageModel& model, const PromptConfig& cfg,
                                     const TrainingSet& train, const TargetSet& targets,
                                     const SampleOptions& opt) {
  if (opt.paths < 1) throw Error(ErrorCode::InvalidArgument, "need at least one path");
  if (opt.retry_cap < 1) throw Error(ErrorCode::InvalidArgument, "retry cap must be >= 1");
  const Scaled s = scaled_view(cfg, train, targets);
  const PromptBuilder builder(cfg, s.train);
  backend::SamplingParams params = opt.params;
  params.stop = cfg.value_format().terminal;
  params.validate();
  const std::size_t arity =
      train.observations.empty() ? 1 : train.observations.front().values.size();

  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (opt.mode == Mode::Autoregressive) {
    order = opt.order ? *opt.order : nearest_first_order(train, targets);
    check_order(order, targets.size());
  }

  std::vector<PathSample> paths(static_cast<std::size_t>(opt.paths));
  detail::parallel_for(paths.size(), opt.threads, [&](std::size_t p) {
    PathSample& path = paths[p];
    path.seed = derive_seed(opt.seed, p);
    // One resample after a failed attempt, then give up on the path.
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (try_path(model, cfg, builder, s.targets, opt, params, order, arity,
                   derive_seed(path.seed, static_cast<std::uint64_t>(attempt), 7), path)) {
        path.failed = false;
        break;
      }
      path.failed = true;
      if (attempt == 0) ++path.restarts;
    }
    if (path.failed) {
      path.values.clear();
      return;
    }
    if (s.scale)
      for (auto& row : path.values)
        for (double& y : row) y = s.scale->invert(y);
  });
  return paths;
}

std::vector<std::vector<double>> samples_by_target(const std::vector<PathSample>& paths,
                                                   std::size_t target_count, std::size_t output) {
  std::vector<std::vector<double>> out(target_count);
  for (const auto& p : paths) {
    if (p.failed) continue;
    for (std::size_t t = 0; t < target_count; ++t) out[t].push_back(p.values[t].at(output));
  }
  return out;
}

GapResult exchangeability_gap(const backend::LanguageModel& model, const PromptConfig& cfg,
                              const TrainingSet& train, const TargetSet& targets, int k,
                              std::uint64_t seed, Mode mode) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two random orderings");
  require_truths(targets);
  GapResult g;
  auto evaluate = [&](const std::vector<std::size_t>& order) {
    return mode == Mode::Independent
               ? joint_loglik_independent(model, cfg, train, targets).joint
               : joint_loglik_autoregressive(model, cfg, train, targets, order).joint;
  };
  if (!targets.keys.empty() && prompting::is_numeric(targets.keys.front())) {
    g.labels.emplace_back("distance");
    g.joints.push_back(evaluate(nearest_first_order(train, targets)));
  }
  for (int i = 0; i < k; ++i) {
    g.labels.push_back("random-" + std::to_string(i));
    g.joints.push_back(
        evaluate(Rng(derive_seed(seed, static_cast<std::uint64_t>(i))).permutation(targets.size())));
  }
  const double m = static_cast<double>(g.joints.size());
  g.mean = sum_in_order(g.joints) / m;
  double ss = 0.0;
  for (double j : g.joints) ss += (j - g.mean) * (j - g.mean);
  g.stderr_mean = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  const auto [lo, hi] = std::minmax_element(g.joints.begin(), g.joints.end());
  g.spread = *hi - *lo;
  return g;
}

}  // namespace llmp::process
