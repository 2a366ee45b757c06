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

#include "llmp/prompting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "llmp/common.hpp"
#include "llmp/simd.hpp"

namespace llmp::prompting {

bool is_numeric(const Key& key) { return std::holds_alternative<std::vector<double>>(key); }

std::size_t key_arity(const Key& key) {
  if (const auto* v = std::get_if<std::vector<double>>(&key)) return v->size();
  return 0;
}

void TrainingSet::validate() const {
  if (observations.empty()) return;
  const auto& first = observations.front();
  for (const auto& obs : observations) {
    if (is_numeric(obs.key) != is_numeric(first.key))
      throw Error(ErrorCode::KindMismatch, "training keys mix numeric and text");
    if (key_arity(obs.key) != key_arity(first.key))
      throw Error(ErrorCode::KindMismatch, "training keys differ in dimension");
    if (obs.values.size() != first.values.size())
      throw Error(ErrorCode::KindMismatch, "training outputs differ in arity");
    if (obs.values.empty()) throw Error(ErrorCode::KindMismatch, "observation without output");
  }
}

std::string Grammar::terminal() const {
  if (!close.empty()) return close.substr(0, 1);
  if (!open.empty()) return open.substr(0, 1);
  return {};
}

const Grammar& grammar(PairFormat f) {
  static const Grammar kCommaTight{"", ",", "", ","};
  static const Grammar kLetterPrefix{"x", "y", "", ","};
  static const Grammar kCommaNewline{"", ",", "\n", ","};
  static const Grammar kCommaSpaceNewline{"", ", ", "\n", ", "};
  static const Grammar kParen{"(", ", ", ")", ", "};
  static const Grammar kLabeled{"x=", ", y=", "\n", ", "};
  switch (f) {
    case PairFormat::CommaTight: return kCommaTight;
    case PairFormat::LetterPrefix: return kLetterPrefix;
    case PairFormat::CommaNewline: return kCommaNewline;
    case PairFormat::CommaSpaceNewline: return kCommaSpaceNewline;
    case PairFormat::Paren: return kParen;
    case PairFormat::Labeled: return kLabeled;
  }
  return kCommaSpaceNewline;
}

std::string_view pattern(PairFormat f) {
  switch (f) {
    case PairFormat::CommaTight: return "_,_";
    case PairFormat::LetterPrefix: return "x_y_";
    case PairFormat::CommaNewline: return "_,_\\n";
    case PairFormat::CommaSpaceNewline: return "_, _\\n";
    case PairFormat::Paren: return "(_, _)";
    case PairFormat::Labeled: return "x=_, y=_\\n";
  }
  return "";
}

std::string_view cli_name(PairFormat f) {
  switch (f) {
    case PairFormat::CommaTight: return "comma";
    case PairFormat::LetterPrefix: return "xy";
    case PairFormat::CommaNewline: return "compact-newline";
    case PairFormat::CommaSpaceNewline: return "comma-newline";
    case PairFormat::Paren: return "paren";
    case PairFormat::Labeled: return "labeled";
  }
  return "";
}

PairFormat parse_pair_format(std::string_view name) {
  std::string normalized(name);
  for (std::size_t pos; (pos = normalized.find('\n')) != std::string::npos;)
    normalized.replace(pos, 1, "\\n");
  for (PairFormat f : kAllPairFormats)
    if (normalized == pattern(f) || normalized == cli_name(f)) return f;
  throw Error(ErrorCode::InvalidArgument, "unknown pair format '" + std::string(name) + "'");
}

OrderKind parse_order_kind(std::string_view name) {
  if (name == "sequential") return OrderKind::Sequential;
  if (name == "random") return OrderKind::Random;
  if (name == "distance") return OrderKind::Distance;
  throw Error(ErrorCode::InvalidArgument, "unknown ordering '" + std::string(name) + "'");
}

std::string_view to_string(OrderKind kind) {
  switch (kind) {
    case OrderKind::Sequential: return "sequential";
    case OrderKind::Random: return "random";
    case OrderKind::Distance: return "distance";
  }
  return "";
}

double AffineScale::log_density_correction() const {
  if (a == 0.0) throw Error(ErrorCode::ZeroScale, "scale factor is zero");
  return std::log(std::fabs(a));
}

numcodec::NumericFormat PromptConfig::value_format() const {
  numcodec::NumericFormat f = format;
  f.terminal = grammar(pair_format).terminal();
  return f;
}

namespace {

void check_target(std::span<const Observation> observations, const Key& target) {
  if (observations.empty()) return;
  const Key& k = observations.front().key;
  if (is_numeric(k) != is_numeric(target) || key_arity(k) != key_arity(target))
    throw Error(ErrorCode::KindMismatch, "target key kind differs from training keys");
}

bool key_less(const Key& a, const Key& b) {
  if (const auto* va = std::get_if<std::vector<double>>(&a)) {
    const auto& vb = std::get<std::vector<double>>(b);
    return std::lexicographical_compare(va->begin(), va->end(), vb.begin(), vb.end());
  }
  return std::get<std::string>(a) < std::get<std::string>(b);
}

std::vector<double> distances_to(std::span<const Observation> observations, const Key& target) {
  const auto* query = std::get_if<std::vector<double>>(&target);
  if (!query) throw Error(ErrorCode::DistanceOnTextKeys, "distance ordering needs numeric keys");
  const std::size_t n = observations.size();
  const std::size_t dims = query->size();
  std::vector<double> soa(n * dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* x = std::get_if<std::vector<double>>(&observations[i].key);
    if (!x) throw Error(ErrorCode::DistanceOnTextKeys, "distance ordering needs numeric keys");
    for (std::size_t d = 0; d < dims; ++d) soa[d * n + i] = (*x)[d];
  }
  std::vector<double> out(n);
  simd::squared_distances(soa, n, *query, out);
  return out;
}

}  // namespace

std::vector<std::size_t> order_observations(std::span<const Observation> observations,
                                            const Key& target, const Ordering& ordering) {
  std::vector<std::size_t> idx(observations.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  switch (ordering.kind) {
    case OrderKind::Sequential:
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return key_less(observations[a].key, observations[b].key);
      });
      break;
    case OrderKind::Random:
      idx = Rng(ordering.seed).permutation(observations.size());
      break;
    case OrderKind::Distance: {
      if (!is_numeric(target))
        throw Error(ErrorCode::DistanceOnTextKeys, "distance ordering needs numeric keys");
      check_target(observations, target);
      const auto dist = distances_to(observations, target);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
      break;
    }
  }
  return idx;
}

namespace {
std::string render_number_compact(double v, int precision) {
  numcodec::NumericFormat f;
  f.precision = precision;
  std::string s = numcodec::serialize_value(v, f);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s == "-0" ? "0" : s;
}
}  // namespace

std::string render_key(const Key& key, const PromptConfig& cfg) {
  if (const auto* text = std::get_if<std::string>(&key)) return *text;
  const auto& x = std::get<std::vector<double>>(key);
  const std::string& joiner = cfg.pair_grammar().joiner;
  std::string out;
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (d) out += joiner;
    out += render_number_compact(x[d], cfg.format.precision);
  }
  return out;
}

std::string render_pair(const Observation& obs, const PromptConfig& cfg) {
  const Grammar& g = cfg.pair_grammar();
  std::string out = g.open + render_key(obs.key, cfg) + g.mid;
  for (std::size_t j = 0; j < obs.values.size(); ++j) {
    if (j) out += g.joiner;
    out += numcodec::serialize_value(obs.values[j], cfg.format);
  }
  out += g.close;
  return out;
}

PromptBuilder::PromptBuilder(PromptConfig cfg, TrainingSet train)
    : cfg_(std::move(cfg)), train_(std::move(train)) {
  train_.validate();
  rendered_.reserve(train_.observations.size());
  for (const auto& obs : train_.observations) rendered_.push_back(render_pair(obs, cfg_));
  header_ = header();
}

std::string PromptBuilder::header() const {
  std::string out;
  const std::string& prefix = cfg_.text_prefix ? *cfg_.text_prefix : train_.text;
  if (!prefix.empty()) out += prefix + "\n";
  for (const auto& block : cfg_.example_blocks) {
    out += block.label + ":\n";
    const Key any = block.observations.empty() ? Key{std::vector<double>{}}
                                               : block.observations.front().key;
    const auto order =
        order_observations(block.observations, any, Ordering{OrderKind::Sequential, 0});
    for (std::size_t i : order) out += render_pair(block.observations[i], cfg_);
  }
  if (cfg_.query_label) out += *cfg_.query_label + ":\n";
  return out;
}

std::string PromptBuilder::generation_point(const Key& key) const {
  const Grammar& g = cfg_.pair_grammar();
  return g.open + render_key(key, cfg_) + g.mid;
}

std::string PromptBuilder::marginal(const Key& target_key) const { return extend({}, target_key); }

std::string PromptBuilder::extend(std::span<const Observation> sampled_targets,
                                  const Key& next_key) const {
  const auto& obs = train_.observations;
  check_target(obs, next_key);
  check_target(sampled_targets, next_key);

  std::string out = header_;
  if (cfg_.ordering.kind == OrderKind::Distance) {
    std::vector<Observation> pool;
    if (sampled_targets.empty()) {
      for (std::size_t i : order_observations(obs, next_key, cfg_.ordering)) out += rendered_[i];
    } else {
      pool.reserve(obs.size() + sampled_targets.size());
      pool.insert(pool.end(), obs.begin(), obs.end());
      pool.insert(pool.end(), sampled_targets.begin(), sampled_targets.end());
      for (std::size_t i : order_observations(pool, next_key, cfg_.ordering))
        out += i < obs.size() ? rendered_[i] : render_pair(pool[i], cfg_);
    }
  } else {
    for (std::size_t i : order_observations(obs, next_key, cfg_.ordering)) out += rendered_[i];
    for (const auto& s : sampled_targets) out += render_pair(s, cfg_);
  }
  out += generation_point(next_key);
  return out;
}

std::string build_marginal_prompt(const PromptConfig& cfg, const TrainingSet& train,
                                  const Key& target_key) {
  return PromptBuilder(cfg, train).marginal(target_key);
}

std::string extend_autoregressive(const PromptConfig& cfg, const TrainingSet& train,
                                  std::span<const Observation> sampled_targets,
                                  const Key& next_key) {
  return PromptBuilder(cfg, train).extend(sampled_targets, next_key);
}

TrainingSet apply_scale(const TrainingSet& train, const AffineScale& scale) {
  if (scale.a == 0.0) throw Error(ErrorCode::ZeroScale, "scale factor is zero");
  TrainingSet out = train;
  for (auto& obs : out.observations)
    for (double& y : obs.values) y = scale.apply(y);
  return out;
}

}  // namespace llmp::prompting
