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

#include "llmp/backend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "llmp/common.hpp"

namespace llmp::backend {

void SamplingParams::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  if (!(top_p > 0.0 && top_p <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "top_p must lie in (0, 1]");
  if (max_tokens < 1) throw Error(ErrorCode::InvalidArgument, "max_tokens must be positive");
}

double TokenScores::total() const {
  return std::accumulate(token_log_probs.begin(), token_log_probs.end(), 0.0);
}

TokenDistribution apply_sampling(const TokenDistribution& dist, const SamplingParams& params) {
  TokenDistribution out;
  out.reserve(dist.size());
  const double inv_t = 1.0 / params.temperature;
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& [tok, p] : dist)
    if (p > 0.0) max_log = std::max(max_log, std::log(p));
  double z = 0.0;
  for (const auto& [tok, p] : dist) {
    if (!(p > 0.0)) continue;
    const double w = inv_t == 1.0 ? p : std::exp((std::log(p) - max_log) * inv_t);
    out.emplace_back(tok, w);
    z += w;
  }
  for (auto& [tok, w] : out) w /= z;
  if (params.top_p >= 1.0 || out.empty()) return out;

  std::vector<std::size_t> idx(out.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return out[a].second > out[b].second; });
  std::vector<bool> keep(out.size(), false);
  double mass = 0.0;
  for (std::size_t i : idx) {
    keep[i] = true;
    mass += out[i].second;
    if (mass >= params.top_p - 1e-12) break;
  }
  TokenDistribution kept;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (keep[i]) kept.emplace_back(out[i].first, out[i].second / mass);
  return kept;
}

std::vector<double> mask_to_vocabulary(const TokenDistribution& dist,
                                       std::span<const std::string> vocabulary) {
  std::vector<double> probs(vocabulary.size(), 0.0);
  for (const auto& [tok, p] : dist) {
    auto it = std::find(vocabulary.begin(), vocabulary.end(), tok);
    if (it != vocabulary.end()) probs[static_cast<std::size_t>(it - vocabulary.begin())] += p;
  }
  const double z = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (z > 0.0)
    for (double& p : probs) p /= z;
  return probs;
}

Completion DistributionModel::complete(std::string_view prompt, const SamplingParams& params,
                                       std::uint64_t seed) const {
  params.validate();
  Rng rng(seed);
  std::string context(prompt);
  const std::size_t base = context.size();
  for (int t = 0; t < params.max_tokens; ++t) {
    const TokenDistribution dist = apply_sampling(next_token(context), params);
    if (dist.empty()) break;
    const double u = rng.uniform();
    double cum = 0.0;
    const std::string* chosen = &dist.back().first;
    for (const auto& [tok, p] : dist) {
      cum += p;
      if (u < cum) {
        chosen = &tok;
        break;
      }
    }
    context += *chosen;
    std::string_view generated(context.data() + base, context.size() - base);
    if (!params.stop.empty() && generated.ends_with(params.stop)) {
      generated.remove_suffix(params.stop.size());
      return {std::string(generated), true};
    }
  }
  return {context.substr(base), false};
}

TokenScores DistributionModel::score_continuation(std::string_view prompt,
                                                  std::span<const std::string> continuation,
                                                  std::span<const std::string> vocabulary) const {
  TokenScores scores;
  scores.vocabulary.assign(vocabulary.begin(), vocabulary.end());
  std::string context(prompt);
  for (const std::string& tok : continuation) {
    auto it = std::find(vocabulary.begin(), vocabulary.end(), tok);
    if (it == vocabulary.end())
      throw Error(ErrorCode::InvalidArgument, "continuation token '" + tok + "' not in vocabulary");
    const auto probs = mask_to_vocabulary(next_token(context), vocabulary);
    std::vector<double> row(probs.size());
    std::transform(probs.begin(), probs.end(), row.begin(), [](double p) { return std::log(p); });
    scores.token_log_probs.push_back(row[static_cast<std::size_t>(it - vocabulary.begin())]);
    scores.log_probs.push_back(std::move(row));
    scores.tokens.push_back(tok);
    context += tok;
  }
  return scores;
}

// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string>& numeric_chars() {
  static const std::vector<std::string> chars = [] {
    std::vector<std::string> v;
    for (char c = '0'; c <= '9'; ++c) v.emplace_back(1, c);
    v.emplace_back(".");
    v.emplace_back("-");
    return v;
  }();
  return chars;
}
}  // namespace

namespace {
std::map<std::string, double> uniform_weights(const std::string& terminal) {
  std::map<std::string, double> w;
  for (const auto& c : numeric_chars()) w[c] = 1.0;
  w[terminal] = 1.0;
  return w;
}
}  // namespace

UniformDigitLM::UniformDigitLM(std::string terminal)
    : UniformDigitLM(uniform_weights(terminal), terminal) {}

UniformDigitLM::UniformDigitLM(std::map<std::string, double> weights, std::string terminal) {
  if (terminal.size() != 1)
    throw Error(ErrorCode::InvalidArgument, "UniformDigitLM terminal must be one character");
  double z = 0.0;
  for (const auto& [tok, w] : weights) {
    const bool numeric =
        std::find(numeric_chars().begin(), numeric_chars().end(), tok) != numeric_chars().end();
    if (!numeric && tok != terminal)
      throw Error(ErrorCode::InvalidArgument, "token '" + tok + "' outside numeric vocabulary");
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative token weight");
    z += w;
  }
  if (!(z > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights carry no mass");
  // Fixed order: digits, '.', '-', terminal.
  std::vector<std::string> order = numeric_chars();
  order.push_back(terminal);
  for (const auto& tok : order)
    if (auto it = weights.find(tok); it != weights.end()) dist_.emplace_back(tok, it->second / z);
}

TokenDistribution UniformDigitLM::next_token(std::string_view) const { return dist_; }

// ---------------------------------------------------------------------------

namespace {
TokenDistribution normalized(TokenDistribution d) {
  double z = 0.0;
  for (const auto& [tok, p] : d) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative probability");
    z += p;
  }
  if (!(z > 0.0)) throw Error(ErrorCode::InvalidArgument, "distribution carries no mass");
  for (auto& [tok, p] : d) p /= z;
  return d;
}

TokenDistribution dist_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "table distribution must be an object");
  TokenDistribution d;
  for (const auto& [tok, p] : j.items()) d.emplace_back(tok, p.get<double>());
  return d;
}
}  // namespace

TableLM::TableLM(TokenDistribution fallback) : fallback_(normalized(std::move(fallback))) {}

TableLM& TableLM::add(std::string suffix, TokenDistribution dist) {
  entries_.emplace_back(std::move(suffix), normalized(std::move(dist)));
  return *this;
}

TableLM TableLM::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("table model: ") + e.what());
  }
  if (!j.contains("fallback")) throw Error(ErrorCode::SchemaMismatch, "table model needs 'fallback'");
  TableLM lm(dist_from_json(j.at("fallback")));
  if (j.contains("entries"))
    for (const auto& e : j.at("entries"))
      lm.add(e.at("suffix").get<std::string>(), dist_from_json(e.at("dist")));
  return lm;
}

TokenDistribution TableLM::next_token(std::string_view context) const {
  const TokenDistribution* best = &fallback_;
  std::size_t best_len = 0;
  bool matched = false;
  for (const auto& [suffix, dist] : entries_) {
    if (context.ends_with(suffix) && (!matched || suffix.size() > best_len)) {
      best = &dist;
      best_len = suffix.size();
      matched = true;
    }
  }
  return *best;
}

// ---------------------------------------------------------------------------

CheatFunctionBackend::CheatFunctionBackend(Objective f, double sigma,
                                           prompting::PairFormat pair_format,
                                           numcodec::NumericFormat format, std::string name)
    : f_(std::move(f)),
      sigma_(sigma),
      grammar_(prompting::grammar(pair_format)),
      format_(std::move(format)),
      name_(std::move(name)) {
  if (!(sigma_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise must be non-negative");
  if (grammar_.open.empty() && grammar_.close.empty())
    throw Error(ErrorCode::InvalidArgument, "cheat backend cannot locate pairs in this format");
  format_.terminal = grammar_.terminal();
}

std::optional<CheatFunctionBackend::Query> CheatFunctionBackend::parse_query(
    std::string_view context) const {
  const std::size_t pos = context.rfind(grammar_.mid);
  if (pos == std::string_view::npos) return std::nullopt;
  Query q;
  q.partial = std::string(context.substr(pos + grammar_.mid.size()));
  for (char c : q.partial)
    if (!((c >= '0' && c <= '9') || c == '.' || c == '-')) return std::nullopt;

  std::string_view seg = context.substr(0, pos);
  if (!grammar_.close.empty()) {
    if (auto c = seg.rfind(grammar_.close); c != std::string_view::npos)
      seg.remove_prefix(c + grammar_.close.size());
  }
  if (!grammar_.open.empty()) {
    auto o = seg.rfind(grammar_.open);
    if (o == std::string_view::npos) return std::nullopt;
    seg.remove_prefix(o + grammar_.open.size());
  }
  numcodec::NumericFormat plain;
  plain.terminal.clear();
  while (true) {
    const std::size_t j = seg.find(grammar_.joiner);
    const std::string_view part = seg.substr(0, j);
    if (!numcodec::is_number(part, plain)) return std::nullopt;
    q.x.push_back(numcodec::parse_value(part, plain));
    if (j == std::string_view::npos) break;
    seg.remove_prefix(j + grammar_.joiner.size());
  }
  return q;
}

std::vector<std::pair<std::string, double>> CheatFunctionBackend::candidates(double mean) const {
  std::vector<std::pair<std::string, double>> out;
  auto push = [&](double v, double w) {
    try {
      out.emplace_back(numcodec::serialize_value(v, format_) + format_.terminal, w);
    } catch (const Error&) {
      // values the format cannot represent (e.g. disallowed negatives) carry no mass
    }
  };
  if (sigma_ == 0.0) {
    push(mean, 1.0);
    return out;
  }
  const double w = format_.bin_width();
  const double lo = std::floor((mean - 8.0 * sigma_) / w);
  const double hi = std::ceil((mean + 8.0 * sigma_) / w);
  if (hi - lo > 2.0e5) throw Error(ErrorCode::InvalidArgument, "noise too wide for precision");
  auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - mean) / (sigma_ * std::sqrt(2.0))); };
  double z = 0.0;
  for (double k = lo; k <= hi; k += 1.0) {
    const double v = k * w;
    const double mass = cdf(v + 0.5 * w) - cdf(v - 0.5 * w);
    if (mass > 0.0) {
      push(v, mass);
      z += mass;
    }
  }
  for (auto& c : out) c.second /= z;
  return out;
}

TokenDistribution CheatFunctionBackend::next_token(std::string_view context) const {
  TokenDistribution dist;
  if (auto q = parse_query(context)) {
    const auto cands = candidates(f_(q->x));
    for (const auto& [text, w] : cands) {
      if (text.size() <= q->partial.size() || !std::string_view(text).starts_with(q->partial))
        continue;
      const std::string tok(1, text[q->partial.size()]);
      auto it = std::find_if(dist.begin(), dist.end(), [&](const auto& e) { return e.first == tok; });
      if (it == dist.end())
        dist.emplace_back(tok, w);
      else
        it->second += w;
    }
  }
  if (dist.empty()) {
    for (const auto& v : format_.vocabulary()) dist.emplace_back(v, 1.0);
    return normalized(std::move(dist));
  }
  return normalized(std::move(dist));
}

Completion CheatFunctionBackend::complete(std::string_view prompt, const SamplingParams& params,
                                          std::uint64_t seed) const {
  params.validate();
  const auto q = parse_query(prompt);
  if (!q || !q->partial.empty()) return {"", false};
  Rng rng(seed);
  const double noise = sigma_ > 0.0 ? sigma_ * rng.normal() : 0.0;
  std::string text;
  try {
    text = numcodec::serialize_value(f_(q->x) + noise, format_);
  } catch (const Error&) {
    return {"", false};
  }
  // the stop sequence needs one more token after the value
  const auto budget = static_cast<std::size_t>(params.max_tokens) - (params.stop.empty() ? 0 : 1);
  if (text.size() > budget) {
    text.resize(static_cast<std::size_t>(params.max_tokens));
    return {text, false};
  }
  return {text, !params.stop.empty()};
}

}  // namespace llmp::backend
