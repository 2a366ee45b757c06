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

#include "llmp/remote.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "llmp/common.hpp"

namespace llmp::backend {

using nlohmann::json;

namespace {
constexpr const char* kCompletionsPath = "/v1/completions";
// JSON cannot carry -inf; zero-probability tokens are reported with this.
constexpr double kZeroLogProb = -1.0e30;
}  // namespace

RemoteOptions remote_options_from_env() {
  RemoteOptions o;
  if (const char* url = std::getenv("LLMP_BACKEND_URL")) o.url = url;
  if (const char* token = std::getenv("LLMP_BACKEND_TOKEN")) o.token = token;
  return o;
}

RemoteBackend::RemoteBackend(RemoteOptions options, int max_in_flight)
    : options_(std::move(options)),
      in_flight_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, kMaxInFlight)) {
  if (options_.url.empty()) throw Error(ErrorCode::InvalidArgument, "backend URL is empty");
  const auto scheme = options_.url.find("://");
  const auto slash =
      options_.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  host_ = options_.url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : options_.url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + kCompletionsPath;
}

std::string RemoteBackend::post(const std::string& body) const {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<kMaxInFlight>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Headers headers;
  if (!options_.token.empty()) {
    headers.emplace(options_.auth_header, options_.auth_header == "Authorization"
                                              ? "Bearer " + options_.token
                                              : options_.token);
  }
  const auto secs = options_.timeout.count() / 1000;
  const auto usecs = (options_.timeout.count() % 1000) * 1000;

  bool timed_out = false;
  std::string last_error;
  auto backoff = options_.backoff;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    ++attempts_;
    httplib::Client client(host_);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(path_, headers, body, "application/json");
    if (res && res->status == 200) return res->body;
    if (res) {
      timed_out = false;
      last_error = "HTTP " + std::to_string(res->status);
      const bool retryable = res->status >= 500 || res->status == 429;
      if (!retryable) throw Error(ErrorCode::BackendUnavailable, last_error + ": " + res->body);
    } else {
      const auto err = res.error();
      timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last_error = httplib::to_string(err);
    }
    if (attempt < options_.max_retries && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(timed_out ? ErrorCode::Timeout : ErrorCode::BackendUnavailable,
              host_ + path_ + ": " + last_error);
}

namespace {
json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("bad response body: ") + e.what());
  }
}
}  // namespace

Completion RemoteBackend::complete(std::string_view prompt, const SamplingParams& params,
                                   std::uint64_t seed) const {
  params.validate();
  json req = {{"prompt", std::string(prompt)},
              {"max_tokens", params.max_tokens},
              {"temperature", params.temperature},
              {"top_p", params.top_p},
              {"stop", params.stop.empty() ? json::array() : json::array({params.stop})},
              {"echo", false},
              {"logprobs", 0},
              {"seed", seed}};
  const json res = parse_body(post(req.dump()));
  if (!res.contains("text") || !res["text"].is_string())
    throw Error(ErrorCode::BackendUnavailable, "response lacks 'text'");
  Completion c;
  c.text = res["text"].get<std::string>();
  // Fewer tokens than the budget means generation ended on the stop sequence.
  if (res.contains("tokens") && res["tokens"].is_array())
    c.stopped = !params.stop.empty() &&
                static_cast<int>(res["tokens"].size()) < params.max_tokens;
  else
    c.stopped = !params.stop.empty();
  ++results_;
  return c;
}

TokenScores RemoteBackend::score_continuation(std::string_view prompt,
                                              std::span<const std::string> continuation,
                                              std::span<const std::string> vocabulary) const {
  std::string full(prompt);
  for (const auto& t : continuation) full += t;
  json req = {{"prompt", full},       {"max_tokens", 0}, {"temperature", 1.0},
              {"top_p", 1.0},         {"stop", json::array()},
              {"echo", true},         {"logprobs", options_.logprobs}};
  const json res = parse_body(post(req.dump()));
  if (!res.contains("tokens") || !res.contains("top_logprobs") ||
      !res["top_logprobs"].is_array())
    throw Error(ErrorCode::UnsupportedScoring, "response lacks per-token log-probabilities");
  const auto& tokens = res["tokens"];
  const auto& tops = res["top_logprobs"];
  const std::size_t m = continuation.size();
  if (tokens.size() < m || tops.size() != tokens.size())
    throw Error(ErrorCode::UnsupportedScoring, "echoed tokens do not cover the continuation");

  TokenScores scores;
  scores.vocabulary.assign(vocabulary.begin(), vocabulary.end());
  const std::size_t offset = tokens.size() - m;
  for (std::size_t j = 0; j < m; ++j) {
    const std::string tok = tokens[offset + j].get<std::string>();
    if (tok != continuation[j])
      throw Error(ErrorCode::UnsupportedScoring,
                  "server tokenization does not split the value per character");
    const auto& top = tops[offset + j];
    const bool exhaustive = static_cast<int>(top.size()) < options_.logprobs;
    std::vector<double> probs(vocabulary.size(), 0.0);
    for (std::size_t v = 0; v < vocabulary.size(); ++v) {
      if (top.contains(vocabulary[v])) {
        probs[v] = std::exp(top[vocabulary[v]].get<double>());
      } else if (!exhaustive) {
        throw Error(ErrorCode::UnsupportedScoring,
                    "top-K log-probabilities do not cover token '" + vocabulary[v] + "'");
      }
    }
    double z = 0.0;
    for (double p : probs) z += p;
    std::vector<double> row(probs.size());
    for (std::size_t v = 0; v < probs.size(); ++v)
      row[v] = z > 0.0 ? std::log(probs[v] / z) : -INFINITY;
    const auto idx = static_cast<std::size_t>(
        std::find(vocabulary.begin(), vocabulary.end(), tok) - vocabulary.begin());
    if (idx >= vocabulary.size())
      throw Error(ErrorCode::InvalidArgument, "continuation token '" + tok + "' not in vocabulary");
    scores.token_log_probs.push_back(row[idx]);
    scores.log_probs.push_back(std::move(row));
    scores.tokens.push_back(tok);
  }
  ++results_;
  return scores;
}

// ---------------------------------------------------------------------------

StubServer::StubServer(std::shared_ptr<const DistributionModel> model)
    : model_(std::move(model)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

StubServer::~StubServer() { stop(); }

namespace {

json top_entries(const TokenDistribution& dist, int k) {
  json top = json::object();
  if (k <= 0) return top;
  std::vector<std::pair<std::string, double>> sorted;
  for (const auto& e : dist)
    if (e.second > 0.0) sorted.push_back(e);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < sorted.size() && static_cast<int>(i) < k; ++i)
    top[sorted[i].first] = std::log(sorted[i].second);
  return top;
}

double prob_of(const TokenDistribution& dist, const std::string& tok) {
  double p = 0.0;
  for (const auto& e : dist)
    if (e.first == tok) p += e.second;
  return p;
}

}  // namespace

void StubServer::install_routes() {
  server_->Post(kCompletionsPath, [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    if (fail_remaining_.load() > 0) {
      --fail_remaining_;
      res.status = 503;
      res.set_content(R"({"error":"injected failure"})", "application/json");
      return;
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    const std::string prompt = body.value("prompt", std::string{});
    const int max_tokens = body.value("max_tokens", 16);
    const bool echo = body.value("echo", false);
    const int k = body.value("logprobs", 0);

    std::string generated;
    if (max_tokens > 0) {
      SamplingParams p;
      p.max_tokens = max_tokens;
      p.temperature = body.value("temperature", 1.0);
      p.top_p = body.value("top_p", 1.0);
      p.stop.clear();
      if (body.contains("stop") && body["stop"].is_array() && !body["stop"].empty())
        p.stop = body["stop"][0].get<std::string>();
      std::uint64_t seed = 0;
      if (body.contains("seed") && body["seed"].is_number()) seed = body["seed"].get<std::uint64_t>();
      try {
        generated = model_->complete(prompt, p, seed).text;
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        return;
      }
    }

    // Per-character tokens; scored positions start at 0 (echo) or after the prompt.
    const std::string full = prompt + generated;
    const std::size_t first = echo ? 0 : prompt.size();
    json tokens = json::array();
    json token_logprobs = json::array();
    json top_logprobs = json::array();
    for (std::size_t i = first; i < full.size(); ++i) {
      const std::string tok(1, full[i]);
      const TokenDistribution dist = model_->next_token(std::string_view(full).substr(0, i));
      const double p = prob_of(dist, tok);
      tokens.push_back(tok);
      token_logprobs.push_back(p > 0.0 ? std::log(p) : kZeroLogProb);
      top_logprobs.push_back(top_entries(dist, k));
    }
    json out = {{"text", echo ? full : generated},
                {"tokens", tokens},
                {"token_logprobs", token_logprobs},
                {"top_logprobs", top_logprobs}};
    res.set_content(out.dump(), "application/json");
  });
}

int StubServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : port;
  if (port != 0 && !server_->bind_to_port(host, port))
    throw Error(ErrorCode::BackendUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  if (bound < 0) throw Error(ErrorCode::BackendUnavailable, "cannot bind " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void StubServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port))
    throw Error(ErrorCode::BackendUnavailable, "cannot listen on " + host + ":" + std::to_string(port));
}

void StubServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace llmp::backend
