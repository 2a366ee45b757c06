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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>

#include "llmp/backend.hpp"

namespace httplib {
class Server;
}

namespace llmp::backend {

struct RemoteOptions {
  std::string url;  // scheme://host:port[/prefix]
  std::string auth_header = "Authorization";
  std::string token;  // sent as "Bearer <token>" for Authorization, raw otherwise
  int max_retries = 3;
  std::chrono::milliseconds backoff{50};  // doubled after each failed attempt
  std::chrono::milliseconds timeout{30000};
  int logprobs = 20;  // top-K requested when scoring; must cover the vocabulary
};

// Fills url and token from LLMP_BACKEND_URL / LLMP_BACKEND_TOKEN.
RemoteOptions remote_options_from_env();

// Client for POST /v1/completions. Scoring echoes prompt + continuation with
// max_tokens = 0 and reads the per-token top-K log-probabilities.
class RemoteBackend final : public LanguageModel {
 public:
  static constexpr std::ptrdiff_t kMaxInFlight = 64;

  explicit RemoteBackend(RemoteOptions options, int max_in_flight = 4);

  Completion complete(std::string_view prompt, const SamplingParams& params,
                      std::uint64_t seed) const override;
  TokenScores score_continuation(std::string_view prompt,
                                 std::span<const std::string> continuation,
                                 std::span<const std::string> vocabulary) const override;
  std::string identity() const override { return options_.url; }

  std::uint64_t attempts() const { return attempts_.load(); }
  std::uint64_t results() const { return results_.load(); }

 private:
  std::string post(const std::string& body) const;

  RemoteOptions options_;
  std::string host_;
  std::string path_;
  mutable std::counting_semaphore<kMaxInFlight> in_flight_;
  mutable std::atomic<std::uint64_t> attempts_{0};
  mutable std::atomic<std::uint64_t> results_{0};
};

// Serves /v1/completions over an in-process model, for integration tests
// and local experiments. One character per token.
class StubServer {
 public:
  explicit StubServer(std::shared_ptr<const DistributionModel> model);
  ~StubServer();

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // Answers the next n requests with HTTP 503.
  void fail_next(int n) { fail_remaining_ = n; }
  std::uint64_t requests() const { return requests_.load(); }

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  std::shared_ptr<const DistributionModel> model_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<int> fail_remaining_{0};
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace llmp::backend
