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

// Serves a mock model over the completions HTTP API, for trying the remote
// client without a real inference server.

#include <CLI11.hpp>
#include <iostream>
#include <memory>

#include "llmp/common.hpp"
#include "llmp/harness.hpp"
#include "llmp/remote.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Completions endpoint backed by a mock model"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_spec = "mock:uniform";
  std::string format = "comma-newline";
  int precision = 2;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port");
  app.add_option("--model", model_spec, "mock:uniform, mock:table:<path> or mock:cheat:<fn>[:<sigma>]");
  app.add_option("--format", format, "pair format the cheat model parses");
  app.add_option("--precision", precision, "decimal places");
  CLI11_PARSE(app, argc, argv);

  try {
    llmp::harness::Json cfg{{"format", format}, {"precision", precision}};
    const auto prompt = llmp::harness::prompt_config(cfg);
    std::shared_ptr<llmp::backend::LanguageModel> model =
        llmp::harness::make_backend(model_spec, prompt, cfg);
    auto dist = std::dynamic_pointer_cast<const llmp::backend::DistributionModel>(model);
    if (!dist) {
      std::cerr << "llmp_stub_server: --model must be a mock model\n";
      return 1;
    }
    llmp::backend::StubServer server(dist);
    std::cerr << "serving " << model->identity() << " on http://" << host << ":" << port << "\n";
    server.listen(host, port);
  } catch (const llmp::Error& e) {
    std::cerr << "llmp_stub_server: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
