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
#include <cstdlib>
#include <filesystem>

#include "llmp/common.hpp"
#include "llmp/harness.hpp"

using namespace llmp;
using namespace llmp::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("llmp-test-" + std::to_string(Rng(std::random_device{}()).next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    write_file(path / name, content);
    return (path / name).string();
  }
};

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an llmp::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("synthetic tasks are deterministic and lie on the curve without noise") {
  SyntheticTask task;
  task.function = "sine";
  task.seed = 4;
  const auto a = generate_synthetic(task);
  const auto b = generate_synthetic(task);
  CHECK(to_jsonl(a) == to_jsonl(b));
  CHECK(a.train.observations.size() == 20);
  CHECK(a.targets.size() == 40);
  CHECK(std::get<std::vector<double>>(a.targets.keys[1])[0] == 5.0);

  task.noise = 0.0;
  for (const auto& name : synthetic_functions()) {
    task.function = name;
    const auto d = generate_synthetic(task);
    for (const auto& o : d.train.observations) {
      const double x = std::get<std::vector<double>>(o.key)[0];
      CHECK(o.values[0] == numcodec::round_value(synthetic_value(name, x), 2));
    }
  }
  CHECK(synthetic_functions().size() == 12);
  CHECK(code_of([] { synthetic_value("tan", 1.0); }) == ErrorCode::UnknownFunction);
}

TEST_CASE("synthetic targets can be held out of training") {
  SyntheticTask task;
  task.exclude_targets_from_train = true;
  task.train_size = 100;
  const auto d = generate_synthetic(task);
  for (const auto& o : d.train.observations)
    CHECK(static_cast<int>(std::get<std::vector<double>>(o.key)[0]) % 5 != 0);
  task.train_size = 161;
  CHECK_THROWS_AS(generate_synthetic(task), Error);
}

TEST_CASE("bimodal generator") {
  CHECK(bimodal_value(0, 0, 0) == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(bimodal_value(0, 1, 0) == doctest::Approx(0.105).epsilon(1e-15));
  BimodalTask task;
  task.x_min = 3;
  task.x_max = 10;
  task.count = 20000;
  task.seed = 2;
  const auto train = generate_bimodal(task);
  int upper = 0;
  for (const auto& o : train.observations) {
    const double x = std::get<std::vector<double>>(o.key)[0];
    const double mid = bimodal_value(x, 0.5, 0.0);
    upper += o.values[0] > mid ? 1 : 0;
  }
  CHECK(std::fabs(upper / 20000.0 - 0.5) <= 0.02);
  CHECK(std::get<std::vector<double>>(train.observations.back().key)[0] == 10.0);
}

TEST_CASE("JSONL loader") {
  const auto d = parse_jsonl(
      "{\"x\": 1, \"y\": 0.5}\n"
      "\n"
      "{\"x\": [2], \"y\": [0.7], \"split\": \"train\"}\n"
      "{\"x\": 3}\n"
      "{\"x\": 4, \"y\": 1.0, \"split\": \"target\"}\n");
  CHECK(d.train.observations.size() == 2);
  REQUIRE(d.targets.size() == 1);
  CHECK(d.targets.truths[0][0] == 1.0);

  try {
    parse_jsonl("{\"x\": 1, \"y\": 2}\n\n{bad");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { parse_jsonl("{\"x\": 1, \"y\": 2}\n{\"x\": [1, 2], \"y\": 2}"); }) ==
        ErrorCode::SchemaMismatch);
  CHECK(code_of([] { parse_jsonl("{\"y\": 2}"); }) == ErrorCode::SchemaMismatch);
  CHECK(code_of([] { parse_jsonl("{\"x\": 1, \"y\": 2, \"split\": \"test\"}"); }) == ErrorCode::SchemaMismatch);

  const auto text = parse_jsonl("{\"key\": \"Austin, Texas\", \"y\": 385000}\n");
  CHECK(std::get<std::string>(text.train.observations[0].key) == "Austin, Texas");
}

TEST_CASE("CSV loader") {
  const auto d = parse_csv(
      "x1,x2,y1,y2,split\n"
      "1,2,0.5,1.5,train\n"
      "3,4,,,target\n");
  REQUIRE(d.train.observations.size() == 1);
  CHECK(d.train.observations[0].values == std::vector<double>{0.5, 1.5});
  CHECK(d.targets.size() == 1);
  CHECK_FALSE(d.targets.has_truths());

  const auto quoted = parse_csv("key,y\n\"Dallas, Texas\",310000\n");
  CHECK(std::get<std::string>(quoted.train.observations[0].key) == "Dallas, Texas");

  try {
    parse_csv("x,y\n1,2\n1,abc\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { parse_csv("x,z\n1,2\n"); }) == ErrorCode::SchemaMismatch);
  CHECK(code_of([] { parse_csv("x,y\n1,2,3\n"); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("files round-trip through JSONL and targets fall back to every row") {
  TempDir tmp;
  SyntheticTask task;
  task.function = "log";
  const auto d = generate_synthetic(task);
  const auto path = tmp.file("log.jsonl", to_jsonl(d));
  const auto back = load_dataset(path);
  CHECK(to_jsonl(back) == to_jsonl(d));
  CHECK(load_targets(path).size() == 40);
  const auto plain = tmp.file("plain.csv", "x,y\n1,2\n3,4\n");
  CHECK(load_targets(plain).size() == 2);
  CHECK(code_of([&] { read_file(tmp.path / "missing.jsonl"); }) == ErrorCode::IoError);
}

TEST_CASE("config layers: command line over file over environment over defaults") {
  setenv("LLMP_BACKEND_URL", "http://env:1", 1);
  setenv("LLMP_BACKEND_TOKEN", "secret", 1);
  const auto env = environment_config();
  unsetenv("LLMP_BACKEND_URL");
  unsetenv("LLMP_BACKEND_TOKEN");
  CHECK(env["backend"] == "http://env:1");
  const Json file = {{"backend", "mock:uniform"}, {"samples", 7}, {"precision", 3}};
  const Json cli = {{"samples", 9}};
  const auto cfg = merge_config(default_config(), env, file, cli);
  CHECK(cfg["backend"] == "mock:uniform");
  CHECK(cfg["samples"] == 9);
  CHECK(cfg["precision"] == 3);
  CHECK(cfg["order"] == "distance");
  CHECK(cfg["token"] == "secret");
  CHECK_THROWS_AS(merge_config(default_config(), env, Json::array(), cli), Error);

  const auto p = prompt_config(Json{{"format", "paren"}, {"order", "random"}, {"precision", 1}, {"scale", "10,0"}});
  CHECK(p.pair_format == prompting::PairFormat::Paren);
  CHECK(p.ordering.kind == prompting::OrderKind::Random);
  CHECK(p.scale->a == 10.0);
  CHECK(code_of([] { parse_scale("0,1"); }) == ErrorCode::ZeroScale);
  CHECK(code_of([] { parse_scale("2"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { prompt_config(Json{{"precision", 40}}); }) == ErrorCode::InvalidArgument);
  CHECK(std::get<std::vector<double>>(parse_key("1.5, 2")) == std::vector<double>{1.5, 2.0});
  CHECK(std::get<std::string>(parse_key("Location: Dallas")) == "Location: Dallas");
}

TEST_CASE("backend specs") {
  const auto p = prompt_config(default_config());
  CHECK(make_backend("mock:uniform", p, {})->identity() == "mock:uniform");
  CHECK(make_backend("mock:cheat:sine:0.1", p, {})->identity() == "mock:cheat:sine");
  CHECK(make_backend("mock:cheat:branin", p, {})->identity() == "mock:cheat:branin");
  CHECK(code_of([&] { make_backend("", p, {}); }) == ErrorCode::BackendUnavailable);
  CHECK(code_of([&] { make_backend("mock:cheat:nope", p, {}); }) == ErrorCode::UnknownFunction);
  CHECK(code_of([&] { make_backend("mock:cheat:sine:x", p, {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { make_backend("gpt", p, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("regress report on a cheat model") {
  TempDir tmp;
  SyntheticTask task;
  task.function = "quadratic";
  task.noise = 0.0;
  task.target_count = 10;
  const auto data = tmp.file("q.jsonl", to_jsonl(generate_synthetic(task)));
  Json cfg = merge_config(default_config(), {}, {},
                          {{"data", data}, {"targets", data}, {"backend", "mock:cheat:quadratic"},
                           {"samples", 5}, {"token", "hidden"}});
  const auto report = run_regress(cfg);
  REQUIRE(report["status"] == "ok");
  CHECK_NOTHROW(validate_report(report));
  CHECK_FALSE(report["config"].contains("token"));
  CHECK_FALSE(report.contains("timing"));
  CHECK(report["targets"].size() == 10);
  CHECK(report["aggregate"]["mae"].get<double>() <= 0.005);
  CHECK(std::isfinite(report["aggregate"]["nll"].get<double>()));
  const auto agg = recompute_aggregates(report);
  CHECK(*agg.nll == report["aggregate"]["nll"].get<double>());
  CHECK(*agg.mae == report["aggregate"]["mae"].get<double>());
  const auto csv = report_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  CHECK(csv.starts_with("target,key,output,truth,median,p2.5,p10,"));

  cfg["mode"] = "autoregressive";
  cfg["timing"] = true;
  const auto ar = run_regress(cfg);
  CHECK(ar["status"] == "ok");
  CHECK(ar.contains("timing"));

  cfg["backend"] = "mock:cheat:nope";
  const auto bad = run_regress(cfg);
  CHECK(bad["status"] == "error");
  CHECK_NOTHROW(validate_report(bad));
}

TEST_CASE("gp report") {
  TempDir tmp;
  const auto data = tmp.file("d.jsonl",
                             "{\"x\": 0, \"y\": 0.0}\n{\"x\": 1, \"y\": 0.8}\n{\"x\": 2, \"y\": 0.9}\n"
                             "{\"x\": 3, \"y\": 0.1}\n{\"x\": 1.5, \"y\": 1.0, \"split\": \"target\"}\n");
  const auto report = run_gp(merge_config(default_config(), {}, {}, {{"data", data}, {"targets", data}}));
  REQUIRE(report["status"] == "ok");
  CHECK_NOTHROW(validate_report(report));
  const auto& o = report["targets"][0]["outputs"][0];
  CHECK(o["median"] == o["mean"]);
  const double sd = std::sqrt(o["predictive_variance"].get<double>());
  CHECK(o["upper"].get<double>() - o["median"].get<double>() == doctest::Approx(1.959964 * sd).epsilon(1e-6));
  CHECK(o["lower"].get<double>() < o["quantiles"]["p10"].get<double>());
}

TEST_CASE("optimize and grid reports") {
  const auto opt = run_optimize(merge_config(default_config(), {}, {},
                                             {{"function", "sinusoidal"}, {"backend", "mock:cheat:sinusoidal"},
                                              {"trials", 12}, {"candidates", 20}, {"cold_start", 3}}));
  REQUIRE(opt["status"] == "ok");
  CHECK(opt["trials"].size() == 12);
  CHECK_NOTHROW(validate_report(opt));

  TempDir tmp;
  const auto data = tmp.file("d.jsonl", "{\"x\": 0, \"y\": 0.5}\n");
  const auto grid = run_grid(merge_config(default_config(), {}, {},
                                          {{"data", data}, {"backend", "mock:uniform"}, {"x", "1"},
                                           {"ymin", 0.0}, {"ymax", 1.0}, {"steps", 10}, {"precision", 1}}));
  REQUIRE(grid["status"] == "ok");
  CHECK(grid["points"].size() == 11);
  CHECK(grid["points"][0]["text"] == "0.0");
  CHECK(code_of([] { run_experiment(Json{{"command", "fit"}}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("grid over a table model shows both branches") {
  TempDir tmp;
  const auto data = tmp.file("d.jsonl", "{\"x\": 0, \"y\": 0.2}\n{\"x\": 1, \"y\": 0.8}\n");
  const auto grid = run_grid(merge_config(
      default_config(), {}, {},
      {{"data", data}, {"backend", std::string("mock:table:") + LLMP_FIXTURES + "/two_branch.json"},
       {"x", "2"}, {"ymin", 0.0}, {"ymax", 0.9}, {"steps", 9}, {"precision", 1}}));
  REQUIRE(grid["status"] == "ok");
  CHECK(grid["backend"] == "mock:table");
  const auto& pts = grid["points"];
  REQUIRE(pts.size() == 10);
  int modes = 0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double v = pts[i]["log_pdf"].get<double>();
    modes += v > pts[i - 1]["log_pdf"].get<double>() && v > pts[i + 1]["log_pdf"].get<double>();
  }
  CHECK(modes == 2);
  CHECK(code_of([] { make_backend("mock:table:/nonexistent.json", prompting::PromptConfig{}, {}); }) ==
        ErrorCode::IoError);
}

TEST_CASE("report validation") {
  CHECK_THROWS_AS(validate_report(Json::array()), Error);
  Json r = {{"schema", "other"}, {"command", "regress"}, {"config", Json::object()}, {"status", "ok"}};
  CHECK_THROWS_AS(validate_report(r), Error);
  r["schema"] = kReportSchema;
  CHECK_THROWS_AS(validate_report(r), Error);
  r["status"] = "error";
  CHECK_NOTHROW(validate_report(r));
}
