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

// Command-line driver: regress, gp, optimize, synth, eval, grid.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "llmp/common.hpp"
#include "llmp/harness.hpp"

namespace {

using llmp::harness::Json;

// Collects only the flags given on the command line, so the config layers
// underneath can fill the rest.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <class T>
  void add(const std::string& name, const std::string& help) {
    auto slot = std::make_shared<T>();
    auto* opt = app_->add_option("--" + name, *slot, help);
    const std::string key = to_key(name);
    setters_.push_back([this, opt, slot, key] {
      if (opt->count()) cli_[key] = *slot;
    });
  }

  void flag(const std::string& name, const std::string& help) {
    auto* opt = app_->add_flag("--" + name, help);
    const std::string key = to_key(name);
    setters_.push_back([this, opt, key] {
      if (opt->count()) cli_[key] = true;
    });
  }

  Json collect() {
    cli_ = Json::object();
    for (auto& s : setters_) s();
    return cli_;
  }

 private:
  static std::string to_key(std::string name) {
    for (char& c : name)
      if (c == '-') c = '_';
    return name;
  }

  CLI::App* app_;
  std::vector<std::function<void()>> setters_;
  Json cli_;
};

void add_prompt_flags(Flags& f) {
  f.add<std::string>("format", "pair format: comma, comma-newline, compact-newline, paren, labeled, xy");
  f.add<std::string>("order", "training order: sequential, random, distance");
  f.add<std::uint64_t>("order-seed", "seed for the random training order");
  f.add<int>("precision", "decimal places n (bins of width 10^-n)");
  f.add<std::string>("scale", "affine output scale a,b applied before prompting");
  f.add<std::string>("text", "text prefix, or @file");
  f.add<std::string>("backend", "url, mock:uniform, mock:table:<path>, mock:cheat:<fn>[:<sigma>]");
  f.add<double>("temperature", "sampling temperature");
  f.add<double>("top-p", "nucleus sampling mass");
  f.add<int>("max-tokens", "token budget per completion");
  f.add<int>("threads", "concurrent model calls");
}

void add_common_flags(Flags& f) {
  f.add<std::uint64_t>("seed", "random seed");
  f.add<std::string>("out", "output path (stdout when omitted)");
  f.add<std::string>("config", "JSON config file; command-line flags take precedence");
  f.flag("timing", "record wall-clock time in the report");
}

Json resolve(const std::string& command, Flags& flags) {
  Json cli = flags.collect();
  Json file = Json::object();
  if (cli.contains("config")) file = Json::parse(llmp::harness::read_file(cli["config"].get<std::string>()));
  Json cfg = llmp::harness::merge_config(llmp::harness::default_config(),
                                         llmp::harness::environment_config(), file, cli);
  cfg["command"] = command;
  cfg.erase("config");
  return cfg;
}

void emit(const Json& cfg, const std::string& content) {
  const std::string out = cfg.contains("out") ? cfg["out"].get<std::string>() : "";
  if (out.empty() || out == "-") std::cout << content;
  else llmp::harness::write_file(out, content);
}

int finish_report(const Json& cfg, const Json& report) {
  emit(cfg, report.dump(2) + "\n");
  if (report["status"] != "ok") {
    std::cerr << "llmp: " << report.value("error", std::string("failed")) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic regression and optimization by prompting language models"};
  app.require_subcommand(1);

  auto* regress = app.add_subcommand("regress", "predictive distributions at target inputs");
  Flags regress_flags(regress);
  regress_flags.add<std::string>("data", "training observations (JSONL or CSV)");
  regress_flags.add<std::string>("targets", "target inputs, optionally with true values");
  regress_flags.add<std::string>("mode", "independent or autoregressive");
  regress_flags.add<int>("samples", "samples per target");
  regress_flags.add<int>("retry-cap", "attempts per sampled value");
  regress_flags.add<std::string>("csv", "also write a flat per-target CSV here");
  add_prompt_flags(regress_flags);
  add_common_flags(regress_flags);

  auto* gp = app.add_subcommand("gp", "RBF Gaussian-process baseline");
  Flags gp_flags(gp);
  gp_flags.add<std::string>("data", "training observations (JSONL or CSV)");
  gp_flags.add<std::string>("targets", "target inputs, optionally with true values");
  gp_flags.add<int>("restarts", "hyperparameter search starts");
  gp_flags.add<std::string>("csv", "also write a flat per-target CSV here");
  add_common_flags(gp_flags);

  auto* optimize = app.add_subcommand("optimize", "Thompson-sampling maximization of a benchmark");
  Flags opt_flags(optimize);
  opt_flags.add<std::string>("function", "sinusoidal, gramacy, branin, bohachevsky, goldstein, hartmann3");
  opt_flags.add<int>("trials", "objective evaluations");
  opt_flags.add<int>("candidates", "candidates per trial");
  opt_flags.add<int>("cold-start", "initial uniform queries");
  opt_flags.add<int>("retry-cap", "attempts per candidate sample");
  opt_flags.add<std::string>("report", "also write the JSON report here");
  add_prompt_flags(opt_flags);
  add_common_flags(opt_flags);

  auto* synth = app.add_subcommand("synth", "generate a synthetic regression task");
  std::string synth_fn, synth_out;
  int synth_size = 20, synth_targets = 40;
  double synth_noise = 0.05;
  std::uint64_t synth_seed = 0;
  bool synth_exclude = false;
  synth->add_option("--function", synth_fn, "curve name")->required();
  synth->add_option("--size", synth_size, "training points");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--noise", synth_noise, "Gaussian noise standard deviation");
  synth->add_option("--targets", synth_targets, "evenly spaced targets");
  synth->add_flag("--exclude-targets", synth_exclude, "keep target inputs out of the training set");
  synth->add_option("--out", synth_out, "output JSONL path (stdout when omitted)");

  auto* eval = app.add_subcommand("eval", "recompute aggregates from a stored report");
  std::string eval_report;
  eval->add_option("--report", eval_report, "report path")->required();

  auto* grid = app.add_subcommand("grid", "log-density over a grid of output values");
  Flags grid_flags(grid);
  grid_flags.add<std::string>("data", "training observations (JSONL or CSV)");
  grid_flags.add<std::string>("x", "query input: number, comma-separated vector, or text");
  grid_flags.add<double>("ymin", "lowest grid value");
  grid_flags.add<double>("ymax", "highest grid value");
  grid_flags.add<int>("steps", "grid intervals");
  add_prompt_flags(grid_flags);
  add_common_flags(grid_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (regress->parsed() || gp->parsed()) {
      const bool is_gp = gp->parsed();
      const Json cfg = is_gp ? resolve("gp", gp_flags) : resolve("regress", regress_flags);
      const Json report = is_gp ? llmp::harness::run_gp(cfg) : llmp::harness::run_regress(cfg);
      if (cfg.contains("csv") && report["status"] == "ok")
        llmp::harness::write_file(cfg["csv"].get<std::string>(), llmp::harness::report_csv(report));
      return finish_report(cfg, report);
    }
    if (optimize->parsed()) {
      const Json cfg = resolve("optimize", opt_flags);
      std::string trace;
      const Json report = llmp::harness::run_optimize(cfg, &trace);
      if (cfg.contains("report")) llmp::harness::write_file(cfg["report"].get<std::string>(), report.dump(2) + "\n");
      if (report["status"] != "ok") {
        std::cerr << "llmp: " << report.value("error", std::string("failed")) << "\n";
        return 1;
      }
      emit(cfg, trace);
      return 0;
    }
    if (grid->parsed()) {
      const Json cfg = resolve("grid", grid_flags);
      return finish_report(cfg, llmp::harness::run_grid(cfg));
    }
    if (synth->parsed()) {
      llmp::harness::SyntheticTask task;
      task.function = synth_fn;
      task.train_size = synth_size;
      task.seed = synth_seed;
      task.noise = synth_noise;
      task.target_count = synth_targets;
      task.exclude_targets_from_train = synth_exclude;
      const std::string text = llmp::harness::to_jsonl(llmp::harness::generate_synthetic(task));
      if (synth_out.empty() || synth_out == "-") std::cout << text;
      else llmp::harness::write_file(synth_out, text);
      return 0;
    }
    if (eval->parsed()) {
      const Json report = Json::parse(llmp::harness::read_file(eval_report));
      llmp::harness::validate_report(report);
      const auto agg = llmp::harness::recompute_aggregates(report);
      Json out;
      out["nll"] = agg.nll ? Json(*agg.nll) : Json(nullptr);
      out["mae"] = agg.mae ? Json(*agg.mae) : Json(nullptr);
      if (report.contains("aggregate")) {
        const auto& stored = report["aggregate"];
        const bool same = stored.value("nll", Json(nullptr)) == out["nll"] &&
                          stored.value("mae", Json(nullptr)) == out["mae"];
        out["matches_report"] = same;
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const llmp::Error& e) {
    std::cerr << "llmp: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "llmp: malformed JSON: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
