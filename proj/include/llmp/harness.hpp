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

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmp/backend.hpp"
#include "llmp/process.hpp"
#include "llmp/prompting.hpp"

namespace llmp::harness {

using Json = nlohmann::ordered_json;

struct Dataset {
  prompting::TrainingSet train;
  process::TargetSet targets;
};

// ---- synthetic functions ---------------------------------------------------

// The twelve 1-D test curves, evaluated on the integer grid 0..grid-1.
// Closed forms are listed in docs/synthetic.md.
const std::vector<std::string>& synthetic_functions();
double synthetic_value(std::string_view name, double x);  // UnknownFunction

struct SyntheticTask {
  std::string function = "quadratic";
  int train_size = 20;
  double noise = 0.05;
  int precision = 2;
  int grid_points = 200;
  int target_count = 40;
  bool exclude_targets_from_train = false;
  std::uint64_t seed = 0;
};

// Training x values are a seeded subset of the grid; y = f(x) + noise, then
// rounded. Targets are evenly spaced grid points with exact f(x) as truth.
Dataset generate_synthetic(const SyntheticTask& task);

struct BimodalTask {
  double x_min = -10.0;
  double x_max = 10.0;
  int count = 100;
  std::uint64_t seed = 0;
};

// y = 0.05/(1+exp(-x)) + 0.02x + e1*(0.02x+0.08) + 0.03*e2
double bimodal_value(double x, double e1, double e2);

// x evenly spaced over [x_min, x_max]; e1 ~ Bernoulli(0.5), e2 ~ N(0, 1).
prompting::TrainingSet generate_bimodal(const BimodalTask& task);

// ---- files -------------------------------------------------------------------

// Row schema, JSONL: {"x": [..] | "key": "..", "y": number | [numbers],
// "split": "train" | "target"}. CSV: header naming x or x1..xd (or key),
// y or y1..yk, and optionally split. Rows without y are dropped from the
// training split and become truth-less targets. Throws ParseError with the
// line number, SchemaMismatch for rows that disagree with the first row.
Dataset parse_jsonl(std::string_view text);
Dataset parse_csv(std::string_view text);
Dataset load_dataset(const std::filesystem::path& path);  // by extension

// Targets file: rows marked "target" if any, otherwise every row.
process::TargetSet load_targets(const std::filesystem::path& path);

std::string to_jsonl(const Dataset& data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// ---- configuration -------------------------------------------------------------

// Every CLI flag has a key in the merged config object (flag name with '-'
// replaced by '_'). Layers, lowest first: defaults, environment, config
// file, command line.
Json default_config();
Json environment_config();
Json merge_config(const Json& defaults, const Json& env, const Json& file, const Json& cli);

prompting::PromptConfig prompt_config(const Json& cfg);
backend::SamplingParams sampling_params(const Json& cfg);
prompting::AffineScale parse_scale(std::string_view text);  // "a,b"
prompting::Key parse_key(std::string_view text);            // "1.5", "1,2" or free text

// "mock:uniform", "mock:table:<path>", "mock:cheat:<fn>[:<sigma>]" or an
// http(s) URL. <fn> is a synthetic function or benchmark name.
std::unique_ptr<backend::LanguageModel> make_backend(const std::string& spec,
                                                     const prompting::PromptConfig& prompt,
                                                     const Json& cfg);

// ---- experiments ---------------------------------------------------------------

inline constexpr std::string_view kReportSchema = "llmp.report/1";

// Each returns a complete report. On failure the report carries
// "status": "error" and whatever was computed before the failure.
Json run_regress(const Json& cfg);
Json run_gp(const Json& cfg);
Json run_optimize(const Json& cfg, std::string* trace_jsonl = nullptr);
Json run_grid(const Json& cfg);

// Dispatches on cfg["command"].
Json run_experiment(const Json& cfg);

// Flat per-target table: target, output, truth, median, p2.5, ..., p97.5, log_pdf.
std::string report_csv(const Json& report);

struct Aggregates {
  std::optional<double> nll;
  std::optional<double> mae;
};

// Recomputes NLL and MAE from the per-target records alone.
Aggregates recompute_aggregates(const Json& report);

// Throws SchemaMismatch when required fields are missing or mistyped.
void validate_report(const Json& report);

}  // namespace llmp::harness
