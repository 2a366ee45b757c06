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

#include "llmp/harness.hpp"

#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "llmp/bbo.hpp"
#include "llmp/common.hpp"
#include "llmp/density.hpp"
#include "llmp/eval.hpp"
#include "llmp/gp.hpp"
#include "llmp/remote.hpp"

namespace llmp::harness {

using prompting::Key;
using prompting::Observation;

// ---- synthetic functions ---------------------------------------------------

namespace {

struct Curve {
  std::string name;
  double (*f)(double t);
};

// Curves are written in t = x/20, so the 200-point grid spans t in [0, 9.95].
const std::vector<Curve>& curves() {
  static const std::vector<Curve> c = {
      {"linear", [](double t) { return 0.4 * t - 1.0; }},
      {"exponential", [](double t) { return 0.25 * std::exp(0.25 * t); }},
      {"sigmoid", [](double t) { return 3.0 / (1.0 + std::exp(-(t - 5.0))); }},
      {"log", [](double t) { return std::log1p(t); }},
      {"sine", [](double t) { return std::sin(t); }},
      {"beat", [](double t) { return std::sin(2.0 * t) * std::sin(0.3 * t); }},
      {"linear-cosine", [](double t) { return 0.3 * t + std::cos(2.0 * t); }},
      {"linear-sine", [](double t) { return 0.2 * t * std::sin(2.0 * t); }},
      {"gaussian-wave",
       [](double t) { return std::exp(-(t - 5.0) * (t - 5.0) / 4.0) * std::cos(3.0 * t); }},
      {"sinc",
       [](double t) {
         const double u = 2.0 * (t - 5.0);
         return u == 0.0 ? 1.0 : std::sin(u) / u;
       }},
      {"quadratic", [](double t) { return 0.1 * (t - 5.0) * (t - 5.0) - 1.0; }},
      {"x-sine", [](double t) { return 0.2 * t * std::sin(t); }},
  };
  return c;
}

}  // namespace

const std::vector<std::string>& synthetic_functions() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : curves()) n.push_back(c.name);
    return n;
  }();
  return names;
}

double synthetic_value(std::string_view name, double x) {
  for (const auto& c : curves())
    if (c.name == name) return c.f(x / 20.0);
  throw Error(ErrorCode::UnknownFunction, "unknown synthetic function '" + std::string(name) + "'");
}

Dataset generate_synthetic(const SyntheticTask& task) {
  synthetic_value(task.function, 0.0);  // validates the name
  if (task.grid_points < 2 || task.target_count < 1 || task.target_count > task.grid_points)
    throw Error(ErrorCode::InvalidArgument, "target count must lie in [1, grid points]");
  if (task.train_size < 1) throw Error(ErrorCode::InvalidArgument, "train size must be >= 1");
  if (task.noise < 0.0) throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");

  const auto grid = static_cast<std::size_t>(task.grid_points);
  const auto n_targets = static_cast<std::size_t>(task.target_count);
  std::vector<std::size_t> target_idx;
  std::vector<bool> is_target(grid, false);
  for (std::size_t i = 0; i < n_targets; ++i) {
    const std::size_t g = i * grid / n_targets;
    target_idx.push_back(g);
    is_target[g] = true;
  }

  std::vector<std::size_t> pool;
  for (std::size_t g = 0; g < grid; ++g)
    if (!task.exclude_targets_from_train || !is_target[g]) pool.push_back(g);
  if (static_cast<std::size_t>(task.train_size) > pool.size())
    throw Error(ErrorCode::InvalidArgument, "train size exceeds the available grid points");

  Rng rng(task.seed);
  const auto perm = rng.permutation(pool.size());
  std::vector<std::size_t> train_idx;
  for (int i = 0; i < task.train_size; ++i) train_idx.push_back(pool[perm[static_cast<std::size_t>(i)]]);
  std::sort(train_idx.begin(), train_idx.end());

  Dataset d;
  for (std::size_t g : train_idx) {
    const double x = static_cast<double>(g);
    double y = synthetic_value(task.function, x);
    if (task.noise > 0.0) y += task.noise * rng.normal();
    d.train.observations.push_back({std::vector<double>{x}, {numcodec::round_value(y, task.precision)}});
  }
  for (std::size_t g : target_idx) {
    const double x = static_cast<double>(g);
    d.targets.keys.emplace_back(std::vector<double>{x});
    d.targets.truths.push_back({synthetic_value(task.function, x)});
  }
  return d;
}

double bimodal_value(double x, double e1, double e2) {
  return 0.05 / (1.0 + std::exp(-x)) + 0.02 * x + e1 * (0.02 * x + 0.08) + 0.03 * e2;
}

prompting::TrainingSet generate_bimodal(const BimodalTask& task) {
  if (task.count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  Rng rng(task.seed);
  prompting::TrainingSet train;
  for (int i = 0; i < task.count; ++i) {
    const double x = task.count == 1 ? task.x_min
                                     : task.x_min + (task.x_max - task.x_min) * i / (task.count - 1);
    const double e1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double e2 = rng.normal();
    train.observations.push_back({std::vector<double>{x}, {bimodal_value(x, e1, e2)}});
  }
  return train;
}

// ---- files -------------------------------------------------------------------

namespace {

struct Row {
  Key key;
  std::vector<double> y;  // empty when missing
  bool target = false;
  std::size_t line = 0;
};

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaMismatch, "line " + std::to_string(line) + ": " + what);
}

Dataset assemble(const std::vector<Row>& rows) {
  Dataset d;
  const Row* first = rows.empty() ? nullptr : &rows.front();
  std::optional<std::size_t> y_arity;
  std::optional<bool> targets_have_truth;
  for (const auto& r : rows) {
    if (prompting::is_numeric(r.key) != prompting::is_numeric(first->key) ||
        prompting::key_arity(r.key) != prompting::key_arity(first->key))
      schema_error(r.line, "key kind or dimension differs from the first row");
    if (!r.y.empty()) {
      if (y_arity && *y_arity != r.y.size()) schema_error(r.line, "output arity differs from earlier rows");
      y_arity = r.y.size();
    }
    if (r.target) {
      const bool has = !r.y.empty();
      if (targets_have_truth && *targets_have_truth != has)
        schema_error(r.line, "targets must all have y or all omit it");
      targets_have_truth = has;
      d.targets.keys.push_back(r.key);
      if (has) d.targets.truths.push_back(r.y);
    } else if (!r.y.empty()) {
      d.train.observations.push_back({r.key, r.y});
    }
  }
  return d;
}

bool parse_split(const std::string& s, std::size_t line) {
  if (s.empty() || s == "train") return false;
  if (s == "target") return true;
  schema_error(line, "split must be \"train\" or \"target\"");
}

std::optional<double> to_number(std::string_view field) {
  std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

double parse_number(std::string_view field, std::size_t line) {
  const auto v = to_number(field);
  if (!v) parse_error(line, "'" + std::string(field) + "' is not a finite number");
  return *v;
}

double argument_number(std::string_view field, const char* what) {
  const auto v = to_number(field);
  if (!v) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": '" + std::string(field) + "' is not a number");
  return *v;
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  if (quoted) parse_error(lineno, "unterminated quote");
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

Dataset parse_jsonl(std::string_view text) {
  std::vector<Row> rows;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (blank(lines[i])) continue;
    Json j;
    try {
      j = Json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      parse_error(lineno, e.what());
    }
    if (!j.is_object()) parse_error(lineno, "expected a JSON object");
    Row r;
    r.line = lineno;
    if (j.contains("x") == j.contains("key")) schema_error(lineno, "need exactly one of x or key");
    if (j.contains("x")) {
      const auto& x = j["x"];
      std::vector<double> v;
      if (x.is_number()) {
        v.push_back(x.get<double>());
      } else if (x.is_array() && !x.empty()) {
        for (const auto& e : x) {
          if (!e.is_number()) schema_error(lineno, "x entries must be numbers");
          v.push_back(e.get<double>());
        }
      } else {
        schema_error(lineno, "x must be a number or a non-empty array of numbers");
      }
      r.key = std::move(v);
    } else {
      if (!j["key"].is_string()) schema_error(lineno, "key must be a string");
      r.key = j["key"].get<std::string>();
    }
    if (j.contains("y") && !j["y"].is_null()) {
      const auto& y = j["y"];
      if (y.is_number()) {
        r.y.push_back(y.get<double>());
      } else if (y.is_array() && !y.empty()) {
        for (const auto& e : y) {
          if (!e.is_number()) schema_error(lineno, "y entries must be numbers");
          r.y.push_back(e.get<double>());
        }
      } else {
        schema_error(lineno, "y must be a number or a non-empty array of numbers");
      }
    }
    if (j.contains("split")) {
      if (!j["split"].is_string()) schema_error(lineno, "split must be a string");
      r.target = parse_split(j["split"].get<std::string>(), lineno);
    }
    rows.push_back(std::move(r));
  }
  return assemble(rows);
}

Dataset parse_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t h = 0;
  while (h < lines.size() && blank(lines[h])) ++h;
  if (h == lines.size()) return {};
  const auto header = split_csv_line(lines[h], h + 1);

  std::vector<std::size_t> xcols, ycols;
  std::optional<std::size_t> keycol, splitcol;
  auto indexed = [](const std::string& name, char prefix) {
    if (name.size() < 2 || name[0] != prefix) return false;
    return std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (name == "x" || indexed(name, 'x')) xcols.push_back(c);
    else if (name == "y" || indexed(name, 'y')) ycols.push_back(c);
    else if (name == "key") keycol = c;
    else if (name == "split") splitcol = c;
    else schema_error(h + 1, "unknown column '" + name + "'");
  }
  if (xcols.empty() == !keycol) schema_error(h + 1, "need x columns or a key column, not both");
  if (ycols.empty()) schema_error(h + 1, "no y column");

  std::vector<Row> rows;
  for (std::size_t i = h + 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (blank(lines[i])) continue;
    const auto f = split_csv_line(lines[i], lineno);
    if (f.size() != header.size())
      schema_error(lineno, std::to_string(f.size()) + " fields, header has " + std::to_string(header.size()));
    Row r;
    r.line = lineno;
    if (keycol) {
      r.key = f[*keycol];
    } else {
      std::vector<double> x;
      for (std::size_t c : xcols) x.push_back(parse_number(f[c], lineno));
      r.key = std::move(x);
    }
    const bool any_y = std::any_of(ycols.begin(), ycols.end(), [&](std::size_t c) { return !f[c].empty(); });
    if (any_y)
      for (std::size_t c : ycols) r.y.push_back(parse_number(f[c], lineno));
    if (splitcol) r.target = parse_split(f[*splitcol], lineno);
    rows.push_back(std::move(r));
  }
  return assemble(rows);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return path.extension() == ".csv" ? parse_csv(text) : parse_jsonl(text);
}

process::TargetSet load_targets(const std::filesystem::path& path) {
  Dataset d = load_dataset(path);
  if (!d.targets.keys.empty()) return d.targets;
  process::TargetSet t;
  for (auto& obs : d.train.observations) {
    t.keys.push_back(obs.key);
    t.truths.push_back(obs.values);
  }
  return t;
}

namespace {

Json key_json(const Key& key) {
  if (const auto* s = std::get_if<std::string>(&key)) return *s;
  return std::get<std::vector<double>>(key);
}

Json values_json(const std::vector<double>& v) {
  if (v.size() == 1) return v.front();
  return v;
}

Json row_json(const Key& key, const std::vector<double>* y, const char* split) {
  Json j;
  if (prompting::is_numeric(key)) j["x"] = key_json(key);
  else j["key"] = key_json(key);
  if (y) j["y"] = values_json(*y);
  j["split"] = split;
  return j;
}

}  // namespace

std::string to_jsonl(const Dataset& data) {
  std::string out;
  for (const auto& obs : data.train.observations) out += row_json(obs.key, &obs.values, "train").dump() + "\n";
  for (std::size_t t = 0; t < data.targets.keys.size(); ++t) {
    const auto* y = data.targets.has_truths() ? &data.targets.truths[t] : nullptr;
    out += row_json(data.targets.keys[t], y, "target").dump() + "\n";
  }
  return out;
}

// ---- configuration -------------------------------------------------------------

Json default_config() {
  return Json{{"mode", "independent"},
              {"format", "comma-newline"},
              {"order", "distance"},
              {"order_seed", 0},
              {"precision", 2},
              {"samples", 50},
              {"seed", 0},
              {"temperature", 1.0},
              {"top_p", 1.0},
              {"max_tokens", 16},
              {"retry_cap", 10},
              {"threads", 1},
              {"restarts", 8},
              {"trials", 100},
              {"candidates", 500},
              {"cold_start", 7},
              {"steps", 100},
              {"timing", false}};
}

Json environment_config() {
  Json env = Json::object();
  if (const char* url = std::getenv("LLMP_BACKEND_URL"); url && *url) env["backend"] = url;
  if (const char* tok = std::getenv("LLMP_BACKEND_TOKEN"); tok && *tok) env["token"] = tok;
  return env;
}

Json merge_config(const Json& defaults, const Json& env, const Json& file, const Json& cli) {
  Json out = defaults;
  for (const Json* layer : {&env, &file, &cli}) {
    if (layer->is_null()) continue;
    if (!layer->is_object()) throw Error(ErrorCode::SchemaMismatch, "config layers must be objects");
    for (const auto& [k, v] : layer->items()) out[k] = v;
  }
  return out;
}

prompting::AffineScale parse_scale(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "scale must be written a,b");
  prompting::AffineScale s{argument_number(text.substr(0, comma), "scale"),
                           argument_number(text.substr(comma + 1), "scale")};
  if (s.a == 0.0) throw Error(ErrorCode::ZeroScale, "scale factor is zero");
  return s;
}

prompting::Key parse_key(std::string_view text) {
  std::vector<double> v;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    std::string part(rest.substr(0, comma));
    part.erase(0, part.find_first_not_of(' '));
    char* end = nullptr;
    const double x = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size() || !std::isfinite(x)) return std::string(text);
    v.push_back(x);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return v;
}

namespace {

template <class T>
T get_or(const Json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  try {
    return cfg[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::SchemaMismatch, std::string("config field '") + key + "' has the wrong type");
  }
}

std::string require_string(const Json& cfg, const char* key) {
  const auto v = get_or<std::string>(cfg, key, "");
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, std::string("missing --") + key);
  return v;
}

std::string resolve_text(const std::string& text) {
  if (!text.empty() && text.front() == '@') {
    std::string body = read_file(text.substr(1));
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    return body;
  }
  return text;
}

}  // namespace

prompting::PromptConfig prompt_config(const Json& cfg) {
  prompting::PromptConfig p;
  p.pair_format = prompting::parse_pair_format(get_or<std::string>(cfg, "format", "comma-newline"));
  p.ordering.kind = prompting::parse_order_kind(get_or<std::string>(cfg, "order", "distance"));
  p.ordering.seed = get_or<std::uint64_t>(cfg, "order_seed", 0);
  p.format.precision = get_or<int>(cfg, "precision", 2);
  if (p.format.precision < 0 || p.format.precision > 12)
    throw Error(ErrorCode::InvalidArgument, "precision must lie in [0, 12]");
  if (const auto text = get_or<std::string>(cfg, "text", ""); !text.empty())
    p.text_prefix = resolve_text(text);
  if (const auto scale = get_or<std::string>(cfg, "scale", ""); !scale.empty())
    p.scale = parse_scale(scale);
  return p;
}

backend::SamplingParams sampling_params(const Json& cfg) {
  backend::SamplingParams s;
  s.temperature = get_or<double>(cfg, "temperature", 1.0);
  s.top_p = get_or<double>(cfg, "top_p", 1.0);
  s.max_tokens = get_or<int>(cfg, "max_tokens", 16);
  s.validate();
  return s;
}

std::unique_ptr<backend::LanguageModel> make_backend(const std::string& spec,
                                                     const prompting::PromptConfig& prompt,
                                                     const Json& cfg) {
  if (spec.empty())
    throw Error(ErrorCode::BackendUnavailable, "no backend given (use --backend or LLMP_BACKEND_URL)");
  const auto fmt = prompt.value_format();
  if (spec == "mock:uniform") return std::make_unique<backend::UniformDigitLM>(fmt.terminal.empty() ? "\n" : fmt.terminal);
  if (spec.rfind("mock:table:", 0) == 0)
    return std::make_unique<backend::TableLM>(backend::TableLM::from_json_text(read_file(spec.substr(11))));
  if (spec.rfind("mock:cheat:", 0) == 0) {
    std::string fn = spec.substr(11);
    double sigma = 0.0;
    if (const auto colon = fn.find(':'); colon != std::string::npos) {
      sigma = argument_number(std::string_view(fn).substr(colon + 1), "cheat sigma");
      fn.resize(colon);
    }
    backend::Objective f;
    if (std::find(synthetic_functions().begin(), synthetic_functions().end(), fn) !=
        synthetic_functions().end()) {
      f = [fn](std::span<const double> x) { return synthetic_value(fn, x[0]); };
    } else {
      const auto b = bbo::parse_benchmark(fn);
      f = [b](std::span<const double> x) { return bbo::eval_benchmark(b, x); };
    }
    return std::make_unique<backend::CheatFunctionBackend>(f, sigma, prompt.pair_format, prompt.format, fn);
  }
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    auto opts = backend::remote_options_from_env();
    opts.url = spec;
    if (const auto tok = get_or<std::string>(cfg, "token", ""); !tok.empty()) opts.token = tok;
    return std::make_unique<backend::RemoteBackend>(opts, std::max(1, get_or<int>(cfg, "threads", 1)));
  }
  throw Error(ErrorCode::InvalidArgument, "unrecognized backend '" + spec + "'");
}

// ---- experiments ---------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

Json report_header(const char* command, const Json& cfg) {
  Json r;
  r["schema"] = kReportSchema;
  r["command"] = command;
  // Secrets and output destinations stay out of the echo, so reruns that
  // write elsewhere produce identical reports.
  Json echo = cfg;
  for (const char* k : {"token", "out", "csv", "report"})
    if (echo.contains(k)) echo.erase(k);
  r["config"] = echo;
  r["status"] = "running";
  return r;
}

std::string level_label(int permille) {
  std::string s = "p" + std::to_string(permille / 10);
  if (permille % 10) s += "." + std::to_string(permille % 10);
  return s;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json summary_json(const eval::TargetSummary& s, bool with_samples) {
  Json o;
  o["median"] = s.median;
  o["lower"] = s.lower;
  o["upper"] = s.upper;
  Json q = Json::object();
  for (const auto& [level, v] : s.quantiles) q[level_label(level)] = v;
  o["quantiles"] = q;
  if (with_samples) o["samples"] = s.samples;
  return o;
}

Json empty_summary() {
  return Json{{"median", nullptr}, {"lower", nullptr}, {"upper", nullptr},
              {"quantiles", Json::object()}, {"samples", Json::array()}};
}

void finish(Json& report, const Json& cfg, Clock::time_point start) {
  if (get_or<bool>(cfg, "timing", false))
    report["timing"] = {{"seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
}

void fill_aggregates(Json& report) {
  const auto agg = recompute_aggregates(report);
  report["aggregate"]["nll"] = agg.nll ? finite_or_null(*agg.nll) : Json(nullptr);
  report["aggregate"]["mae"] = agg.mae ? finite_or_null(*agg.mae) : Json(nullptr);
}

}  // namespace

Json run_regress(const Json& cfg) {
  const auto start = Clock::now();
  Json report = report_header("regress", cfg);
  try {
    const auto train = load_dataset(require_string(cfg, "data")).train;
    const auto targets = load_targets(require_string(cfg, "targets"));
    targets.validate(train);
    if (train.observations.empty()) throw Error(ErrorCode::EmptyInput, "no training observations");
    const auto prompt = prompt_config(cfg);
    const auto model = make_backend(get_or<std::string>(cfg, "backend", ""), prompt, cfg);
    report["backend"] = model->identity();
    const auto mode = process::parse_mode(get_or<std::string>(cfg, "mode", "independent"));
    const int threads = get_or<int>(cfg, "threads", 1);

    Json records = Json::array();
    for (std::size_t t = 0; t < targets.size(); ++t) {
      Json rec;
      rec["index"] = t;
      rec["key"] = key_json(targets.keys[t]);
      rec["truth"] = targets.has_truths() ? values_json(targets.truths[t]) : Json(nullptr);
      rec["log_pdf"] = nullptr;
      records.push_back(rec);
    }
    report["targets"] = records;

    if (targets.has_truths()) {
      const auto joint = mode == process::Mode::Independent
                             ? process::joint_loglik_independent(*model, prompt, train, targets, {threads})
                             : process::joint_loglik_autoregressive(*model, prompt, train, targets);
      for (std::size_t t = 0; t < targets.size(); ++t)
        report["targets"][t]["log_pdf"] = finite_or_null(joint.conditionals[t]);
      report["aggregate"]["joint_log_likelihood"] = finite_or_null(joint.joint);
      report["aggregate"]["target_order"] = joint.order;
    }

    process::SampleOptions so;
    so.mode = mode;
    so.paths = get_or<int>(cfg, "samples", 50);
    so.params = sampling_params(cfg);
    so.seed = get_or<std::uint64_t>(cfg, "seed", 0);
    so.retry_cap = get_or<int>(cfg, "retry_cap", 10);
    so.threads = threads;
    const auto paths = process::sample_paths(*model, prompt, train, targets, so);
    int failed = 0;
    for (const auto& p : paths) failed += p.failed ? 1 : 0;
    const std::size_t arity = train.observations.front().values.size();
    for (std::size_t j = 0; j < arity; ++j) {
      const auto by_target = process::samples_by_target(paths, targets.size(), j);
      for (std::size_t t = 0; t < targets.size(); ++t)
        report["targets"][t]["outputs"].push_back(
            by_target[t].empty() ? empty_summary() : summary_json(eval::summarize(by_target[t]), true));
    }
    report["aggregate"]["failed_paths"] = failed;
    fill_aggregates(report);
    report["status"] = "ok";
  } catch (const Error& e) {
    report["status"] = "error";
    report["error"] = e.what();
  }
  finish(report, cfg, start);
  return report;
}

Json run_gp(const Json& cfg) {
  const auto start = Clock::now();
  Json report = report_header("gp", cfg);
  try {
    const auto train = load_dataset(require_string(cfg, "data")).train;
    const auto targets = load_targets(require_string(cfg, "targets"));
    targets.validate(train);
    if (train.observations.empty()) throw Error(ErrorCode::EmptyInput, "no training observations");
    report["backend"] = "gp:rbf";
    gp::FitOptions fo;
    fo.restarts = get_or<int>(cfg, "restarts", 8);
    fo.seed = get_or<std::uint64_t>(cfg, "seed", 0);
    const auto model = gp::fit_multi(train, fo);

    std::vector<std::vector<double>> xs;
    for (const auto& k : targets.keys) {
      if (!prompting::is_numeric(k)) throw Error(ErrorCode::KindMismatch, "the GP baseline needs numeric keys");
      xs.push_back(std::get<std::vector<double>>(k));
    }
    const std::size_t arity = model.per_output.size();
    std::vector<std::vector<double>> truths(arity);
    if (targets.has_truths())
      for (const auto& row : targets.truths)
        for (std::size_t j = 0; j < arity; ++j) truths[j].push_back(row[j]);
    const auto post = gp::predict_multi(model, train, xs, targets.has_truths() ? &truths : nullptr);

    Json hyper = Json::array();
    for (const auto& h : model.per_output)
      hyper.push_back({{"length_scale", h.length_scale},
                       {"signal_variance", h.signal_variance},
                       {"noise_variance", h.noise_variance}});
    report["hyperparameters"] = hyper;

    const boost::math::normal_distribution<double> unit;
    Json records = Json::array();
    for (std::size_t t = 0; t < targets.size(); ++t) {
      Json rec;
      rec["index"] = t;
      rec["key"] = key_json(targets.keys[t]);
      rec["truth"] = targets.has_truths() ? values_json(targets.truths[t]) : Json(nullptr);
      double lp = 0.0;
      for (std::size_t j = 0; j < arity; ++j) {
        if (targets.has_truths()) lp += post[j].log_pdf[t];
        const double mean = post[j].mean[t];
        const double sd = std::sqrt(post[j].predictive_variance[t]);
        auto q = [&](int permille) {
          return permille == 500 ? mean : mean + sd * boost::math::quantile(unit, permille / 1000.0);
        };
        Json o;
        o["mean"] = mean;
        o["variance"] = post[j].variance[t];
        o["predictive_variance"] = post[j].predictive_variance[t];
        o["median"] = mean;
        o["lower"] = q(25);
        o["upper"] = q(975);
        Json qs = Json::object();
        for (int level : eval::kQuantileLevels) qs[level_label(level)] = q(level);
        o["quantiles"] = qs;
        rec["outputs"].push_back(o);
      }
      rec["log_pdf"] = targets.has_truths() ? finite_or_null(lp) : Json(nullptr);
      records.push_back(rec);
    }
    report["targets"] = records;
    fill_aggregates(report);
    report["status"] = "ok";
  } catch (const Error& e) {
    report["status"] = "error";
    report["error"] = e.what();
  }
  finish(report, cfg, start);
  return report;
}

Json run_optimize(const Json& cfg, std::string* trace_jsonl) {
  const auto start = Clock::now();
  Json report = report_header("optimize", cfg);
  try {
    const auto b = bbo::parse_benchmark(require_string(cfg, "function"));
    auto oc = bbo::default_config(b);
    oc.trials = get_or<int>(cfg, "trials", 100);
    oc.candidates = get_or<int>(cfg, "candidates", 500);
    oc.cold_start = get_or<int>(cfg, "cold_start", 7);
    oc.seed = get_or<std::uint64_t>(cfg, "seed", 0);
    oc.prompt = prompt_config(cfg);
    oc.params = sampling_params(cfg);
    oc.retry_cap = get_or<int>(cfg, "retry_cap", 10);
    oc.threads = get_or<int>(cfg, "threads", 1);
    const auto model = make_backend(get_or<std::string>(cfg, "backend", ""), oc.prompt, cfg);
    report["backend"] = model->identity();
    const auto trace = bbo::optimize(
        *model, [b](std::span<const double> x) { return bbo::eval_benchmark(b, x); }, oc);
    Json trials = Json::array();
    for (const auto& t : trace.trials) {
      Json r{{"trial", t.trial}, {"x", t.x}, {"y", t.y}, {"best_y", t.best_y},
             {"cold_start", t.cold_start}, {"fallback", t.fallback}};
      if (!t.failure.empty()) r["failure"] = t.failure;
      trials.push_back(r);
    }
    report["trials"] = trials;
    report["max_x"] = trace.max_x;
    report["max_y"] = trace.max_y;
    report["known_max"] = bbo::info(b).known_max;
    if (trace_jsonl) *trace_jsonl = trace.to_jsonl();
    report["status"] = "ok";
  } catch (const Error& e) {
    report["status"] = "error";
    report["error"] = e.what();
  }
  finish(report, cfg, start);
  return report;
}

Json run_grid(const Json& cfg) {
  const auto start = Clock::now();
  Json report = report_header("grid", cfg);
  try {
    const auto train = load_dataset(require_string(cfg, "data")).train;
    const auto prompt = prompt_config(cfg);
    const auto model = make_backend(get_or<std::string>(cfg, "backend", ""), prompt, cfg);
    report["backend"] = model->identity();
    const Key key = parse_key(require_string(cfg, "x"));
    const double lo = get_or<double>(cfg, "ymin", 0.0);
    const double hi = get_or<double>(cfg, "ymax", 1.0);
    const int steps = get_or<int>(cfg, "steps", 100);
    if (steps < 1 || !(lo <= hi)) throw Error(ErrorCode::InvalidArgument, "need ymin <= ymax and steps >= 1");
    auto scaled = train;
    double correction = 0.0;
    if (prompt.scale) {
      scaled = prompting::apply_scale(train, *prompt.scale);
      correction = prompt.scale->log_density_correction();
    }
    const std::string text = prompting::PromptBuilder(prompt, scaled).marginal(key);
    std::vector<double> ys;
    for (int i = 0; i <= steps; ++i) {
      const double y = lo + (hi - lo) * i / steps;
      ys.push_back(prompt.scale ? prompt.scale->apply(y) : y);
    }
    Json points = Json::array();
    for (const auto& d : density::density_grid(*model, text, ys, prompt.value_format()))
      points.push_back({{"y", prompt.scale ? prompt.scale->invert(d.y) : d.y},
                        {"text", d.text},
                        {"log_mass", finite_or_null(d.log_mass)},
                        {"log_pdf", finite_or_null(d.log_pdf + correction)}});
    report["key"] = key_json(key);
    report["points"] = points;
    report["status"] = "ok";
  } catch (const Error& e) {
    report["status"] = "error";
    report["error"] = e.what();
  }
  finish(report, cfg, start);
  return report;
}

Json run_experiment(const Json& cfg) {
  const auto cmd = get_or<std::string>(cfg, "command", "");
  if (cmd == "regress") return run_regress(cfg);
  if (cmd == "gp") return run_gp(cfg);
  if (cmd == "optimize") return run_optimize(cfg);
  if (cmd == "grid") return run_grid(cfg);
  throw Error(ErrorCode::InvalidArgument, "unknown experiment command '" + cmd + "'");
}

namespace {

std::string csv_number(const Json& v) {
  if (v.is_null()) return "";
  std::ostringstream ss;
  ss.precision(17);
  ss << v.get<double>();
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string report_csv(const Json& report) {
  std::string out = "target,key,output,truth,median";
  for (int level : eval::kQuantileLevels) out += "," + level_label(level);
  out += ",log_pdf\n";
  if (!report.contains("targets")) return out;
  for (const auto& rec : report["targets"]) {
    if (!rec.contains("outputs")) continue;
    const std::string key = rec["key"].is_string() ? rec["key"].get<std::string>() : rec["key"].dump();
    for (std::size_t j = 0; j < rec["outputs"].size(); ++j) {
      const auto& o = rec["outputs"][j];
      Json truth = nullptr;
      if (rec["truth"].is_number()) truth = rec["truth"];
      else if (rec["truth"].is_array()) truth = rec["truth"][j];
      out += std::to_string(rec["index"].get<std::size_t>()) + "," + csv_field(key) + "," +
             std::to_string(j) + "," + csv_number(truth) + "," + csv_number(o["median"]);
      for (int level : eval::kQuantileLevels) {
        const auto label = level_label(level);
        out += "," + (o["quantiles"].contains(label) ? csv_number(o["quantiles"][label]) : std::string());
      }
      out += "," + csv_number(rec["log_pdf"]) + "\n";
    }
  }
  return out;
}

Aggregates recompute_aggregates(const Json& report) {
  Aggregates a;
  if (!report.contains("targets")) return a;
  std::vector<double> log_pdfs, medians, truths;
  bool all_scored = !report["targets"].empty();
  for (const auto& rec : report["targets"]) {
    if (rec["log_pdf"].is_number()) log_pdfs.push_back(rec["log_pdf"].get<double>());
    else all_scored = false;
    if (!rec.contains("outputs") || rec["truth"].is_null()) continue;
    for (std::size_t j = 0; j < rec["outputs"].size(); ++j) {
      const auto& m = rec["outputs"][j]["median"];
      const Json& t = rec["truth"].is_array() ? rec["truth"][j] : rec["truth"];
      if (!m.is_number() || !t.is_number()) continue;
      medians.push_back(m.get<double>());
      truths.push_back(t.get<double>());
    }
  }
  if (all_scored) a.nll = eval::nll(log_pdfs);
  if (!medians.empty()) a.mae = eval::mae(medians, truths);
  return a;
}

void validate_report(const Json& r) {
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::SchemaMismatch, "report: " + what);
  };
  need(r.is_object(), "not an object");
  need(r.contains("schema") && r["schema"] == kReportSchema, "unknown schema");
  need(r.contains("command") && r["command"].is_string(), "missing command");
  need(r.contains("config") && r["config"].is_object(), "missing config");
  need(r.contains("status") && r["status"].is_string(), "missing status");
  if (r["status"] != "ok") return;
  const auto cmd = r["command"].get<std::string>();
  if (cmd == "regress" || cmd == "gp") {
    need(r.contains("targets") && r["targets"].is_array(), "missing targets");
    for (const auto& rec : r["targets"]) {
      need(rec.contains("index") && rec["index"].is_number_unsigned(), "target without index");
      need(rec.contains("key"), "target without key");
      need(rec.contains("truth"), "target without truth field");
      need(rec.contains("log_pdf") && (rec["log_pdf"].is_null() || rec["log_pdf"].is_number()),
           "bad log_pdf");
      need(rec.contains("outputs") && rec["outputs"].is_array(), "target without outputs");
      for (const auto& o : rec["outputs"]) {
        need(o.contains("median") && o.contains("lower") && o.contains("upper"), "output without bands");
        need(o.contains("quantiles") && o["quantiles"].is_object(), "output without quantiles");
      }
    }
    need(r.contains("aggregate") && r["aggregate"].is_object(), "missing aggregate");
  } else if (cmd == "optimize") {
    need(r.contains("trials") && r["trials"].is_array(), "missing trials");
  } else if (cmd == "grid") {
    need(r.contains("points") && r["points"].is_array(), "missing points");
  }
}

}  // namespace llmp::harness
