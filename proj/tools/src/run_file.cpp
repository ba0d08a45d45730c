#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "llmize/cli.hpp"

namespace llmize::cli {

using nlohmann::json;

namespace {

class Source {
 public:
  Source(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::size_t line_at(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
  }

  // Offset of `"key"` followed by a colon, searching from `from`.
  std::size_t find_key(const std::string& key, std::size_t from) const {
    const std::string quoted = "\"" + key + "\"";
    for (auto pos = text_.find(quoted, from); pos != std::string_view::npos; pos = text_.find(quoted, pos + 1)) {
      auto after = text_.find_first_not_of(" \t\r\n", pos + quoted.size());
      if (after != std::string_view::npos && text_[after] == ':') return pos;
    }
    return from;
  }

  [[noreturn]] void fail(std::size_t offset, const std::string& message) const {
    throw ConfigError(file_, line_at(offset), message);
  }

 private:
  std::string_view text_;
  std::string file_;
};

// A JSON object whose keys are checked against an allow-list on entry.
class Section {
 public:
  Section(const Source& src, const json& obj, std::string path, std::size_t offset,
          std::initializer_list<const char*> allowed)
      : src_(src), obj_(obj), path_(std::move(path)), offset_(offset) {
    if (!obj_.is_object()) src_.fail(offset_, "'" + display(path_) + "' must be a JSON object");
    const std::set<std::string> allow(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj_.items()) {
      if (!allow.contains(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        src_.fail(src_.find_key(key, offset_), "unknown key '" + qualified(key) + "' (allowed: " + list + ")");
      }
    }
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  Section child(const std::string& key, std::initializer_list<const char*> allowed) const {
    return Section(src_, obj_.at(key), qualified(key), src_.find_key(key, offset_), allowed);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    src_.fail(src_.find_key(key, offset_), "key '" + qualified(key) + "' " + what);
  }

  std::string string(const std::string& key) const {
    const auto& v = obj_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) const {
    const auto& v = obj_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const auto& v = obj_.at(key);
    if (!v.is_number_unsigned()) fail(key, "must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::size_t positive(const std::string& key) const {
    const auto v = unsigned_integer(key);
    if (v == 0) fail(key, "must be >= 1");
    return static_cast<std::size_t>(v);
  }

  bool boolean(const std::string& key) const {
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = obj_.at(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) const {
    const auto& v = obj_.at(key);
    if (!v.is_array()) fail(key, "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) fail(key, "must be an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  const json& raw(const std::string& key) const { return obj_.at(key); }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  static std::string display(const std::string& p) { return p.empty() ? "<root>" : p; }

  const Source& src_;
  const json& obj_;
  std::string path_;
  std::size_t offset_;
};

SolutionSchema parse_schema(const Section& s) {
  const auto type = s.string("type");
  if (type == "real_vector") {
    if (!s.has("lower") || !s.has("upper")) s.fail("type", "real_vector needs 'lower' and 'upper'");
    const auto lo = s.numbers("lower");
    const auto hi = s.numbers("upper");
    if (lo.size() != hi.size() || lo.empty()) s.fail("lower", "and 'upper' must be non-empty and equally long");
    RealVectorSchema rv;
    for (std::size_t i = 0; i < lo.size(); ++i) rv.bounds.push_back({lo[i], hi[i]});
    return rv;
  }
  if (type == "permutation") {
    if (!s.has("n")) s.fail("type", "permutation needs 'n'");
    return PermutationSchema{s.positive("n")};
  }
  if (type == "keyed_scalars") {
    if (!s.has("keys") || !s.has("lower") || !s.has("upper")) {
      s.fail("type", "keyed_scalars needs 'keys', 'lower' and 'upper'");
    }
    KeyedScalarsSchema ks;
    ks.keys = s.strings("keys");
    const auto lo = s.numbers("lower");
    const auto hi = s.numbers("upper");
    if (lo.size() != ks.keys.size() || hi.size() != ks.keys.size()) {
      s.fail("lower", "and 'upper' must have one entry per key");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) ks.bounds.push_back({lo[i], hi[i]});
    return ks;
  }
  s.fail("type", "must be one of real_vector, permutation, keyed_scalars");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunFile parse_run_file_text(std::string_view text, const std::string& file_name,
                            const std::filesystem::path& base_dir) {
  const Source src(text, file_name);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    src.fail(e.byte > 0 ? e.byte - 1 : 0, std::string("invalid JSON: ") + e.what());
  }

  const Section root(src, doc, "", 0,
                     {"strategy", "objective", "backend", "seeds", "max_steps", "batch", "history_capacity", "workers",
                      "rng_seed", "model_temperature", "max_output_tokens", "on_error", "eval_timeout_ms", "hlmsa",
                      "callbacks", "output"});
  RunFile rf;
  rf.output_dir = base_dir;

  if (root.has("strategy")) {
    try {
      rf.strategy = strategy_from_string(root.string("strategy"));
    } catch (const ContractViolation& e) {
      root.fail("strategy", std::string("is invalid: ") + e.what());
    }
  }

  if (!root.has("objective")) src.fail(0, "missing required key 'objective'");
  {
    const auto o = root.child("objective", {"benchmark", "tsp_cities", "instance_seed", "command", "description",
                                            "domain_knowledge", "direction", "schema"});
    if (o.has("benchmark") == o.has("command")) {
      root.fail("objective", "must set exactly one of 'benchmark' or 'command'");
    }
    if (o.has("benchmark")) {
      rf.objective.benchmark = o.string("benchmark");
      const auto names = benchmark_names();
      if (std::find(names.begin(), names.end(), *rf.objective.benchmark) == names.end()) {
        o.fail("benchmark", "names unknown benchmark '" + *rf.objective.benchmark + "' (known: convex2d, lp3, tsp)");
      }
      if (o.has("tsp_cities")) rf.objective.tsp_cities = o.positive("tsp_cities");
      if (o.has("instance_seed")) rf.objective.instance_seed = o.unsigned_integer("instance_seed");
      if (o.has("domain_knowledge")) rf.objective.domain_knowledge = o.string("domain_knowledge");
    } else {
      rf.objective.command = o.strings("command");
      if (rf.objective.command.empty()) o.fail("command", "must not be empty");
      if (!o.has("description")) o.fail("command", "requires 'description'");
      if (!o.has("schema")) o.fail("command", "requires 'schema'");
      rf.objective.description = o.string("description");
      if (rf.objective.description.empty()) o.fail("description", "must not be empty");
      if (o.has("domain_knowledge")) rf.objective.domain_knowledge = o.string("domain_knowledge");
      if (o.has("direction")) {
        const auto d = o.string("direction");
        if (d != "minimize" && d != "maximize") o.fail("direction", "must be minimize or maximize");
        rf.objective.direction = direction_from_string(d);
      }
      const auto schema = o.child("schema", {"type", "lower", "upper", "n", "keys"});
      rf.objective.schema = parse_schema(schema);
      try {
        validate_schema(*rf.objective.schema);
      } catch (const ContractViolation& e) {
        o.fail("schema", std::string("is invalid: ") + e.what());
      }
    }
  }

  if (root.has("backend")) {
    const auto b = root.child("backend", {"type", "seed", "step_scale", "transcript", "base_url", "model", "api_key",
                                          "api_key_env", "timeout_ms", "max_retries"});
    const auto type = b.has("type") ? b.string("type") : std::string("perturb");
    if (type == "perturb") {
      rf.backend.kind = BackendBlock::Kind::Perturb;
      if (b.has("seed")) rf.backend.seed = b.unsigned_integer("seed");
      if (b.has("step_scale")) {
        rf.backend.step_scale = b.number("step_scale");
        if (!(*rf.backend.step_scale > 0.0)) b.fail("step_scale", "must be > 0");
      }
    } else if (type == "scripted") {
      rf.backend.kind = BackendBlock::Kind::Scripted;
      if (!b.has("transcript")) b.fail("type", "scripted backend requires 'transcript'");
      rf.backend.transcript = resolve(base_dir, b.string("transcript"));
    } else if (type == "http") {
      rf.backend.kind = BackendBlock::Kind::Http;
      if (b.has("base_url")) rf.backend.http.base_url = b.string("base_url");
      if (!b.has("model")) b.fail("type", "http backend requires 'model'");
      rf.backend.http.model = b.string("model");
      if (b.has("api_key")) rf.backend.http.api_key = b.string("api_key");
      if (b.has("api_key_env")) rf.backend.http.api_key_env = b.string("api_key_env");
      if (b.has("timeout_ms")) rf.backend.http.timeout = std::chrono::milliseconds(b.positive("timeout_ms"));
      if (b.has("max_retries")) {
        const auto r = b.unsigned_integer("max_retries");
        if (r > 1) b.fail("max_retries", "must be 0 or 1");
        rf.backend.http.max_retries = static_cast<int>(r);
      }
    } else {
      b.fail("type", "must be one of perturb, scripted, http");
    }
  }

  if (root.has("seeds")) {
    const auto s = root.child("seeds", {"count", "style", "seed"});
    SeedBlock sb;
    if (s.has("count")) sb.count = s.positive("count");
    if (s.has("style")) {
      const auto style = s.string("style");
      if (style == "grid") {
        sb.style = SeedStyle::Grid;
      } else if (style == "uniform") {
        sb.style = SeedStyle::UniformRandom;
      } else {
        s.fail("style", "must be grid or uniform");
      }
    }
    if (s.has("seed")) sb.seed = s.unsigned_integer("seed");
    rf.seeds = sb;
  }

  if (root.has("max_steps")) rf.run.max_steps = root.positive("max_steps");
  if (root.has("batch")) rf.run.batch = root.positive("batch");
  if (root.has("history_capacity")) rf.run.history_capacity = root.positive("history_capacity");
  if (root.has("workers")) rf.run.workers = root.positive("workers");
  if (root.has("rng_seed")) rf.run.rng_seed = root.unsigned_integer("rng_seed");
  if (root.has("model_temperature")) {
    rf.run.sampling.model_temperature = root.number("model_temperature");
    if (rf.run.sampling.model_temperature < 0.0 || rf.run.sampling.model_temperature > 2.0) {
      root.fail("model_temperature", "must lie in [0, 2]");
    }
  }
  if (root.has("max_output_tokens")) rf.run.sampling.max_output_tokens = root.positive("max_output_tokens");
  if (root.has("on_error")) {
    const auto& v = root.raw("on_error");
    if (v.is_string() && v.get<std::string>() == "abort") {
      rf.run.on_error = AbortOnError{};
    } else if (v.is_object()) {
      const auto p = root.child("on_error", {"penalty"});
      if (!p.has("penalty")) root.fail("on_error", "object form needs 'penalty'");
      rf.run.on_error = PenaltyScore{p.number("penalty")};
    } else {
      root.fail("on_error", "must be \"abort\" or {\"penalty\": <number>}");
    }
  }
  if (root.has("eval_timeout_ms")) rf.run.eval_timeout = std::chrono::milliseconds(root.positive("eval_timeout_ms"));

  if (root.has("hlmsa")) {
    const auto h = root.child("hlmsa", {"initial_temperature", "cooling_lo", "cooling_hi", "default_cooling"});
    if (h.has("initial_temperature")) rf.hlmsa.initial_temperature = h.number("initial_temperature");
    if (h.has("cooling_lo")) rf.hlmsa.cooling_lo = h.number("cooling_lo");
    if (h.has("cooling_hi")) rf.hlmsa.cooling_hi = h.number("cooling_hi");
    if (h.has("default_cooling")) rf.hlmsa.default_cooling = h.number("default_cooling");
    try {
      rf.hlmsa.validate();
    } catch (const ContractViolation& e) {
      root.fail("hlmsa", std::string("is invalid: ") + e.what());
    }
  }

  if (root.has("callbacks")) {
    const auto c = root.child("callbacks", {"early_stopping", "target_stop", "adaptive_sampling"});
    if (c.has("early_stopping")) {
      const auto e = c.child("early_stopping", {"patience", "min_delta"});
      if (!e.has("patience")) c.fail("early_stopping", "needs 'patience'");
      const double min_delta = e.has("min_delta") ? e.number("min_delta") : 0.0;
      if (min_delta < 0.0) e.fail("min_delta", "must be >= 0");
      rf.callbacks.early_stopping = std::pair{e.positive("patience"), min_delta};
    }
    if (c.has("target_stop")) {
      const auto t = c.child("target_stop", {"target"});
      if (!t.has("target")) c.fail("target_stop", "needs 'target'");
      rf.callbacks.target = t.number("target");
    }
    if (c.has("adaptive_sampling")) {
      const auto a = c.child("adaptive_sampling", {"window", "bump", "ceiling"});
      if (!a.has("window") || !a.has("bump")) c.fail("adaptive_sampling", "needs 'window' and 'bump'");
      CallbackBlock::Adaptive ad{a.positive("window"), a.number("bump"), a.has("ceiling") ? a.number("ceiling") : 2.0};
      if (!(ad.bump > 0.0)) a.fail("bump", "must be > 0");
      if (ad.ceiling < 0.0 || ad.ceiling > 2.0) a.fail("ceiling", "must lie in [0, 2]");
      rf.callbacks.adaptive_sampling = ad;
    }
  }

  if (root.has("output")) {
    const auto o = root.child("output", {"dir", "record_wall_time"});
    if (o.has("dir")) rf.output_dir = resolve(base_dir, o.string("dir"));
    if (o.has("record_wall_time")) rf.record_wall_time = o.boolean("record_wall_time");
  }
  return rf;
}

RunFile parse_run_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_run_file_text(buf.str(), path.string(), base);
}

}  // namespace llmize::cli
