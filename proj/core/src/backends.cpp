#include <cmath>
#include <cstdlib>
#include <cstring>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "llmize/proposer.hpp"

namespace llmize {

// ---------------------------------------------------------------------------
// Scripted

ScriptedProposer::ScriptedProposer(std::vector<std::string> responses)
    : queue_(std::make_move_iterator(responses.begin()), std::make_move_iterator(responses.end())) {}

std::string ScriptedProposer::propose(const PromptBundle&, const SamplingParams&) {
  std::lock_guard lock(mutex_);
  if (queue_.empty()) throw ScriptExhausted();
  std::string next = std::move(queue_.front());
  queue_.pop_front();
  return next;
}

std::size_t ScriptedProposer::remaining() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

// ---------------------------------------------------------------------------
// Perturb

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename T>
std::uint64_t hash_bytes(const T& value, std::uint64_t h) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  return fnv1a(std::string_view(bytes, sizeof(T)), h);
}

struct RenderedEntry {
  SolutionValue value;
  double score;
};

std::optional<RenderedEntry> read_entry(std::string_view rest, const SolutionSchema& schema) {
  const auto sep = rest.rfind(kScoreSeparator);
  if (sep == std::string_view::npos) return std::nullopt;
  auto value = parse_solution_text(rest.substr(0, sep), schema);
  if (!value) return std::nullopt;
  const std::string score_text(rest.substr(sep + kScoreSeparator.size()));
  char* end = nullptr;
  const double score = std::strtod(score_text.c_str(), &end);
  return RenderedEntry{std::move(*value), score};
}

}  // namespace

PerturbProposer::PerturbProposer(SolutionSchema schema, PerturbConfig config)
    : schema_(std::move(schema)), config_(std::move(config)) {
  validate_schema(schema_);
  if (!(config_.step_scale > 0.0)) throw ContractViolation("perturb step_scale must be > 0");
}

SolutionValue PerturbProposer::sample(Rng& rng) const {
  if (const auto* rv = std::get_if<RealVectorSchema>(&schema_)) {
    RealVector out;
    for (const auto& b : rv->bounds) out.values.push_back(rng.uniform(b.lower, b.upper));
    return out;
  }
  if (const auto* ps = std::get_if<PermutationSchema>(&schema_)) {
    Permutation out;
    for (std::size_t i = 0; i < ps->n; ++i) out.order.push_back(static_cast<int>(i));
    rng.shuffle(std::span<int>(out.order));
    return out;
  }
  const auto& ks = std::get<KeyedScalarsSchema>(schema_);
  KeyedScalars out;
  for (std::size_t i = 0; i < ks.keys.size(); ++i) {
    out.pairs.emplace_back(ks.keys[i], rng.uniform(ks.bounds[i].lower, ks.bounds[i].upper));
  }
  return out;
}

SolutionValue PerturbProposer::perturb(const SolutionValue& base, Rng& rng) const {
  const double scale = config_.step_scale;
  if (const auto* rv = std::get_if<RealVector>(&base)) {
    const auto& bounds = std::get<RealVectorSchema>(schema_).bounds;
    RealVector out = *rv;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      const double range = bounds[i].upper - bounds[i].lower;
      out.values[i] += rng.uniform(-1.0, 1.0) * scale * range;
    }
    return out;
  }
  if (const auto* p = std::get_if<Permutation>(&base)) {
    Permutation out = *p;
    const std::size_t n = out.order.size();
    const std::uint64_t swaps = 1 + rng.below(2);
    for (std::uint64_t s = 0; s < swaps; ++s) {
      const auto i = rng.below(n);
      auto j = rng.below(n - 1);
      if (j >= i) ++j;
      std::swap(out.order[i], out.order[j]);
    }
    return out;
  }
  const auto& bounds = std::get<KeyedScalarsSchema>(schema_).bounds;
  KeyedScalars out = std::get<KeyedScalars>(base);
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    auto& v = out.pairs[i].second;
    const double u = rng.uniform(-1.0, 1.0) * scale;
    if (v == 0.0) {
      v = u * (bounds[i].upper - bounds[i].lower);  // multiplicative jitter cannot move zero
    } else {
      v *= 1.0 + u;
    }
  }
  return out;
}

std::string PerturbProposer::propose(const PromptBundle& bundle, const SamplingParams& params) {
  std::uint64_t h = fnv1a(bundle.system_text);
  h = fnv1a("\x1f", h);
  h = fnv1a(bundle.user_text, h);
  h = hash_bytes(bundle.batch, h);
  h = hash_bytes(params.model_temperature, h);
  h = hash_bytes(params.max_output_tokens, h);
  Rng rng(splitmix64(h ^ splitmix64(config_.seed)));

  std::vector<RenderedEntry> history;
  std::vector<RenderedEntry> trajectories;
  std::istringstream lines(bundle.user_text);
  for (std::string line; std::getline(lines, line);) {
    std::string_view view(line);
    if (view.starts_with(kHistoryLinePrefix)) {
      if (auto e = read_entry(view.substr(kHistoryLinePrefix.size()), schema_)) history.push_back(std::move(*e));
    } else if (view.starts_with(kTrajectoryLinePrefix)) {
      const auto colon = view.find(": ");
      if (colon == std::string_view::npos) continue;
      if (auto e = read_entry(view.substr(colon + 2), schema_)) trajectories.push_back(std::move(*e));
    }
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < bundle.batch; ++i) {
    SolutionValue candidate;
    if (!trajectories.empty()) {
      candidate = perturb(trajectories[i % trajectories.size()].value, rng);
    } else if (!history.empty()) {
      candidate = perturb(history.back().value, rng);  // rendered worst-to-best
    } else {
      candidate = sample(rng);
    }
    out << "<solution>" << render_solution(candidate) << "</solution>\n";
  }
  for (const auto& tag : bundle.requested_tags) {
    const auto it = config_.tag_defaults.find(tag);
    const double value = it == config_.tag_defaults.end() ? 0.5 : it->second;
    out << "<" << tag << ">" << format_prompt_number(value) << "</" << tag << ">\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// HTTP chat completions

HttpChatProposer::HttpChatProposer(HttpChatConfig config) : config_(std::move(config)) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, url_re)) {
    throw ContractViolation("http backend: base_url must look like http(s)://host[:port][/path], got '" +
                            config_.base_url + "'");
  }
  scheme_host_port_ = m[1].str();
  std::string prefix = m[2].str();
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";

  if (config_.api_key) {
    token_ = *config_.api_key;
  } else if (const char* env = std::getenv(config_.api_key_env.c_str())) {
    token_ = env;
  }
  if (config_.max_retries < 0) throw ContractViolation("http backend: max_retries must be >= 0");
}

std::string HttpChatProposer::request_body(const PromptBundle& bundle, const SamplingParams& params) const {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({
      {{"role", "system"}, {"content", bundle.system_text}},
      {{"role", "user"}, {"content", bundle.user_text}},
  });
  body["temperature"] = params.model_temperature;
  body["max_tokens"] = params.max_output_tokens;
  return body.dump();
}

std::string HttpChatProposer::propose(const PromptBundle& bundle, const SamplingParams& params) {
  const std::string body = request_body(bundle, params);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  const auto ms = config_.timeout.count();
  const time_t sec = static_cast<time_t>(ms / 1000);
  const time_t usec = static_cast<time_t>((ms % 1000) * 1000);

  std::optional<TransportError> last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error.emplace(0, "POST " + scheme_host_port_ + path_ + " failed: " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error.emplace(res->status, "POST " + path_ + " returned HTTP " + std::to_string(res->status));
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError(res->status, "POST " + path_ + " returned HTTP " + std::to_string(res->status) + ": " +
                                            res->body.substr(0, 200));
    }
    const auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
      throw TransportError(res->status, "chat completion response has no choices");
    }
    const auto& message = doc["choices"][0].value("message", nlohmann::json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
      throw TransportError(res->status, "chat completion response has no message content");
    }
    return message["content"].get<std::string>();
  }
  throw *last_error;
}

}  // namespace llmize
