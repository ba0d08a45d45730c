#include <algorithm>
#include <charconv>
#include <cmath>

#include "llmize/proposer.hpp"

namespace llmize {

namespace {

constexpr std::string_view kOpen = "<solution>";
constexpr std::string_view kClose = "</solution>";

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, std::string_view delims) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find_first_of(delims, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::optional<double> to_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> to_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view strip_brackets(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '[' && s.back() == ']') || (s.front() == '(' && s.back() == ')'))) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

}  // namespace

std::optional<SolutionValue> parse_solution_text(std::string_view text, const SolutionSchema& schema) {
  const auto body = strip_brackets(text);
  if (body.empty()) return std::nullopt;

  if (const auto* rv = std::get_if<RealVectorSchema>(&schema)) {
    const auto parts = split(body, ",");
    if (parts.size() != rv->dim()) return std::nullopt;
    RealVector out;
    for (auto p : parts) {
      auto v = to_real(p);
      if (!v) return std::nullopt;
      out.values.push_back(*v);
    }
    return out;
  }

  if (const auto* ps = std::get_if<PermutationSchema>(&schema)) {
    const auto parts = split(body, ",");
    Permutation out;
    for (auto p : parts) {
      auto v = to_int(p);
      if (!v) return std::nullopt;
      out.order.push_back(*v);
    }
    if (!is_bijection(out.order, ps->n)) return std::nullopt;
    return out;
  }

  const auto& ks = std::get<KeyedScalarsSchema>(schema);
  std::vector<std::optional<double>> found(ks.keys.size());
  for (auto part : split(body, ",;\n")) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    const auto key = trim(part.substr(0, eq));
    const auto it = std::find(ks.keys.begin(), ks.keys.end(), key);
    if (it == ks.keys.end()) return std::nullopt;
    auto& slot = found[static_cast<std::size_t>(it - ks.keys.begin())];
    if (slot) return std::nullopt;  // key given twice
    slot = to_real(part.substr(eq + 1));
    if (!slot) return std::nullopt;
  }
  KeyedScalars out;
  for (std::size_t i = 0; i < ks.keys.size(); ++i) {
    if (!found[i]) return std::nullopt;
    out.pairs.emplace_back(ks.keys[i], *found[i]);
  }
  return out;
}

ParsedProposal parse_proposal(std::string_view raw, const SolutionSchema& schema,
                              std::span<const std::string> expected_tags) {
  ParsedProposal out;

  // Every opening tag starts one block. A block is well formed only if its
  // closing tag arrives before the next opening tag.
  std::size_t pos = raw.find(kOpen);
  while (pos != std::string_view::npos) {
    const std::size_t start = pos + kOpen.size();
    const std::size_t next_open = raw.find(kOpen, start);
    const std::size_t close = raw.find(kClose, start);
    const bool closed = close != std::string_view::npos && (next_open == std::string_view::npos || close < next_open);
    if (closed) {
      if (auto v = parse_solution_text(raw.substr(start, close - start), schema)) {
        out.candidates.push_back(std::move(*v));
      } else {
        ++out.rejected_blocks;
      }
    } else {
      ++out.rejected_blocks;
    }
    pos = next_open;
  }

  for (const auto& tag : expected_tags) {
    const std::string open = "<" + tag + ">";
    const std::string close = "</" + tag + ">";
    for (auto p = raw.find(open); p != std::string_view::npos; p = raw.find(open, p + 1)) {
      const auto s = p + open.size();
      const auto e = raw.find(close, s);
      if (e == std::string_view::npos) break;
      if (auto v = to_real(raw.substr(s, e - s))) {
        out.hyperparams[tag] = *v;
        break;
      }
    }
  }

  if (out.candidates.empty()) throw ZeroCandidates(out.rejected_blocks);
  return out;
}

double clamp_tag(std::optional<double> value, double lo, double hi, double fallback) {
  if (!(lo < hi) || !(fallback >= lo && fallback <= hi)) {
    throw ContractViolation("clamp_tag: need lo < hi and fallback within [lo, hi]");
  }
  if (!value || !std::isfinite(*value)) return fallback;
  return std::clamp(*value, lo, hi);
}

}  // namespace llmize
