#include "llmize/types.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace llmize {

Ordering compare_scores(double a, double b, Direction direction) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw ContractViolation("compare_scores: scores must be finite");
  }
  if (a == b) return Ordering::Equal;
  const bool a_smaller = a < b;
  const bool better = direction == Direction::Minimize ? a_smaller : !a_smaller;
  return better ? Ordering::Better : Ordering::Worse;
}

std::string to_string(Direction direction) {
  return direction == Direction::Minimize ? "minimize" : "maximize";
}

Direction direction_from_string(const std::string& text) {
  if (text == "minimize") return Direction::Minimize;
  if (text == "maximize") return Direction::Maximize;
  throw ContractViolation("unknown direction '" + text + "' (expected minimize or maximize)");
}

void validate_schema(const SolutionSchema& schema) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RealVectorSchema>) {
          if (s.bounds.empty()) throw ContractViolation("real-vector schema needs dim >= 1");
          for (const auto& b : s.bounds) {
            if (!(b.lower <= b.upper)) throw ContractViolation("real-vector schema has lower > upper");
          }
        } else if constexpr (std::is_same_v<S, PermutationSchema>) {
          if (s.n < 2) throw ContractViolation("permutation schema needs n >= 2");
        } else {
          if (s.keys.empty()) throw ContractViolation("keyed-scalars schema needs at least one key");
          if (s.bounds.size() != s.keys.size()) {
            throw ContractViolation("keyed-scalars schema needs one bound per key");
          }
          std::set<std::string> seen;
          for (const auto& k : s.keys) {
            if (k.empty()) throw ContractViolation("keyed-scalars schema has an empty key");
            if (!seen.insert(k).second) throw ContractViolation("keyed-scalars schema repeats key '" + k + "'");
          }
          for (const auto& b : s.bounds) {
            if (!(b.lower <= b.upper)) throw ContractViolation("keyed-scalars schema has lower > upper");
          }
        }
      },
      schema);
}

RealVectorSchema uniform_box(std::size_t dim, double lower, double upper) {
  return RealVectorSchema{std::vector<Bounds>(dim, Bounds{lower, upper})};
}

bool is_bijection(const std::vector<int>& order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (int v : order) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

bool conforms(const SolutionValue& value, const SolutionSchema& schema) {
  if (const auto* rv = std::get_if<RealVector>(&value)) {
    const auto* s = std::get_if<RealVectorSchema>(&schema);
    if (!s || rv->values.size() != s->dim()) return false;
    for (double x : rv->values) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
  if (const auto* p = std::get_if<Permutation>(&value)) {
    const auto* s = std::get_if<PermutationSchema>(&schema);
    return s && is_bijection(p->order, s->n);
  }
  const auto& ks = std::get<KeyedScalars>(value);
  const auto* s = std::get_if<KeyedScalarsSchema>(&schema);
  if (!s || ks.pairs.size() != s->keys.size()) return false;
  for (std::size_t i = 0; i < ks.pairs.size(); ++i) {
    if (ks.pairs[i].first != s->keys[i] || !std::isfinite(ks.pairs[i].second)) return false;
  }
  return true;
}

std::string format_prompt_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  std::string out = buf;
  if (std::isfinite(value) && out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string render_solution(const SolutionValue& value) {
  std::string out;
  auto sep = [&out] {
    if (!out.empty()) out += ", ";
  };
  if (const auto* rv = std::get_if<RealVector>(&value)) {
    for (double x : rv->values) {
      sep();
      out += format_prompt_number(x);
    }
  } else if (const auto* p = std::get_if<Permutation>(&value)) {
    for (int v : p->order) {
      sep();
      out += std::to_string(v);
    }
  } else {
    for (const auto& [k, v] : std::get<KeyedScalars>(value).pairs) {
      sep();
      out += k + "=" + format_prompt_number(v);
    }
  }
  return out;
}

void ProblemSpec::validate() const {
  if (description.empty()) throw ContractViolation("problem description must be non-empty");
  validate_schema(schema);
}

EvaluatedSolution::EvaluatedSolution(SolutionValue s, double sc) : solution(std::move(s)), score(sc) {
  if (!std::isfinite(score)) throw ContractViolation("evaluated solution score must be finite");
}

EvaluatedSolution update_best(const std::optional<EvaluatedSolution>& current_best,
                              const EvaluatedSolution& candidate, Direction direction) {
  if (!current_best || is_better(candidate.score, current_best->score, direction)) return candidate;
  return *current_best;
}

std::string to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::MaxSteps: return "max_steps";
    case TerminationKind::TargetReached: return "target_reached";
    case TerminationKind::EarlyStopped: return "early_stopped";
    case TerminationKind::Aborted: return "aborted";
  }
  return "unknown";
}

TerminationKind termination_from_string(const std::string& text) {
  for (auto k : {TerminationKind::MaxSteps, TerminationKind::TargetReached, TerminationKind::EarlyStopped,
                 TerminationKind::Aborted}) {
    if (to_string(k) == text) return k;
  }
  throw ContractViolation("unknown termination '" + text + "'");
}

}  // namespace llmize
