#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "llmize/types.hpp"

namespace llmize {

/// A black-box objective. `evaluate` may throw; a non-finite return value is
/// treated as a failed evaluation.
struct Objective {
  std::function<double(const SolutionValue&)> evaluate;
  Direction direction = Direction::Minimize;
  std::string name;
  std::string description;  // prompt fragment
  bool stochastic = false;  // forfeits replay-exactness only
};

struct AbortOnError {};
struct PenaltyScore {
  double value = 0.0;
};
using ErrorPolicy = std::variant<AbortOnError, PenaltyScore>;

struct EvalPolicy {
  std::size_t workers = 1;
  ErrorPolicy on_error = AbortOnError{};
  std::optional<std::chrono::milliseconds> timeout;

  void validate() const;
};

class EvaluationFailed : public std::runtime_error {
 public:
  EvaluationFailed(std::size_t index, const std::string& message)
      : std::runtime_error("evaluation of candidate " + std::to_string(index) + " failed: " + message),
        index(index) {}
  std::size_t index;
};

/// Scores `candidates` with up to `policy.workers` concurrent evaluations.
/// Results are positionally aligned with the input. Under AbortOnError the
/// first failure (lowest index among those observed) cancels work that has not
/// started yet and is rethrown as EvaluationFailed. Timeouts count as failures;
/// a timed-out call is abandoned, not interrupted.
std::vector<double> evaluate_batch(const Objective& objective, std::span<const SolutionValue> candidates,
                                   const EvalPolicy& policy);

}  // namespace llmize
