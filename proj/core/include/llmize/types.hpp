#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace llmize {

/// Raised when a caller breaks a documented precondition (non-finite score,
/// inverted bounds, empty description, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Direction { Minimize, Maximize };

enum class Ordering { Better, Equal, Worse };

/// Orders `a` relative to `b` under `direction`. Throws ContractViolation on
/// NaN or infinite input.
Ordering compare_scores(double a, double b, Direction direction);

/// True iff `a` is strictly better than `b`.
inline bool is_better(double a, double b, Direction direction) {
  return compare_scores(a, b, direction) == Ordering::Better;
}

std::string to_string(Direction direction);
Direction direction_from_string(const std::string& text);

// ---------------------------------------------------------------------------
// Solution schemas

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct RealVectorSchema {
  std::vector<Bounds> bounds;  // one per dimension
  std::size_t dim() const { return bounds.size(); }
  friend bool operator==(const RealVectorSchema&, const RealVectorSchema&) = default;
};

struct PermutationSchema {
  std::size_t n = 0;
  friend bool operator==(const PermutationSchema&, const PermutationSchema&) = default;
};

struct KeyedScalarsSchema {
  std::vector<std::string> keys;
  std::vector<Bounds> bounds;  // aligned with keys
  friend bool operator==(const KeyedScalarsSchema&, const KeyedScalarsSchema&) = default;
};

using SolutionSchema = std::variant<RealVectorSchema, PermutationSchema, KeyedScalarsSchema>;

/// Throws ContractViolation unless the schema satisfies its invariants.
void validate_schema(const SolutionSchema& schema);

RealVectorSchema uniform_box(std::size_t dim, double lower, double upper);

// ---------------------------------------------------------------------------
// Solution values

struct RealVector {
  std::vector<double> values;
  friend bool operator==(const RealVector&, const RealVector&) = default;
};

struct Permutation {
  std::vector<int> order;
  friend bool operator==(const Permutation&, const Permutation&) = default;
};

struct KeyedScalars {
  std::vector<std::pair<std::string, double>> pairs;  // schema key order
  friend bool operator==(const KeyedScalars&, const KeyedScalars&) = default;
};

using SolutionValue = std::variant<RealVector, Permutation, KeyedScalars>;

bool is_bijection(const std::vector<int>& order, std::size_t n);

/// Shape check only: variant matches, lengths/keys agree, permutations are
/// bijections. Bounds are deliberately not checked.
bool conforms(const SolutionValue& value, const SolutionSchema& schema);

/// Renders numbers the way prompts show them: 6 significant digits, and a
/// trailing ".0" on integral values so reals stay distinguishable from ints.
std::string format_prompt_number(double value);

/// Compact text encoding used inside prompts and `<solution>` blocks.
/// Reals are written with 6 significant digits.
std::string render_solution(const SolutionValue& value);

// ---------------------------------------------------------------------------

struct ProblemSpec {
  std::string description;
  std::optional<std::string> domain_knowledge;
  Direction direction = Direction::Minimize;
  SolutionSchema schema;

  void validate() const;
};

struct EvaluatedSolution {
  SolutionValue solution;
  double score = 0.0;

  EvaluatedSolution() = default;
  /// Throws ContractViolation when `score` is not finite.
  EvaluatedSolution(SolutionValue solution, double score);
};

/// Returns `candidate` iff there is no incumbent or it is strictly better.
EvaluatedSolution update_best(const std::optional<EvaluatedSolution>& current_best,
                              const EvaluatedSolution& candidate, Direction direction);

struct StepStats {
  std::size_t step_index = 0;
  double best_of_step = 0.0;
  double mean_of_step = 0.0;
  double best_so_far = 0.0;
  double sampling_temperature = 0.0;
  std::optional<double> sa_temperature;
  std::optional<double> cooling_rate;
  // Logged alongside the series; never fed back into the algorithm.
  std::map<std::string, double> parsed_tags;
  std::size_t rejected_blocks = 0;
};

enum class TerminationKind { MaxSteps, TargetReached, EarlyStopped, Aborted };

struct Termination {
  TerminationKind kind = TerminationKind::MaxSteps;
  std::string message;  // only meaningful for Aborted

  friend bool operator==(const Termination&, const Termination&) = default;
};

std::string to_string(TerminationKind kind);
TerminationKind termination_from_string(const std::string& text);

struct OptimizationResult {
  std::string strategy;
  Direction direction = Direction::Minimize;
  EvaluatedSolution best;
  std::vector<StepStats> steps;
  Termination termination;
  std::size_t evaluations_used = 0;
  std::size_t proposer_calls = 0;
  std::chrono::nanoseconds wall_time{0};
  // Free-form run log (e.g. frozen HLMSA normalisation constants).
  std::map<std::string, double> run_info;
};

}  // namespace llmize
