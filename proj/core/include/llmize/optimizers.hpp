#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "llmize/control.hpp"
#include "llmize/evaluation.hpp"
#include "llmize/proposer.hpp"
#include "llmize/rng.hpp"
#include "llmize/types.hpp"

namespace llmize {

struct RunConfig {
  std::size_t max_steps = 10;
  std::size_t batch = 4;
  std::size_t history_capacity = 20;
  SamplingParams sampling;
  std::size_t workers = 1;
  std::uint64_t rng_seed = 0;
  ErrorPolicy on_error = AbortOnError{};
  std::optional<std::chrono::milliseconds> eval_timeout;

  void validate() const;
  EvalPolicy eval_policy() const { return EvalPolicy{workers, on_error, eval_timeout}; }
};

/// Annealing knobs for HLMSA. Scores are min-max normalised over the seed set
/// before the acceptance test, so the default temperature of 1.0 means "one
/// seed-range of worsening is accepted with probability 1/e".
struct SaSettings {
  double initial_temperature = 1.0;
  double cooling_lo = 0.5;
  double cooling_hi = 0.99;
  double default_cooling = 0.92;

  void validate() const;
};

struct SaState {
  std::vector<EvaluatedSolution> trajectories;
  double sa_temperature = 1.0;
  std::pair<double, double> cooling_bounds{0.5, 0.99};
  double default_cooling = 0.92;
};

/// Scores seed solutions so they can prime a run.
std::vector<EvaluatedSolution> evaluate_seeds(const Objective& objective, std::span<const SolutionValue> seeds,
                                              const EvalPolicy& policy);

OptimizationResult run_opro(const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
                            const RunConfig& config, std::vector<Callback> callbacks,
                            std::span<const EvaluatedSolution> initial);

OptimizationResult run_hlmea(const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
                             const RunConfig& config, std::vector<Callback> callbacks,
                             std::span<const EvaluatedSolution> initial);

OptimizationResult run_hlmsa(const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
                             const RunConfig& config, std::vector<Callback> callbacks,
                             std::span<const EvaluatedSolution> initial, const SaSettings& sa = {});

/// Dispatches on `strategy`; `sa` is ignored unless the strategy is HLMSA.
OptimizationResult run_strategy(Strategy strategy, const ProblemSpec& spec, const Objective& objective,
                                Proposer& proposer, const RunConfig& config, std::vector<Callback> callbacks,
                                std::span<const EvaluatedSolution> initial, const SaSettings& sa = {});

/// Metropolis test: improving or equal moves always pass; a worsening of
/// delta passes with probability exp(-delta / sa_temperature).
bool accept_candidate(double current_score, double candidate_score, double sa_temperature, Direction direction,
                      Rng& rng);

/// One geometric cooling step.
double cool(double sa_temperature, double alpha);

}  // namespace llmize
