#include "llmize/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "llmize/history.hpp"

namespace llmize {

void RunConfig::validate() const {
  if (max_steps == 0) throw ContractViolation("run config: max_steps must be >= 1");
  if (batch == 0) throw ContractViolation("run config: batch must be >= 1");
  if (history_capacity == 0) throw ContractViolation("run config: history_capacity must be >= 1");
  if (workers == 0) throw ContractViolation("run config: workers must be >= 1");
  sampling.validate();
  eval_policy().validate();
}

void SaSettings::validate() const {
  if (!(initial_temperature > 0.0) || !std::isfinite(initial_temperature)) {
    throw ContractViolation("annealing: initial temperature must be positive and finite");
  }
  if (!(cooling_lo > 0.0 && cooling_lo < cooling_hi && cooling_hi < 1.0)) {
    throw ContractViolation("annealing: cooling bounds must satisfy 0 < lo < hi < 1");
  }
  if (!(default_cooling >= cooling_lo && default_cooling <= cooling_hi)) {
    throw ContractViolation("annealing: default cooling must lie within the cooling bounds");
  }
}

bool accept_candidate(double current_score, double candidate_score, double sa_temperature, Direction direction,
                      Rng& rng) {
  if (!(sa_temperature > 0.0)) throw ContractViolation("accept_candidate: temperature must be > 0");
  compare_scores(current_score, candidate_score, direction);  // finiteness
  const double delta =
      direction == Direction::Minimize ? candidate_score - current_score : current_score - candidate_score;
  if (delta <= 0.0) return true;
  return rng.uniform() < std::exp(-delta / sa_temperature);
}

double cool(double sa_temperature, double alpha) {
  if (!(sa_temperature > 0.0)) throw ContractViolation("cool: temperature must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("cool: alpha must lie in (0, 1)");
  return alpha * sa_temperature;
}

std::vector<EvaluatedSolution> evaluate_seeds(const Objective& objective, std::span<const SolutionValue> seeds,
                                              const EvalPolicy& policy) {
  const auto scores = evaluate_batch(objective, seeds, policy);
  std::vector<EvaluatedSolution> out;
  out.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) out.emplace_back(seeds[i], scores[i]);
  return out;
}

namespace {

struct AbortRun {
  std::string message;
};

// One optimisation run: owns the history, the incumbent, and the result being
// assembled. Strategy loops drive it step by step.
class RunContext {
 public:
  RunContext(Strategy strategy, const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
             const RunConfig& config, std::vector<Callback> callbacks, std::span<const EvaluatedSolution> initial)
      : spec_(spec),
        objective_(objective),
        proposer_(proposer),
        config_(config),
        callbacks_(std::move(callbacks)),
        history_(config.history_capacity, spec.direction),
        sampling_(config.sampling),
        start_(std::chrono::steady_clock::now()) {
    spec.validate();
    config.validate();
    if (objective.direction != spec.direction) {
      throw ContractViolation("objective direction does not match problem direction");
    }
    if (initial.empty()) throw ContractViolation("a run needs at least one evaluated seed");
    result_.strategy = to_string(strategy);
    result_.direction = spec.direction;
    for (const auto& e : initial) {
      best_ = update_best(best_, e, spec.direction);
      history_.insert(e);
    }
    result_.best = *best_;
  }

  const History& history() const { return history_; }
  const SamplingParams& sampling() const { return sampling_; }
  Direction direction() const { return spec_.direction; }

  // Proposes and parses once, retrying a single time when the output has no
  // usable candidates (or fewer than `min_candidates`).
  ParsedProposal propose(const PromptBundle& bundle, std::size_t min_candidates) {
    std::string last_problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::string raw;
      try {
        ++result_.proposer_calls;
        raw = proposer_.propose(bundle, sampling_);
      } catch (const TransportError& e) {
        throw AbortRun{std::string("proposer transport failure: ") + e.what()};
      } catch (const ScriptExhausted& e) {
        throw AbortRun{e.what()};
      }
      try {
        auto parsed = parse_proposal(raw, spec_.schema, bundle.requested_tags);
        if (parsed.candidates.size() >= min_candidates) return parsed;
        last_problem = "proposal carried " + std::to_string(parsed.candidates.size()) + " valid candidates, " +
                       std::to_string(min_candidates) + " required";
      } catch (const ZeroCandidates& e) {
        last_problem = e.what();
      }
    }
    throw AbortRun{last_problem + " (after one retry)"};
  }

  std::vector<EvaluatedSolution> evaluate(std::vector<SolutionValue> candidates) {
    std::vector<double> scores;
    try {
      scores = evaluate_batch(objective_, candidates, config_.eval_policy());
    } catch (const EvaluationFailed& e) {
      throw AbortRun{e.what()};
    }
    result_.evaluations_used += candidates.size();
    std::vector<EvaluatedSolution> out;
    out.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out.emplace_back(std::move(candidates[i]), scores[i]);
      best_ = update_best(best_, out.back(), spec_.direction);
      history_.insert(out.back());
    }
    result_.best = *best_;
    return out;
  }

  StepStats make_stats(std::size_t step, std::span<const EvaluatedSolution> evaluated,
                       const ParsedProposal& parsed) const {
    StepStats s;
    s.step_index = step;
    double best = evaluated.front().score;
    double sum = 0.0;
    for (const auto& e : evaluated) {
      if (is_better(e.score, best, spec_.direction)) best = e.score;
      sum += e.score;
    }
    s.best_of_step = best;
    s.mean_of_step = sum / static_cast<double>(evaluated.size());
    s.best_so_far = best_->score;
    s.sampling_temperature = sampling_.model_temperature;
    s.parsed_tags = parsed.hyperparams;
    s.rejected_blocks = parsed.rejected_blocks;
    return s;
  }

  // Records the step and runs callbacks. Returns false when the run must stop.
  bool finish_step(StepStats stats) {
    result_.steps.push_back(std::move(stats));
    const StepContext ctx{result_.steps.back(), spec_.direction, sampling_};
    std::vector<CallbackAction> actions;
    actions.reserve(callbacks_.size());
    for (auto& cb : callbacks_) actions.push_back(cb(ctx));
    const auto action = resolve_actions(actions);
    if (const auto* stop = std::get_if<Stop>(&action)) {
      result_.termination.kind = stop->reason == StopReason::TargetReached ? TerminationKind::TargetReached
                                                                             : TerminationKind::EarlyStopped;
      return false;
    }
    if (const auto* set = std::get_if<SetSamplingTemperature>(&action)) {
      sampling_.model_temperature = std::clamp(set->value, 0.0, 2.0);
    }
    return true;
  }

  OptimizationResult finish(std::optional<std::string> abort_message = std::nullopt) {
    if (abort_message) result_.termination = Termination{TerminationKind::Aborted, *abort_message};
    result_.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_);
    return std::move(result_);
  }

  OptimizationResult& result() { return result_; }

 private:
  const ProblemSpec& spec_;
  const Objective& objective_;
  Proposer& proposer_;
  const RunConfig& config_;
  std::vector<Callback> callbacks_;
  History history_;
  SamplingParams sampling_;
  std::optional<EvaluatedSolution> best_;
  OptimizationResult result_;
  std::chrono::steady_clock::time_point start_;
};

// OPRO and HLMEA share this loop; they differ only in the prompt's strategy
// block and the tags requested from the model.
OptimizationResult run_history_loop(Strategy strategy, const ProblemSpec& spec, const Objective& objective,
                                    Proposer& proposer, const RunConfig& config, std::vector<Callback> callbacks,
                                    std::span<const EvaluatedSolution> initial) {
  RunContext run(strategy, spec, objective, proposer, config, std::move(callbacks), initial);
  try {
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
      const std::map<std::string, double> state{{"step", static_cast<double>(step)}};
      const auto bundle = build_prompt(spec, run.history(), strategy, state, config.batch);
      auto parsed = run.propose(bundle, 1);
      std::vector<SolutionValue> candidates(
          parsed.candidates.begin(),
          parsed.candidates.begin() + static_cast<std::ptrdiff_t>(std::min(config.batch, parsed.candidates.size())));
      const auto evaluated = run.evaluate(std::move(candidates));
      if (!run.finish_step(run.make_stats(step, evaluated, parsed))) break;
    }
  } catch (const AbortRun& abort) {
    return run.finish(abort.message);
  }
  return run.finish();
}

}  // namespace

OptimizationResult run_opro(const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
                            const RunConfig& config, std::vector<Callback> callbacks,
                            std::span<const EvaluatedSolution> initial) {
  return run_history_loop(Strategy::Opro, spec, objective, proposer, config, std::move(callbacks), initial);
}

OptimizationResult run_hlmea(const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
                             const RunConfig& config, std::vector<Callback> callbacks,
                             std::span<const EvaluatedSolution> initial) {
  return run_history_loop(Strategy::Hlmea, spec, objective, proposer, config, std::move(callbacks), initial);
}

OptimizationResult run_hlmsa(const ProblemSpec& spec, const Objective& objective, Proposer& proposer,
                             const RunConfig& config, std::vector<Callback> callbacks,
                             std::span<const EvaluatedSolution> initial, const SaSettings& sa) {
  sa.validate();
  RunContext run(Strategy::Hlmsa, spec, objective, proposer, config, std::move(callbacks), initial);

  SaState state;
  state.sa_temperature = sa.initial_temperature;
  state.cooling_bounds = {sa.cooling_lo, sa.cooling_hi};
  state.default_cooling = sa.default_cooling;
  for (std::size_t i = 0; i < config.batch; ++i) state.trajectories.push_back(initial[i % initial.size()]);

  // Normalisation constants are frozen from the seed set.
  const auto [lo_it, hi_it] = std::minmax_element(initial.begin(), initial.end(), [](const auto& a, const auto& b) {
    return a.score < b.score;
  });
  const double norm_min = lo_it->score;
  const double norm_range = hi_it->score > lo_it->score ? hi_it->score - lo_it->score : 1.0;
  run.result().run_info["sa_norm_min"] = norm_min;
  run.result().run_info["sa_norm_range"] = norm_range;
  run.result().run_info["sa_initial_temperature"] = sa.initial_temperature;
  const auto normalise = [&](double score) { return (score - norm_min) / norm_range; };

  Rng rng(config.rng_seed);
  try {
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
      const std::map<std::string, double> prompt_state{{"step", static_cast<double>(step)},
                                                       {"sa_temperature", state.sa_temperature}};
      const auto bundle =
          build_prompt(spec, run.history(), Strategy::Hlmsa, prompt_state, config.batch, state.trajectories);
      auto parsed = run.propose(bundle, config.batch);
      std::vector<SolutionValue> candidates(parsed.candidates.begin(),
                                            parsed.candidates.begin() + static_cast<std::ptrdiff_t>(config.batch));
      const auto evaluated = run.evaluate(std::move(candidates));

      for (std::size_t i = 0; i < config.batch; ++i) {
        if (accept_candidate(normalise(state.trajectories[i].score), normalise(evaluated[i].score),
                             state.sa_temperature, spec.direction, rng)) {
          state.trajectories[i] = evaluated[i];
        }
      }

      std::optional<double> tag;
      if (auto it = parsed.hyperparams.find("cooling_rate"); it != parsed.hyperparams.end()) tag = it->second;
      const double alpha = clamp_tag(tag, state.cooling_bounds.first, state.cooling_bounds.second,
                                     state.default_cooling);

      auto stats = run.make_stats(step, evaluated, parsed);
      stats.sa_temperature = state.sa_temperature;
      stats.cooling_rate = alpha;
      state.sa_temperature = cool(state.sa_temperature, alpha);
      if (!run.finish_step(std::move(stats))) break;
    }
  } catch (const AbortRun& abort) {
    return run.finish(abort.message);
  }
  return run.finish();
}

OptimizationResult run_strategy(Strategy strategy, const ProblemSpec& spec, const Objective& objective,
                                Proposer& proposer, const RunConfig& config, std::vector<Callback> callbacks,
                                std::span<const EvaluatedSolution> initial, const SaSettings& sa) {
  switch (strategy) {
    case Strategy::Opro: return run_opro(spec, objective, proposer, config, std::move(callbacks), initial);
    case Strategy::Hlmea: return run_hlmea(spec, objective, proposer, config, std::move(callbacks), initial);
    case Strategy::Hlmsa: return run_hlmsa(spec, objective, proposer, config, std::move(callbacks), initial, sa);
  }
  throw ContractViolation("unknown strategy");
}

}  // namespace llmize
