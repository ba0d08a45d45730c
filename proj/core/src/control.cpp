#include "llmize/control.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace llmize {

namespace {

// Signed improvement of `now` over `before` under `direction`.
double improvement(double before, double now, Direction direction) {
  return direction == Direction::Minimize ? before - now : now - before;
}

}  // namespace

Callback early_stopping(std::size_t patience, double min_delta) {
  if (patience == 0) throw ContractViolation("early_stopping: patience must be >= 1");
  if (!(min_delta >= 0.0)) throw ContractViolation("early_stopping: min_delta must be >= 0");
  return [patience, min_delta, previous = std::optional<double>{}, stale = std::size_t{0}](
             const StepContext& ctx) mutable -> CallbackAction {
    const double best = ctx.stats.best_so_far;
    if (previous) {
      if (improvement(*previous, best, ctx.direction) > min_delta) {
        stale = 0;
      } else {
        ++stale;
      }
    }
    previous = best;
    if (stale >= patience) return Stop{StopReason::EarlyStopped};
    return Continue{};
  };
}

Callback target_stop(double target) {
  if (!std::isfinite(target)) throw ContractViolation("target_stop: target must be finite");
  return [target](const StepContext& ctx) -> CallbackAction {
    const double best = ctx.stats.best_so_far;
    const bool reached = ctx.direction == Direction::Minimize ? best <= target : best >= target;
    if (reached) return Stop{StopReason::TargetReached};
    return Continue{};
  };
}

Callback adaptive_sampling(std::size_t stagnation_window, double bump, double ceiling) {
  if (stagnation_window == 0) throw ContractViolation("adaptive_sampling: window must be >= 1");
  if (!(bump > 0.0)) throw ContractViolation("adaptive_sampling: bump must be > 0");
  if (!(ceiling >= 0.0 && ceiling <= 2.0)) throw ContractViolation("adaptive_sampling: ceiling must lie in [0, 2]");
  return [stagnation_window, bump, ceiling, previous = std::optional<double>{}, flat = std::size_t{0}](
             const StepContext& ctx) mutable -> CallbackAction {
    const double best = ctx.stats.best_so_far;
    if (previous) {
      if (improvement(*previous, best, ctx.direction) > 0.0) {
        flat = 0;
      } else {
        ++flat;
      }
    }
    previous = best;
    if (flat >= stagnation_window) {
      flat = 0;
      return SetSamplingTemperature{std::min(ctx.sampling.model_temperature + bump, ceiling)};
    }
    return Continue{};
  };
}

CallbackAction resolve_actions(std::span<const CallbackAction> actions) {
  std::optional<Stop> stop;
  std::optional<SetSamplingTemperature> set;
  for (const auto& action : actions) {
    if (const auto* s = std::get_if<Stop>(&action)) {
      if (!stop || s->reason == StopReason::TargetReached) stop = *s;
    } else if (const auto* t = std::get_if<SetSamplingTemperature>(&action)) {
      set = *t;
    }
  }
  if (stop) return *stop;
  if (set) return *set;
  return Continue{};
}

}  // namespace llmize
