#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>

#include "llmize/proposer.hpp"
#include "llmize/types.hpp"

namespace llmize {

/// Read-only snapshot handed to callbacks after each step.
struct StepContext {
  const StepStats& stats;
  Direction direction;
  SamplingParams sampling;
};

enum class StopReason { TargetReached, EarlyStopped };

struct Continue {
  friend bool operator==(const Continue&, const Continue&) = default;
};
struct Stop {
  StopReason reason;
  friend bool operator==(const Stop&, const Stop&) = default;
};
struct SetSamplingTemperature {
  double value;
  friend bool operator==(const SetSamplingTemperature&, const SetSamplingTemperature&) = default;
};

using CallbackAction = std::variant<Continue, Stop, SetSamplingTemperature>;

/// Callbacks own their state and are invoked in registration order between
/// steps. They must not block on I/O.
using Callback = std::function<CallbackAction(const StepContext&)>;

/// Stops once best-so-far has failed to improve on the previous step's value
/// by more than `min_delta` for `patience` consecutive steps.
Callback early_stopping(std::size_t patience, double min_delta = 0.0);

/// Stops as soon as best-so-far reaches `target` (inclusive).
Callback target_stop(double target);

/// Raises the model sampling temperature by `bump` (capped at `ceiling`)
/// after `stagnation_window` consecutive steps without improvement.
Callback adaptive_sampling(std::size_t stagnation_window, double bump, double ceiling = 2.0);

/// Merges the actions of one step: any Stop wins (TargetReached over
/// EarlyStopped), else the last SetSamplingTemperature, else Continue.
CallbackAction resolve_actions(std::span<const CallbackAction> actions);

}  // namespace llmize
