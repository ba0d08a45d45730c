#include "llmize/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

namespace llmize {

void EvalPolicy::validate() const {
  if (workers == 0) throw ContractViolation("eval policy: workers must be >= 1");
  if (const auto* p = std::get_if<PenaltyScore>(&on_error); p && !std::isfinite(p->value)) {
    throw ContractViolation("eval policy: penalty score must be finite");
  }
  if (timeout && timeout->count() <= 0) throw ContractViolation("eval policy: timeout must be positive");
}

namespace {

struct Failure {
  std::size_t index;
  std::string message;
};

double checked(double value) {
  if (!std::isfinite(value)) throw std::runtime_error("objective returned a non-finite value");
  return value;
}

// Runs one evaluation on a detached thread so that a hung objective can be
// abandoned once the deadline passes.
double evaluate_with_deadline(const Objective& objective, const SolutionValue& candidate,
                              std::chrono::milliseconds timeout) {
  struct Shared {
    std::mutex mutex;
    std::condition_variable cv;
    bool done = false;
    double value = 0.0;
    std::exception_ptr error;
  };
  auto shared = std::make_shared<Shared>();
  std::thread([shared, fn = objective.evaluate, candidate] {
    double value = 0.0;
    std::exception_ptr error;
    try {
      value = fn(candidate);
    } catch (...) {
      error = std::current_exception();
    }
    std::lock_guard lock(shared->mutex);
    shared->value = value;
    shared->error = error;
    shared->done = true;
    shared->cv.notify_all();
  }).detach();

  std::unique_lock lock(shared->mutex);
  if (!shared->cv.wait_for(lock, timeout, [&] { return shared->done; })) {
    throw std::runtime_error("timed out after " + std::to_string(timeout.count()) + " ms");
  }
  if (shared->error) std::rethrow_exception(shared->error);
  return shared->value;
}

double evaluate_one(const Objective& objective, const SolutionValue& candidate, const EvalPolicy& policy) {
  if (policy.timeout) return checked(evaluate_with_deadline(objective, candidate, *policy.timeout));
  return checked(objective.evaluate(candidate));
}

std::string describe(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown exception";
  }
}

}  // namespace

std::vector<double> evaluate_batch(const Objective& objective, std::span<const SolutionValue> candidates,
                                   const EvalPolicy& policy) {
  policy.validate();
  if (candidates.empty()) throw ContractViolation("evaluate_batch: candidates must be non-empty");
  if (!objective.evaluate) throw ContractViolation("evaluate_batch: objective has no evaluate function");

  const bool abort_on_error = std::holds_alternative<AbortOnError>(policy.on_error);
  std::vector<double> scores(candidates.size(), 0.0);
  std::optional<Failure> failure;
  std::mutex failure_mutex;
  std::atomic<bool> cancelled{false};
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (!cancelled.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= candidates.size()) return;
      try {
        scores[i] = evaluate_one(objective, candidates[i], policy);
      } catch (...) {
        if (!abort_on_error) {
          scores[i] = std::get<PenaltyScore>(policy.on_error).value;
          continue;
        }
        std::lock_guard lock(failure_mutex);
        if (!failure || i < failure->index) failure = Failure{i, describe(std::current_exception())};
        cancelled.store(true);
      }
    }
  };

  const std::size_t threads = std::min(policy.workers, candidates.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (failure) throw EvaluationFailed(failure->index, failure->message);
  return scores;
}

}  // namespace llmize
