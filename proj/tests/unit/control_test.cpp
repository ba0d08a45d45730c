#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <optional>

#include "llmize/control.hpp"

namespace llmize {
namespace {

// Feeds a best-so-far series through one callback and returns the actions.
std::vector<CallbackAction> trace(Callback cb, const std::vector<double>& best, Direction d, double start_temp = 0.7) {
  std::vector<CallbackAction> out;
  SamplingParams sampling;
  sampling.model_temperature = start_temp;
  for (std::size_t i = 0; i < best.size(); ++i) {
    StepStats s;
    s.step_index = i + 1;
    s.best_so_far = best[i];
    s.sampling_temperature = sampling.model_temperature;
    out.push_back(cb(StepContext{s, d, sampling}));
    if (const auto* t = std::get_if<SetSamplingTemperature>(&out.back())) sampling.model_temperature = t->value;
  }
  return out;
}

// 1-based step of the first Stop, if any.
std::optional<std::size_t> first_stop(const std::vector<CallbackAction>& actions) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (std::holds_alternative<Stop>(actions[i])) return i + 1;
  }
  return std::nullopt;
}

TEST(EarlyStopping, ThreeStaleStepsStopAtStepFive) {
  const auto a = trace(early_stopping(3), {10, 9, 9, 9, 9}, Direction::Minimize);
  EXPECT_EQ(first_stop(a), 5U);
  EXPECT_EQ(std::get<Stop>(a[4]).reason, StopReason::EarlyStopped);
}

TEST(EarlyStopping, ContinualImprovementNeverStops) {
  std::vector<double> series(50);
  std::iota(series.rbegin(), series.rend(), 1.0);
  EXPECT_FALSE(first_stop(trace(early_stopping(3), series, Direction::Minimize)));
}

TEST(EarlyStopping, SubDeltaImprovementsCountAsStagnation) {
  EXPECT_EQ(first_stop(trace(early_stopping(3, 0.5), {10, 9.8, 9.6, 9.4}, Direction::Minimize)), 4U);
}

TEST(EarlyStopping, MaximizeMirrorsMinimize) {
  EXPECT_EQ(first_stop(trace(early_stopping(2), {1, 2, 2, 2}, Direction::Maximize)), 4U);
  EXPECT_FALSE(first_stop(trace(early_stopping(2), {1, 2, 3, 4}, Direction::Maximize)));
}

TEST(EarlyStopping, RejectsBadArguments) {
  EXPECT_THROW(early_stopping(0), ContractViolation);
  EXPECT_THROW(early_stopping(1, -0.1), ContractViolation);
}

TEST(TargetStop, SpecExamples) {
  EXPECT_EQ(first_stop(trace(target_stop(7.95), {8.2, 7.898}, Direction::Minimize)), 2U);
  EXPECT_FALSE(first_stop(trace(target_stop(41.0), {40.8}, Direction::Maximize)));
  EXPECT_EQ(first_stop(trace(target_stop(41.0), {41.0}, Direction::Maximize)), 1U);
  const auto a = trace(target_stop(7.95), {7.9}, Direction::Minimize);
  EXPECT_EQ(std::get<Stop>(a[0]).reason, StopReason::TargetReached);
  EXPECT_THROW(target_stop(std::nan("")), ContractViolation);
}

TEST(AdaptiveSampling, TwoFlatStepsBump) {
  const auto a = trace(adaptive_sampling(2, 0.3), {5, 5, 5}, Direction::Minimize, 0.7);
  EXPECT_TRUE(std::holds_alternative<Continue>(a[0]));
  EXPECT_TRUE(std::holds_alternative<Continue>(a[1]));
  ASSERT_TRUE(std::holds_alternative<SetSamplingTemperature>(a[2]));
  EXPECT_NEAR(std::get<SetSamplingTemperature>(a[2]).value, 1.0, 1e-12);
}

TEST(AdaptiveSampling, CeilingClamps) {
  const auto a = trace(adaptive_sampling(2, 0.3, 2.0), {5, 5, 5}, Direction::Minimize, 1.9);
  EXPECT_EQ(std::get<SetSamplingTemperature>(a[2]).value, 2.0);
}

TEST(AdaptiveSampling, ImprovementEveryStepNeverFires) {
  const auto a = trace(adaptive_sampling(1, 0.3), {9, 8, 7, 6, 5, 4}, Direction::Minimize);
  for (const auto& x : a) EXPECT_TRUE(std::holds_alternative<Continue>(x));
}

TEST(AdaptiveSampling, CounterResetsAfterFiring) {
  const auto a = trace(adaptive_sampling(2, 0.1), {5, 5, 5, 5, 5}, Direction::Minimize, 0.7);
  EXPECT_TRUE(std::holds_alternative<SetSamplingTemperature>(a[2]));
  EXPECT_TRUE(std::holds_alternative<Continue>(a[3]));
  ASSERT_TRUE(std::holds_alternative<SetSamplingTemperature>(a[4]));
  EXPECT_NEAR(std::get<SetSamplingTemperature>(a[4]).value, 0.9, 1e-12);
}

TEST(ResolveActions, SpecExamples) {
  const std::vector<CallbackAction> a{Continue{}, Stop{StopReason::EarlyStopped}, SetSamplingTemperature{1.2}};
  EXPECT_EQ(resolve_actions(a), CallbackAction{Stop{StopReason::EarlyStopped}});
  const std::vector<CallbackAction> b{Stop{StopReason::EarlyStopped}, Stop{StopReason::TargetReached}};
  EXPECT_EQ(resolve_actions(b), CallbackAction{Stop{StopReason::TargetReached}});
  const std::vector<CallbackAction> c{SetSamplingTemperature{0.9}, SetSamplingTemperature{1.1}};
  EXPECT_EQ(resolve_actions(c), CallbackAction{SetSamplingTemperature{1.1}});
  EXPECT_EQ(resolve_actions({}), CallbackAction{Continue{}});
}

TEST(ResolveActionsProperty, DominanceOverAllPermutations) {
  const std::vector<CallbackAction> pool{Continue{},
                                         Stop{StopReason::EarlyStopped},
                                         Stop{StopReason::TargetReached},
                                         SetSamplingTemperature{0.4},
                                         SetSamplingTemperature{1.3},
                                         SetSamplingTemperature{1.9}};
  std::size_t checked = 0;
  // Every multiset of 4 drawn from the pool, then every ordering of it.
  for (std::size_t a = 0; a < pool.size(); ++a) {
    for (std::size_t b = a; b < pool.size(); ++b) {
      for (std::size_t c = b; c < pool.size(); ++c) {
        for (std::size_t d = c; d < pool.size(); ++d) {
          std::vector<std::size_t> idx{a, b, c, d};
          do {
            std::vector<CallbackAction> actions;
            for (auto i : idx) actions.push_back(pool[i]);
            const auto got = resolve_actions(actions);
            const bool has_target = std::count(idx.begin(), idx.end(), 2U) > 0;
            const bool has_early = std::count(idx.begin(), idx.end(), 1U) > 0;
            std::optional<double> last_set;
            for (const auto& x : actions) {
              if (const auto* t = std::get_if<SetSamplingTemperature>(&x)) last_set = t->value;
            }
            if (has_target) {
              EXPECT_EQ(got, CallbackAction{Stop{StopReason::TargetReached}});
            } else if (has_early) {
              EXPECT_EQ(got, CallbackAction{Stop{StopReason::EarlyStopped}});
            } else if (last_set) {
              EXPECT_EQ(got, CallbackAction{SetSamplingTemperature{*last_set}});
            } else {
              EXPECT_EQ(got, CallbackAction{Continue{}});
            }
            ++checked;
          } while (std::next_permutation(idx.begin(), idx.end()));
        }
      }
    }
  }
  EXPECT_EQ(checked, 1296U);  // 6^4 ordered 4-tuples
}

}  // namespace
}  // namespace llmize
