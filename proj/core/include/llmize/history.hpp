#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "llmize/types.hpp"

namespace llmize {

/// Bounded top-K store of evaluated solutions.
///
/// Entries are kept ordered worst-to-best, the order in which they are
/// rendered into prompts. Ties between equal scores are resolved in favour of
/// the earlier insertion. Inserting a solution whose payload is already
/// present replaces the old entry (latest score wins) instead of adding a
/// second copy.
class History {
 public:
  History(std::size_t capacity, Direction direction);

  void insert(EvaluatedSolution entry);

  const std::vector<EvaluatedSolution>& entries() const { return entries_; }
  std::size_t capacity() const { return capacity_; }
  Direction direction() const { return direction_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Best retained entry; history must be non-empty.
  const EvaluatedSolution& best() const { return entries_.back(); }

 private:
  // true iff (score_a, seq_a) ranks worse than (score_b, seq_b)
  bool ranks_worse(double score_a, std::uint64_t seq_a, double score_b, std::uint64_t seq_b) const;

  std::size_t capacity_;
  Direction direction_;
  std::vector<EvaluatedSolution> entries_;
  std::vector<std::uint64_t> sequence_;  // insertion stamp per entry
  std::uint64_t next_sequence_ = 0;
};

}  // namespace llmize
