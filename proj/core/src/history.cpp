#include "llmize/history.hpp"

#include <algorithm>

namespace llmize {

History::History(std::size_t capacity, Direction direction) : capacity_(capacity), direction_(direction) {
  if (capacity_ == 0) throw ContractViolation("history capacity must be >= 1");
}

bool History::ranks_worse(double score_a, std::uint64_t seq_a, double score_b, std::uint64_t seq_b) const {
  switch (compare_scores(score_a, score_b, direction_)) {
    case Ordering::Worse: return true;
    case Ordering::Better: return false;
    case Ordering::Equal: return seq_a > seq_b;  // later insertion loses ties
  }
  return false;
}

void History::insert(EvaluatedSolution entry) {
  compare_scores(entry.score, entry.score, direction_);  // finiteness check

  auto dup = std::find_if(entries_.begin(), entries_.end(),
                          [&](const EvaluatedSolution& e) { return e.solution == entry.solution; });
  if (dup != entries_.end()) {
    const auto idx = static_cast<std::size_t>(dup - entries_.begin());
    entries_.erase(dup);
    sequence_.erase(sequence_.begin() + static_cast<std::ptrdiff_t>(idx));
  }

  const std::uint64_t seq = next_sequence_++;
  if (entries_.size() == capacity_ && ranks_worse(entry.score, seq, entries_.front().score, sequence_.front())) {
    return;
  }

  // first position whose entry ranks better than the newcomer
  std::size_t pos = 0;
  while (pos < entries_.size() && ranks_worse(entries_[pos].score, sequence_[pos], entry.score, seq)) ++pos;
  entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(entry));
  sequence_.insert(sequence_.begin() + static_cast<std::ptrdiff_t>(pos), seq);

  if (entries_.size() > capacity_) {
    entries_.erase(entries_.begin());
    sequence_.erase(sequence_.begin());
  }
}

}  // namespace llmize
