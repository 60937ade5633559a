#pragma once

#include <stdexcept>
#include <string>

namespace reachsched {

/// Precondition or dimension violation at an API boundary.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A search (LP, accepting run, reference plan) has no solution.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what, int layer = -1)
      : std::runtime_error(what), layer_(layer) {}

  /// First time layer that could not be reached, or -1 when not applicable.
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// RRT iteration budget exhausted.
class PlanningFailure : public std::runtime_error {
 public:
  PlanningFailure(const std::string& what, std::size_t tree_size, double best_goal_gap)
      : std::runtime_error(what), tree_size_(tree_size), best_goal_gap_(best_goal_gap) {}

  std::size_t tree_size() const noexcept { return tree_size_; }
  double best_goal_gap() const noexcept { return best_goal_gap_; }

 private:
  std::size_t tree_size_;
  double best_goal_gap_;
};

/// Argument outside the registered domain of a function (e.g. class-K inverse).
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// An internal invariant that the theory guarantees was observed to fail.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed configuration or unreadable artifact.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reachsched
