#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "fairplan/instance.hpp"

namespace fairplan {

/// Z = makespan * C_max + tardiness * sum(tau_g).
struct ObjectiveWeights {
  double makespan = 1.0;
  double tardiness = 1.0;

  void validate() const;
};

struct SearchBudget {
  std::chrono::milliseconds time_limit{10'000};
  std::int64_t node_limit = 20'000'000;
};

enum class SolveStatus { proven_optimal, feasible };

struct BatchPlacement {
  std::string batch_id;
  std::string line_id;
  SolverMinute start = 0;
  SolverMinute end = 0;

  friend bool operator==(const BatchPlacement&, const BatchPlacement&) = default;
};

struct OrderLineSchedule {
  std::vector<BatchPlacement> placements;  // instance batch order
  SolverMinute makespan = 0;
  std::int64_t total_tardiness = 0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::feasible;
  std::int64_t nodes = 0;

  const BatchPlacement& placement(std::string_view batch_id) const;
};

/// Raised when the budget runs out before any incumbent exists.
class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact branch-and-bound over line choice and per-line sequence with
/// left-justified placement. Among equal-Z schedules the one with the
/// smallest sum of starts wins, then the lexicographically smallest
/// (start, line) vector in batch-id order.
OrderLineSchedule solve(const Instance& instance, const ObjectiveWeights& weights,
                        const SearchBudget& budget = {}, std::uint64_t seed = 0);

struct ObjectiveComponents {
  SolverMinute makespan = 0;
  std::int64_t total_tardiness = 0;
  double objective = 0.0;
};

/// Recomputed from the placements; stored schedule fields are ignored.
ObjectiveComponents objective_components(const OrderLineSchedule& schedule, const Instance& instance,
                                         const ObjectiveWeights& weights);

enum class ViolationRule {
  missing_batch,
  duplicate_batch,
  unknown_batch,
  inadmissible_line,   // exactly-one-admissible-line rule
  interval_length,     // start/end linkage: end - start == duration
  negative_start,
  overlap,             // same-line no-overlap rule
  priority,            // priority batches end before non-priority batches start
  objective_mismatch,
};

std::string_view to_string(ViolationRule rule);

struct Violation {
  ViolationRule rule;
  std::vector<std::string> batch_ids;
  std::string message;
};

struct VerifyReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

VerifyReport verify(const OrderLineSchedule& schedule, const Instance& instance,
                    const ObjectiveWeights& weights);

/// Left-justified schedule from an explicit line choice and per-line order
/// (priority barrier applied). Exposed for heuristics and tests.
OrderLineSchedule left_justify(const Instance& instance, const ObjectiveWeights& weights,
                               const std::vector<std::vector<std::string>>& sequence_per_line);

}  // namespace fairplan
