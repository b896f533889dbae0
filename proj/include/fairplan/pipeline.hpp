#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairplan/allocation.hpp"
#include "fairplan/decomposition.hpp"
#include "fairplan/kpi.hpp"
#include "fairplan/order_line.hpp"
#include "fairplan/policy.hpp"
#include "fairplan/strategies.hpp"

namespace fairplan {

enum class ObjectiveKind { makespan, tardiness, balanced };
enum class RewardKind { preference, resilience, experience, balanced };
enum class StrategyKind { greedy, rl, mcts };

std::string_view to_string(ObjectiveKind k);
std::string_view to_string(RewardKind k);
std::string_view to_string(StrategyKind k);
/// Each parser throws DomainError naming the offending value.
ObjectiveKind parse_objective(std::string_view text);
RewardKind parse_reward(std::string_view text);
StrategyKind parse_strategy(std::string_view text);

ObjectiveWeights objective_weights(ObjectiveKind k);
RewardConfig reward_config(RewardKind k);

struct Parametrization {
  ObjectiveKind objective = ObjectiveKind::balanced;
  RewardKind reward = RewardKind::balanced;
  StrategyKind strategy = StrategyKind::greedy;

  std::string label() const;  // "objective/reward/strategy"
  friend bool operator==(const Parametrization&, const Parametrization&) = default;
};

/// The 3 x 4 x 3 grid in objective-major order.
std::vector<Parametrization> all_parametrizations();

/// Deterministic policy for a reward parametrization: trained on generated
/// instances with a fixed seed.
LinearPolicy default_policy(RewardKind reward, std::int64_t total_steps = 6000);

struct PipelineOptions {
  SearchBudget layer1;
  int mcts_rollouts = 3;
  std::uint64_t seed = 0;
  std::optional<int> days_to_plan;
  DecomposeOptions decompose;
  EnvOptions env;
  /// Used for the rl strategy; falls back to default_policy when unset.
  std::function<LinearPolicy(RewardKind)> policy_provider;
};

struct PipelineResult {
  Instance instance;  // calendar horizon extended to cover the schedule
  Parametrization parametrization;
  OrderLineSchedule schedule;
  std::vector<TimeInterval> intervals;
  SolveResult allocation;
  std::optional<KpiSummary> kpis;  // empty when nothing could be assigned
  std::vector<Timebox> timeboxes;
  double layer1_ms = 0.0;
  double layer2_ms = 0.0;
};

/// Days needed to cover `makespan` solver minutes.
int covering_days(SolverMinute makespan);

/// Both layers end to end.
PipelineResult run_pipeline(const Instance& instance, const Parametrization& p, const PipelineOptions& options = {});

/// Layer-2 episode for a fixed schedule; extends the instance horizon if needed.
AllocationState make_episode(Instance& instance, const OrderLineSchedule& schedule, const RewardConfig& reward,
                             const DecomposeOptions& decompose = {}, const EnvOptions& env = {});

/// Runs one layer-2 strategy on an episode.
SolveResult run_strategy(StrategyKind strategy, const AllocationState& episode, RewardKind reward,
                         const PipelineOptions& options);

/// Small generated instance with its layer-1 schedule turned into an episode.
/// Used for training and for the statistical checks.
AllocationState generated_episode(std::uint64_t seed, const RewardConfig& reward);

}  // namespace fairplan
