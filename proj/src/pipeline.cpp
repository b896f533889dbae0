#include "fairplan/pipeline.hpp"

#include <chrono>
#include <map>
#include <mutex>

#include "fairplan/generator.hpp"

namespace fairplan {

std::string_view to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::makespan: return "makespan";
    case ObjectiveKind::tardiness: return "tardiness";
    case ObjectiveKind::balanced: return "balanced";
  }
  return "balanced";
}

std::string_view to_string(RewardKind k) {
  switch (k) {
    case RewardKind::preference: return "preference";
    case RewardKind::resilience: return "resilience";
    case RewardKind::experience: return "experience";
    case RewardKind::balanced: return "balanced";
  }
  return "balanced";
}

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::greedy: return "greedy";
    case StrategyKind::rl: return "rl";
    case StrategyKind::mcts: return "mcts";
  }
  return "greedy";
}

ObjectiveKind parse_objective(std::string_view t) {
  for (auto k : {ObjectiveKind::makespan, ObjectiveKind::tardiness, ObjectiveKind::balanced})
    if (to_string(k) == t) return k;
  throw DomainError("objective: unknown value '" + std::string(t) + "'");
}

RewardKind parse_reward(std::string_view t) {
  for (auto k : {RewardKind::preference, RewardKind::resilience, RewardKind::experience, RewardKind::balanced})
    if (to_string(k) == t) return k;
  throw DomainError("reward: unknown value '" + std::string(t) + "'");
}

StrategyKind parse_strategy(std::string_view t) {
  for (auto k : {StrategyKind::greedy, StrategyKind::rl, StrategyKind::mcts})
    if (to_string(k) == t) return k;
  throw DomainError("strategy: unknown value '" + std::string(t) + "'");
}

ObjectiveWeights objective_weights(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::makespan: return {1.0, 0.0};
    case ObjectiveKind::tardiness: return {0.0, 1.0};
    case ObjectiveKind::balanced: return {1.0, 1.0};
  }
  return {};
}

RewardConfig reward_config(RewardKind k) {
  switch (k) {
    case RewardKind::preference: return {1.0, 0.0, 0.0, 1.0};
    case RewardKind::resilience: return {0.0, 1.0, 0.0, 1.0};
    case RewardKind::experience: return {0.0, 0.0, 1.0, 1.0};
    case RewardKind::balanced: return {1.0, 1.0, 1.0, 1.0};
  }
  return {};
}

std::string Parametrization::label() const {
  return std::string(to_string(objective)) + "/" + std::string(to_string(reward)) + "/" +
         std::string(to_string(strategy));
}

std::vector<Parametrization> all_parametrizations() {
  std::vector<Parametrization> out;
  for (auto o : {ObjectiveKind::makespan, ObjectiveKind::tardiness, ObjectiveKind::balanced})
    for (auto r : {RewardKind::preference, RewardKind::resilience, RewardKind::experience, RewardKind::balanced})
      for (auto s : {StrategyKind::greedy, StrategyKind::rl, StrategyKind::mcts}) out.push_back({o, r, s});
  return out;
}

AllocationState generated_episode(std::uint64_t seed, const RewardConfig& reward) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.batches = {2, 4};
  cfg.lines = {1, 3};
  cfg.workers = {6, 12};
  cfg.quantity = {200, 3000};
  cfg.second_shift_probability = 0.3;
  Instance inst = generate(cfg);
  const auto schedule = solve(inst, {1.0, 1.0}, {std::chrono::milliseconds(2000), 200'000}, seed);
  return make_episode(inst, schedule, reward);
}

LinearPolicy default_policy(RewardKind reward, std::int64_t total_steps) {
  static std::mutex mu;
  static std::map<std::pair<RewardKind, std::int64_t>, LinearPolicy> cache;
  std::lock_guard lock(mu);
  const auto key = std::make_pair(reward, total_steps);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const RewardConfig cfg = reward_config(reward);
  TrainOptions opt;
  opt.total_steps = total_steps;
  opt.seed = 7;
  const auto trained = rl_train([&](std::uint64_t s) { return generated_episode(s, cfg); }, opt);
  cache.emplace(key, trained.policy);
  return trained.policy;
}

int covering_days(SolverMinute makespan) {
  return static_cast<int>((makespan + kMinutesPerDay - 1) / kMinutesPerDay);
}

AllocationState make_episode(Instance& instance, const OrderLineSchedule& schedule, const RewardConfig& reward,
                             const DecomposeOptions& decompose_options, const EnvOptions& env) {
  instance.calendar.horizon_days = std::max(instance.calendar.horizon_days, covering_days(schedule.makespan));
  const auto intervals = decompose(schedule, instance, shift_grid(instance.calendar), decompose_options);
  return reset(intervals, instance, reward, env);
}

SolveResult run_strategy(StrategyKind strategy, const AllocationState& episode, RewardKind reward,
                         const PipelineOptions& options) {
  switch (strategy) {
    case StrategyKind::greedy:
      return greedy_solve(episode);
    case StrategyKind::mcts: {
      MctsOptions m;
      m.rollouts_per_step = options.mcts_rollouts;
      m.seed = options.seed;
      return mcts_solve(episode, m);
    }
    case StrategyKind::rl: {
      const LinearPolicy policy = options.policy_provider ? options.policy_provider(reward) : default_policy(reward);
      return rl_solve(episode, policy);
    }
  }
  throw DomainError("unknown strategy");
}

PipelineResult run_pipeline(const Instance& instance, const Parametrization& p, const PipelineOptions& options) {
  using Clock = std::chrono::steady_clock;
  PipelineResult out;
  out.instance = instance;
  out.parametrization = p;
  if (options.days_to_plan) {
    if (*options.days_to_plan < 1 || *options.days_to_plan > 14) throw DomainError("days_to_plan must lie in [1, 14]");
    out.instance.calendar.horizon_days = *options.days_to_plan;
  }
  validate(out.instance);

  const auto t0 = Clock::now();
  out.schedule = solve(out.instance, objective_weights(p.objective), options.layer1, options.seed);
  out.layer1_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  const auto t1 = Clock::now();
  const AllocationState episode =
      make_episode(out.instance, out.schedule, reward_config(p.reward), options.decompose, options.env);
  out.intervals = episode.model().intervals;
  out.allocation = run_strategy(p.strategy, episode, p.reward, options);
  out.layer2_ms = std::chrono::duration<double, std::milli>(Clock::now() - t1).count();

  if (!out.allocation.final_state.assignments().empty()) out.kpis = kpis(out.allocation.final_state);
  out.timeboxes = export_timeboxes(out.schedule, out.allocation.final_state, out.instance, out.instance.calendar);
  return out;
}

}  // namespace fairplan
