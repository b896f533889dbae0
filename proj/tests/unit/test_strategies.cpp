#include <doctest.h>

#include <random>

#include "fairplan/policy.hpp"
#include "fairplan/strategies.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace fairplan;

namespace {

double trace_return(const AllocationState& s) {
  double t = 0.0;
  for (const auto& e : s.trace()) t += e.reward;
  return t;
}

// One row, `values` gives each worker's preference; single decision.
AllocationState one_step(const std::vector<double>& values) {
  Instance inst;
  inst.calendar = {fixtures::kMonday0600, 1};
  inst.lines = {"l1"};
  for (std::size_t w = 0; w < values.size(); ++w) {
    Worker wk;
    wk.id = "w" + std::to_string(w);
    wk.shifts = {ShiftLabel::early};
    inst.workers.push_back(wk);
    inst.factors.set_task(wk.id, "l1", "g", {true, values[w], 0.0, 0.0});
    inst.factors.set_resilience(wk.id, 0.0);
  }
  return reset({{1, 0, 60, {SlotRow{1, "l1", "o/g", "g", "o", 1, false}}}}, inst, {1, 0, 0, 0});
}

}  // namespace

TEST_CASE("greedy picks the larger reward and breaks ties low") {
  CHECK(greedy_action(one_step({0.3, 0.7})) == 1);
  CHECK(greedy_action(one_step({0.5, 0.2, 0.5})) == 0);
  const auto r = greedy_solve(one_step({0.3, 0.7}));
  CHECK(r.final_state.sigma(0, 1));
  CHECK(r.total_return == doctest::Approx(0.7));
  CHECK(r.strategy == "greedy");
}

TEST_CASE("greedy matches the brute-force argmax at every step") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    const auto t = fixtures::tiny_episode(rng, 8, 4, 2);
    if (t.intervals.empty()) continue;
    AllocationState s = reset(t.intervals, t.instance, {1, 1, 1, 1});
    const auto result = greedy_solve(s);
    for (const auto& e : result.final_state.trace()) {
      CHECK(e.action == oracle::greedy_choice(s));
      s.apply(e.action);
    }
    CHECK(s.terminal());
    CHECK(result.total_return == doctest::Approx(trace_return(result.final_state)).epsilon(1e-12));
  }
}

TEST_CASE("every strategy stays legal and terminates") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto t = fixtures::tiny_episode(rng, 8, 4, 3);
    if (t.intervals.empty()) continue;
    const AllocationState s = reset(t.intervals, t.instance, {1, 1, 1, 1});
    for (const SolveResult& r :
         {greedy_solve(s), random_solve(s, i), mcts_solve(s, {8, std::sqrt(2.0), static_cast<std::uint64_t>(i)}),
          rl_solve(s, LinearPolicy{})}) {
      CHECK(r.final_state.terminal());
      AllocationState replay = s;
      for (const auto& e : r.final_state.trace()) {
        REQUIRE(replay.is_legal(e.action));
        replay.apply(e.action);
      }
      CHECK(replay.total_return() == doctest::Approx(r.total_return).epsilon(1e-12));
      CHECK(r.total_return == doctest::Approx(trace_return(r.final_state)).epsilon(1e-12));
      CHECK(r.decision_steps == static_cast<int>(r.final_state.trace().size()));
    }
  }
}

TEST_CASE("seeded strategies are reproducible") {
  std::mt19937_64 rng(4);
  const auto t = fixtures::tiny_episode(rng, 6, 4, 3);
  REQUIRE_FALSE(t.intervals.empty());
  const AllocationState s = reset(t.intervals, t.instance, {1, 1, 1, 1});
  auto actions = [](const SolveResult& r) {
    std::vector<int> a;
    for (const auto& e : r.final_state.trace()) a.push_back(e.action);
    return a;
  };
  CHECK(actions(random_solve(s, 5)) == actions(random_solve(s, 5)));
  CHECK(actions(mcts_solve(s, {16, 1.0, 5})) == actions(mcts_solve(s, {16, 1.0, 5})));
  CHECK_THROWS_AS(mcts_solve(s, {0, 1.0, 0}), DomainError);
}

TEST_CASE("single legal action per step leaves one episode") {
  const AllocationState s = one_step({0.4});
  CHECK(random_solve(s, 1).total_return == doctest::Approx(0.4));
  CHECK(random_solve(s, 2).total_return == doctest::Approx(0.4));
  CHECK(rl_solve(s, LinearPolicy{}).total_return == doctest::Approx(0.4));
  // One rollout on a one-step episode commits the sampled action.
  CHECK(mcts_solve(s, {1, 1.0, 0}).total_return == doctest::Approx(0.4));
}

TEST_CASE("MCTS beats random on small fixtures") {
  std::mt19937_64 rng(13);
  const auto t = fixtures::tiny_episode(rng, 6, 4, 3);
  REQUIRE_FALSE(t.intervals.empty());
  const AllocationState s = reset(t.intervals, t.instance, {1, 1, 1, 1});
  double random_mean = 0.0;
  for (int k = 0; k < 100; ++k) random_mean += random_solve(s, k).total_return / 100.0;
  CHECK(mcts_solve(s, {64, std::sqrt(2.0), 1}).total_return >= random_mean);
}
