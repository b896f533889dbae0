#include <doctest.h>

#include <cmath>
#include <random>

#include "fairplan/allocation.hpp"
#include "fairplan/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace fairplan;

namespace {

SlotRow row(int interval, const std::string& line, const std::string& geometry, int required) {
  return SlotRow{interval, line, "o/" + geometry, geometry, "o", required, false};
}

// Workers w1..wn on the early shift, every factor set to `value`.
Instance flat_instance(int n_workers, double value = 0.5, bool medical = true) {
  Instance inst;
  inst.calendar = {fixtures::kMonday0600, 1};
  inst.lines = {"l1", "l2"};
  for (int w = 1; w <= n_workers; ++w) {
    Worker wk;
    wk.id = "w" + std::to_string(w);
    wk.shifts = {ShiftLabel::early};
    inst.workers.push_back(wk);
    inst.factors.set_resilience(wk.id, value);
    for (const std::string l : {"l1", "l2"})
      for (const std::string g : {"g1", "g2"})
        inst.factors.set_task(wk.id, l, g, {medical, value, value, std::nullopt});
  }
  return inst;
}

AllocationState demo_episode() {
  Instance inst = load_instance(fixtures::demo_orders(), fixtures::demo_static());
  const auto s = solve(inst, {1, 1});
  return make_episode(inst, s, reward_config(RewardKind::balanced));
}

}  // namespace

TEST_CASE("flatten and unflatten") {
  CHECK(flatten(1, 0, 18, 43) == 43);
  CHECK(unflatten(171, 18, 43) == std::pair{3, 42});
  CHECK(flatten(0, 0, 18, 43) == 0);
  for (int a = 0; a < 774; ++a) {
    const auto [r, w] = unflatten(a, 18, 43);
    CHECK(flatten(r, w, 18, 43) == a);
  }
  CHECK_THROWS_AS(flatten(18, 0, 18, 43), DomainError);
  CHECK_THROWS_AS(flatten(0, 43, 18, 43), DomainError);
  CHECK_THROWS_AS(unflatten(774, 18, 43), DomainError);
  CHECK_THROWS_AS(unflatten(-1, 18, 43), DomainError);
}

TEST_CASE("fairness score") {
  CHECK(fairness_score({{0.3, 0.7}, {0.5}, {0.4, 0.6}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(fairness_score({{0.0}, {1.0}}) - 0.0) < 1e-12);
  CHECK(std::abs(fairness_score({{0.5}, {0.5}, {0.8}}) - 0.92) < 1e-12);
  CHECK(fairness_score({{}, {0.2}, {0.2, 0.2}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fairness_score({{}, {}}), DomainError);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::vector<double>> p(1 + rng() % 6);
    for (auto& l : p)
      for (int k = rng() % 4; k > 0; --k) l.push_back(u(rng));
    p[0].push_back(u(rng));
    const double s = fairness_score(p);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == doctest::Approx(oracle::fairness(p)).epsilon(1e-12));
  }
}

TEST_CASE("demo episode shape and the worked actions") {
  AllocationState s = demo_episode();
  const EpisodeModel& m = s.model();
  CHECK(m.n_rows() == 18);
  CHECK(m.n_workers() == 43);
  CHECK(m.n_actions() == 774);
  CHECK(m.n_slots == 83);
  CHECK(s.active_interval() == 0);

  // Only rows of the first interval are open at the start.
  const auto mask = s.action_mask();
  for (int a = 0; a < 774; ++a)
    if (mask[a]) CHECK(m.rows[a / 43].interval == 0);
  CHECK(s.legal_actions() == oracle::legal_actions(s));

  const double r = s.apply(43);
  CHECK(s.sigma(1, 0));
  CHECK(m.workers[0] == "w01");
  CHECK(m.rows[1].slot.line_id == "l2");
  CHECK(r == doctest::Approx(2.46).epsilon(1e-12));
  for (int k = 0; k < 18; ++k)
    if (m.rows[k].interval == 0 && k != 1) CHECK_FALSE(s.is_legal(k * 43));

  // Fill the first interval with the lowest legal actions; step 16 is A = 171.
  while (s.decision_steps() < 15) s.apply(s.legal_actions().front());
  CHECK(s.active_interval() == 1);
  REQUIRE(s.is_legal(171));
  s.apply(171);
  CHECK(s.sigma(3, 42));
  CHECK(m.workers[42] == "w43");
}

TEST_CASE("reset edge cases") {
  SUBCASE("nobody medically cleared") {
    const Instance inst = flat_instance(3, 0.5, false);
    const auto s = reset({{1, 0, 60, {row(1, "l1", "g1", 2)}}}, inst, {});
    CHECK(s.terminal());
    CHECK(s.unfilled_slots() == 2);
    for (bool b : s.action_mask()) CHECK_FALSE(b);
  }
  SUBCASE("single row, three eligible workers") {
    const Instance inst = flat_instance(3);
    const auto s = reset({{1, 0, 60, {row(1, "l1", "g1", 2)}}}, inst, {});
    CHECK_FALSE(s.terminal());
    CHECK_FALSE(s.done(0));
    CHECK(s.legal_actions().size() == 3);
  }
  SUBCASE("rows requiring nobody start done") {
    const Instance inst = flat_instance(2);
    const auto s = reset({{1, 0, 60, {row(1, "l1", "g1", 0), row(1, "l2", "g1", 1)}}}, inst, {});
    CHECK(s.done(0));
    CHECK_FALSE(s.done(1));
  }
  SUBCASE("unavailable workers are not eligible") {
    Instance inst = flat_instance(2);
    inst.workers[1].shifts = {ShiftLabel::night};
    const auto s = reset({{1, 0, 60, {row(1, "l1", "g1", 2)}}}, inst, {});
    CHECK(s.legal_actions() == std::vector<int>{0});
    CHECK_FALSE(s.model().cell(0, 1).alpha);
  }
}

TEST_CASE("exclusivity and illegal actions") {
  const Instance inst = flat_instance(3);
  AllocationState s = reset({{1, 0, 60, {row(1, "l1", "g1", 1), row(1, "l2", "g1", 2)}}}, inst, {});
  s.apply(flatten(1, 0, 2, 3));
  CHECK_FALSE(s.is_legal(flatten(0, 0, 2, 3)));
  CHECK_FALSE(s.is_legal(flatten(1, 0, 2, 3)));
  const AllocationState before = s;
  CHECK_THROWS_AS(s.apply(flatten(0, 0, 2, 3)), IllegalActionError);
  CHECK_THROWS_AS(step(s, 99), IllegalActionError);
  CHECK(s.decision_steps() == before.decision_steps());
  CHECK(s.action_mask() == before.action_mask());
  CHECK(s.allocated(1) == 1);
}

TEST_CASE("continuation carries a worker forward") {
  const Instance inst = flat_instance(3);
  const std::vector<TimeInterval> iv = {
      {1, 0, 60, {row(1, "l1", "g1", 1), row(1, "l2", "g1", 1)}},
      {2, 60, 120, {row(2, "l1", "g2", 1), row(2, "l2", "g1", 1)}},
      {3, 120, 180, {row(3, "l2", "g1", 1)}},
  };
  SUBCASE("line and geometry") {
    AllocationState s = reset(iv, inst, {1, 1, 1, 0});
    const double r = s.apply(flatten(1, 2, 5, 3));  // w3 on l2 in the first interval
    CHECK(s.sigma(3, 2));
    CHECK(s.sigma(4, 2));
    CHECK(s.done(3));
    CHECK(s.done(4));
    CHECK(s.continuation_assignments() == 2);
    CHECK(s.trace().back().continuations == 2);
    CHECK(r == doctest::Approx(4.5));  // three assignments at 1.5 each
    // Line l1 switches geometry: no carry.
    s.apply(flatten(0, 0, 5, 3));
    CHECK_FALSE(s.sigma(2, 0));
    CHECK(s.active_interval() == 1);
  }
  SUBCASE("line only") {
    EnvOptions opt;
    opt.continuity = Continuity::line_only;
    AllocationState s = reset(iv, inst, {1, 1, 1, 0}, opt);
    s.apply(flatten(0, 0, 5, 3));
    CHECK(s.sigma(2, 0));
  }
  SUBCASE("gaps stop the cascade") {
    std::vector<TimeInterval> gap = iv;
    gap[2].start = 130;
    gap[2].end = 190;
    AllocationState s = reset(gap, inst, {1, 1, 1, 0});
    s.apply(flatten(1, 2, 5, 3));
    CHECK(s.sigma(3, 2));
    CHECK_FALSE(s.sigma(4, 2));
  }
}

TEST_CASE("reward arithmetic") {
  const Instance inst = flat_instance(2, 0.5);
  const std::vector<TimeInterval> iv = {{1, 0, 60, {row(1, "l1", "g1", 1), row(1, "l2", "g2", 1)}}};
  AllocationState s = reset(iv, inst, {0, 0, 0, 2});
  CHECK(s.model().fair_star == 4.0);
  const auto o1 = step(s, 0);
  CHECK(o1.reward == 0.0);
  CHECK_FALSE(o1.terminal);
  CHECK(reward(s, 0, o1.next) == 0.0);
  const auto o2 = step(o1.next, 3);
  CHECK(o2.terminal);
  // Identical means: the fairness term is the full w_fair * N_slots.
  CHECK(o2.reward == doctest::Approx(4.0));
  CHECK(reward(o1.next, 3, o2.next) == doctest::Approx(4.0));
  CHECK(o2.next.total_return() == doctest::Approx(4.0));
  // step is pure.
  CHECK(s.decision_steps() == 0);
  CHECK_THROWS_AS(RewardConfig({-1, 0, 0, 0}).validate(), DomainError);
}

TEST_CASE("observation layout") {
  const Instance inst = flat_instance(2, 0.25);
  AllocationState s = reset({{1, 0, 60, {row(1, "l2", "g1", 2)}}}, inst, {});
  s.apply(1);
  const auto obs = s.observation();
  const int width = AllocationState::kRowHeader + 2 * AllocationState::kWorkerColumns;
  REQUIRE(obs.size() == static_cast<std::size_t>(width));
  CHECK(obs[0] == 1);   // interval
  CHECK(obs[1] == 0);   // start
  CHECK(obs[2] == 60);  // end
  CHECK(obs[3] == 1);   // line index
  CHECK(obs[4] == 2);   // required
  CHECK(obs[5] == 1);   // allocated
  CHECK(obs[6] == 0);   // done
  const double* w2 = &obs[AllocationState::kRowHeader + AllocationState::kWorkerColumns];
  CHECK(w2[0] == 1);
  CHECK(w2[1] == 1);
  CHECK(w2[2] == 0.25);
  CHECK(w2[5] == 1);
  CHECK(obs[AllocationState::kRowHeader + 5] == 0);
}

TEST_CASE("state invariants under random play") {
  std::mt19937_64 rng(21);
  for (int ep = 0; ep < 60; ++ep) {
    const auto t = fixtures::tiny_episode(rng, 10, 5, 4);
    if (t.intervals.empty()) continue;
    AllocationState s = reset(t.intervals, t.instance, {1, 1, 1, 1});
    const EpisodeModel& m = s.model();
    while (!s.terminal()) {
      const auto mask = s.action_mask();
      const auto legal = oracle::legal_actions(s);
      for (int a = 0; a < m.n_actions(); ++a)
        CHECK(mask[a] == std::binary_search(legal.begin(), legal.end(), a));
      // A masked-out action always raises.
      for (int a = 0; a < m.n_actions(); ++a)
        if (!mask[a]) {
          CHECK_THROWS_AS(step(s, a), IllegalActionError);
          break;
        }
      const int a = legal[rng() % legal.size()];
      const auto out = step(s, a);
      CHECK(out.reward == doctest::Approx(oracle::immediate_reward(s, out.next)).epsilon(1e-12));
      s = out.next;
      for (int r = 0; r < m.n_rows(); ++r) {
        int alloc = 0;
        bool open = false;
        for (int w = 0; w < m.n_workers(); ++w) {
          alloc += s.sigma(r, w);
          bool placed = false;
          const auto [lo, hi] = m.interval_rows[m.rows[r].interval];
          for (int k = lo; k < hi; ++k) placed = placed || s.sigma(k, w);
          open = open || (m.cell(r, w).alpha && m.cell(r, w).mu && !placed);
        }
        CHECK(alloc == s.allocated(r));
        // Done rows stay done; open rows that are not full are not done unless
        // an earlier interval already closed.
        if (alloc == m.rows[r].slot.required || !open) {
          if (m.rows[r].interval <= s.active_interval() || s.terminal()) CHECK(s.done(r));
        }
      }
      for (const auto& [lo, hi] : m.interval_rows)
        for (int w = 0; w < m.n_workers(); ++w) {
          int n = 0;
          for (int k = lo; k < hi; ++k) n += s.sigma(k, w);
          CHECK(n <= 1);
        }
    }
    for (bool b : s.action_mask()) CHECK_FALSE(b);
  }
}
