#include <doctest.h>

#include <algorithm>
#include <map>

#include "fairplan/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace fairplan;

namespace {

Instance factory(double pi, double rho, double xi, int workers = 2) {
  Instance inst;
  inst.calendar = {fixtures::kMonday0600, 1};
  inst.lines = {"l1", "l2"};
  for (int w = 1; w <= workers; ++w) {
    Worker wk;
    wk.id = "w" + std::to_string(w);
    wk.shifts = {ShiftLabel::early};
    inst.workers.push_back(wk);
    inst.factors.set_resilience(wk.id, rho);
    for (const std::string l : {"l1", "l2"})
      for (const std::string g : {"g1", "g2"}) inst.factors.set_task(wk.id, l, g, {true, pi, xi, std::nullopt});
  }
  auto add = [&](const std::string& g, const std::string& line, std::int64_t qty, double rate, std::int64_t setup) {
    GeometryBatch b;
    b.id = "o1/" + g;
    b.geometry_id = g;
    b.order_id = "o1";
    b.quantity = qty;
    b.due_date = 1000;
    b.options[line] = {setup, rate, 1};
    inst.batches.push_back(b);
  };
  add("g1", "l1", 1480, 1480.0 / 120.0, 0);
  add("g2", "l2", 60, 1.0, 0);
  return inst;
}

struct Run {
  Instance inst;
  OrderLineSchedule schedule;
  AllocationState state;
};

Run greedy_run(Instance inst) {
  Run r{std::move(inst), {}, {}};
  r.schedule = solve(r.inst, {1, 1});
  r.state = greedy_solve(make_episode(r.inst, r.schedule, {1, 1, 1, 1})).final_state;
  return r;
}

}  // namespace

TEST_CASE("KPI means") {
  SUBCASE("constant factors") {
    const Run r = greedy_run(factory(0.5, 0.5, 0.5));
    const auto k = kpis(r.state);
    CHECK(k.mean_pi == doctest::Approx(0.5));
    CHECK(k.mean_rho == doctest::Approx(0.5));
    CHECK(k.mean_xi == doctest::Approx(0.5));
    CHECK(k.s_fair == doctest::Approx(1.0));
  }
  SUBCASE("single assignment") {
    Instance inst = factory(0.4, 0.5, 0.6, 1);
    inst.batches.pop_back();
    inst.batches[0].quantity = 10;
    inst.batches[0].options["l1"].rate = 1.0;
    const Run r = greedy_run(inst);
    const auto k = kpis(r.state);
    CHECK(k.assignments == 1);
    CHECK(k.mean_xi == doctest::Approx(0.6));
    CHECK(k.mean_pi == doctest::Approx(0.4));
    CHECK(k.mean_rho == doctest::Approx(0.5));
  }
  SUBCASE("nothing assigned") {
    Instance inst = factory(0.4, 0.5, 0.6, 1);
    inst.workers[0].shifts.clear();
    const Run r = greedy_run(inst);
    CHECK_THROWS_AS(kpis(r.state), DomainError);
  }
}

TEST_CASE("proportional split with exact totals") {
  const Run r = greedy_run(factory(0.5, 0.5, 0.5));
  const auto boxes = export_timeboxes(r.schedule, r.state, r.inst, r.inst.calendar);
  std::vector<Timebox> g1;
  for (const auto& b : boxes)
    if (b.geometry == "g1") g1.push_back(b);
  REQUIRE(g1.size() == 2);
  CHECK(g1[0].produced_amount == 740);
  CHECK(g1[0].produced_until_now == 740);
  CHECK(g1[1].produced_amount == 740);
  CHECK(g1[1].produced_until_now == 1480);
  CHECK(g1[1].total_amount == 1480);
  CHECK(g1[0].task == "o1 × g1");
  CHECK(g1[0].resource == "l1");
  CHECK(g1[0].start == fixtures::kMonday0600);
  CHECK(g1[0].finish == fixtures::kMonday0600 + 3600);
  CHECK(g1[0].workers.size() == 1);
  CHECK_FALSE(g1[0].warning);
  // g2 has no setup and sits in one interval.
  int g2 = 0;
  for (const auto& b : boxes)
    if (b.geometry == "g2") {
      ++g2;
      CHECK_FALSE(b.is_setup);
    }
  CHECK(g2 == 1);
}

TEST_CASE("setup boxes carry neither workers nor production") {
  Instance inst = factory(0.5, 0.5, 0.5, 3);
  inst.batches[0].options["l1"].setup_minutes = 30;
  // Push the batch across the 14:00 shift change so the setup straddles it.
  const Run r = greedy_run(inst);
  const auto boxes = export_timeboxes(r.schedule, r.state, r.inst, r.inst.calendar);
  int setups = 0;
  for (const auto& b : boxes)
    if (b.is_setup) {
      ++setups;
      CHECK(b.geometry == "g1");
      CHECK(b.produced_amount == 0);
      CHECK(b.workers.empty());
      CHECK(b.required_workers == 0);
      CHECK(b.finish - b.start == 30 * 60);
    }
  CHECK(setups == 1);

  OrderLineSchedule shifted = r.schedule;
  for (auto& p : shifted.placements) {
    p.start += 470;
    p.end += 470;
  }
  Instance copy = r.inst;
  const auto st = greedy_solve(make_episode(copy, shifted, {1, 1, 1, 1})).final_state;
  const auto later = export_timeboxes(shifted, st, copy, copy.calendar);
  bool warned = false;
  for (const auto& b : later)
    if (b.is_setup && b.warning) warned = b.warning->find("shift change") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("unfilled slots raise a warning") {
  Instance inst = factory(0.5, 0.5, 0.5, 1);
  inst.batches[0].options["l1"].required_workers = 3;
  const Run r = greedy_run(inst);
  const auto boxes = export_timeboxes(r.schedule, r.state, r.inst, r.inst.calendar);
  bool warned = false;
  for (const auto& b : boxes) warned = warned || (b.warning && b.warning->find("unfilled") != std::string::npos);
  CHECK(warned);
}

TEST_CASE("document shape and lossless KPI round trip") {
  const Run r = greedy_run(factory(0.3, 0.6, 0.9, 3));
  const auto boxes = export_timeboxes(r.schedule, r.state, r.inst, r.inst.calendar);
  const auto doc = to_json(boxes);
  for (const auto& j : doc) {
    CHECK(check_timebox_document(j).empty());
    for (const char* key : {"Start", "Finish", "Resource", "Task", "geometry", "order", "is_setup_timebox",
                            "produced_amount", "produced_until_now", "total_amount", "required_workers",
                            "warning", "workers"})
      CHECK(j.contains(key));
    CHECK(j.size() == 13);
    CHECK(j["is_setup_timebox"].is_number_integer());
    CHECK(j["Start"].is_number_integer());
  }
  nlohmann::json bad = doc[0];
  bad["is_setup_timebox"] = true;
  CHECK_FALSE(check_timebox_document(bad).empty());
  bad = doc[0];
  bad.erase("workers");
  CHECK_FALSE(check_timebox_document(bad).empty());
  bad = doc[0];
  bad["extra"] = 1;
  CHECK_FALSE(check_timebox_document(bad).empty());

  std::vector<Timebox> back;
  for (const auto& j : doc) back.push_back(timebox_from_json(j));
  const auto k1 = kpis(r.state);
  const auto k2 = kpis_from_timeboxes(back, r.inst);
  CHECK(k2.mean_pi == doctest::Approx(k1.mean_pi).epsilon(1e-12));
  CHECK(k2.mean_rho == doctest::Approx(k1.mean_rho).epsilon(1e-12));
  CHECK(k2.mean_xi == doctest::Approx(k1.mean_xi).epsilon(1e-12));
  CHECK(k2.s_fair == doctest::Approx(k1.s_fair).epsilon(1e-12));
  CHECK(k2.assignments == k1.assignments);
  CHECK(timebox_schema()["required"].size() == 13);
}

TEST_CASE("radar data") {
  std::vector<RadarInput> in;
  for (const char* s : {"greedy", "rl", "mcts"})
    for (const char* p : {"preference", "resilience", "experience", "balanced"}) {
      KpiSummary k;
      k.mean_pi = 0.5;
      k.mean_rho = 0.25;
      k.mean_xi = 0.75;
      in.push_back({s, p, k});
    }
  const auto rows = radar_data(in);
  CHECK(rows.size() == 12);
  CHECK(rows[0].xi == 0.75);
  CHECK(radar_data({in[0]}).size() == 1);
  const auto csv = radar_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  in[3].summary.mean_pi = 1.2;
  CHECK_THROWS_AS(radar_data(in), DomainError);
}

TEST_CASE("preference focus raises mean preference on the demo") {
  const Instance inst = load_instance(fixtures::demo_orders(), fixtures::demo_static());
  const auto pref = run_pipeline(inst, {ObjectiveKind::balanced, RewardKind::preference, StrategyKind::greedy});
  const auto bal = run_pipeline(inst, {ObjectiveKind::balanced, RewardKind::balanced, StrategyKind::greedy});
  REQUIRE(pref.kpis);
  REQUIRE(bal.kpis);
  CHECK(pref.kpis->mean_pi > bal.kpis->mean_pi);
}
