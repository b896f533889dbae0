#include <doctest.h>

#include <algorithm>

#include "fairplan/instance.hpp"
#include "support/fixtures.hpp"

using namespace fairplan;

namespace {

const char* kOrders = "order_id,geometry_id,quantity,due_date,priority\nA,g1,100,2023-09-11T08:00,1\n";

std::string static_doc(const std::string& line = "l1") {
  return R"({"reference":"2023-09-11T06:00","horizon_days":5,"lines":[{"id":"l1"}],
    "options":[{"geometry_id":"g1","line_id":")" +
         line + R"(","setup_minutes":20,"rate":1,"required_workers":2}],
    "workers":[{"id":"w1","shifts":["early","late"]}],
    "factors":[{"worker_id":"w1","line_id":"l1","geometry_id":"g1","mu":1,"pi":0.4,"xi":0.6}],
    "resilience":[{"worker_id":"w1","rho":0.5}]})";
}

}  // namespace

TEST_CASE("minimal documents load") {
  const Instance inst = load_instance(kOrders, static_doc());
  REQUIRE(inst.batches.size() == 1);
  const auto& b = inst.batches[0];
  CHECK(b.id == "A/g1");
  CHECK(b.priority);
  CHECK(b.due_date == 120);
  CHECK(b.options.at("l1").required_workers == 2);
  CHECK(duration(b, "l1") == 120);
  const auto f = inst.factors.lookup("w1", "l1", "g1");
  CHECK(f.medical);
  CHECK(f.preference == doctest::Approx(0.4));
  CHECK(f.resilience == doctest::Approx(0.5));
  CHECK(f.experience == doctest::Approx(0.6));
  CHECK_FALSE(inst.factors.lookup("w1", "l1", "g9").medical);
}

TEST_CASE("unknown line is reported by id") {
  try {
    load_instance(kOrders, static_doc("l9"));
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const auto& ids = e.offending_ids();
    CHECK(std::find(ids.begin(), ids.end(), "l9") != ids.end());
    CHECK(std::string(e.what()).find("l9") != std::string::npos);
  }
}

TEST_CASE("out-of-range factors and bad rows are rejected") {
  std::string doc = static_doc();
  doc.replace(doc.find("0.4"), 3, "1.4");
  CHECK_THROWS_AS(load_instance(kOrders, doc), ValidationError);
  CHECK_THROWS_AS(load_instance("order_id,geometry_id,quantity,due_date,priority\nA,g1,-3,2023-09-11T08:00,0\n",
                                static_doc()),
                  ValidationError);
  CHECK_THROWS_AS(load_instance("order_id,geometry_id,quantity\nA,g1,3\n", static_doc()), ValidationError);
  CHECK_THROWS_AS(load_instance("order_id,geometry_id,quantity,due_date,priority\nA,g7,3,2023-09-11T08:00,0\n",
                                static_doc()),
                  ValidationError);
  CHECK_THROWS_AS(load_instance(kOrders, "{not json"), ValidationError);
}

TEST_CASE("duration arithmetic") {
  GeometryBatch b;
  b.id = "b";
  b.quantity = 100;
  b.options["l1"] = {20, 1.0, 1};
  CHECK(duration(b, "l1") == 120);
  b.quantity = 1;
  b.options["l1"] = {0, 10.0, 1};
  CHECK(duration(b, "l1") == 1);
  b.quantity = 6500;
  b.options["l1"] = {0, 6500.0 / 296.0, 4};
  CHECK(duration(b, "l1") == 296);
  CHECK_THROWS_AS(duration(b, "l2"), DomainError);

  // Monotone in quantity and setup, antitone in rate.
  std::int64_t prev = 0;
  for (std::int64_t q = 1; q < 500; q += 7) {
    b.quantity = q;
    b.options["l1"] = {5, 3.3, 1};
    const auto d = duration(b, "l1");
    CHECK(d >= prev);
    prev = d;
    b.options["l1"] = {6, 3.3, 1};
    CHECK(duration(b, "l1") >= d);
    b.options["l1"] = {5, 4.1, 1};
    CHECK(duration(b, "l1") <= d);
  }
}

TEST_CASE("demo fixture and re-serialization") {
  const Instance inst = load_instance(fixtures::demo_orders(), fixtures::demo_static());
  CHECK(inst.workers.size() == 43);
  CHECK(inst.lines.size() == 3);
  CHECK(inst.batches.size() == 8);
  const Instance again = load_instance(to_orders_csv(inst), to_static_json(inst));
  CHECK(again == inst);
}

TEST_CASE("worker availability honours day overrides") {
  Worker w;
  w.shifts = {ShiftLabel::early};
  w.day_overrides[1] = {ShiftLabel::night};
  CHECK(w.available({0, 480, ShiftLabel::early, 0}));
  CHECK_FALSE(w.available({1440, 1920, ShiftLabel::early, 1}));
  CHECK(w.available({2400, 2880, ShiftLabel::night, 1}));
}

TEST_CASE("CSV parsing handles quotes") {
  const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][1] == "b,c");
  CHECK(rows[0][2] == "d\"e");
  CHECK(rows[1][2] == "3");
}
