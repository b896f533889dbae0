#include <doctest.h>

#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "fairplan/service.hpp"
#include "support/fixtures.hpp"

using namespace fairplan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fairplan-test-" + name + "-" + std::to_string(std::random_device{}()));
  fs::remove_all(dir);
  return dir;
}

ServiceConfig config(const fs::path& dir) {
  ServiceConfig cfg;
  cfg.store_dir = dir;
  cfg.static_json = fixtures::demo_static();
  cfg.policy_steps = 500;
  return cfg;
}

}  // namespace

TEST_CASE("content ids ignore volatile fields") {
  json a = {{"x", 1}, {"timing", {{"t", 5}}}, {"created_at", "now"}};
  json b = {{"x", 1}, {"timing", {{"t", 9}}}, {"id", "zzz"}};
  CHECK(content_id(a) == content_id(b));
  CHECK(content_id(a).size() == 16);
  CHECK(content_id(a) != content_id(json{{"x", 2}}));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("solution store") {
  const auto dir = fresh_dir("store");
  SolutionStore store(dir);
  CHECK(store.all().empty());
  const auto id = store.put({{"v", 1}});
  CHECK(store.get(id)->at("v") == 1);
  CHECK(store.get(id)->at("id") == id);
  CHECK(store.put({{"v", 1}}) == id);
  CHECK(store.all().size() == 1);
  CHECK_FALSE(store.get("missing"));
  CHECK_FALSE(store.get("../etc/passwd"));
  fs::remove_all(dir);
}

TEST_CASE("in-process requests") {
  const auto dir = fresh_dir("svc");
  PlannerService svc(config(dir));
  CHECK(svc.list_solutions().body["solutions"].empty());

  SolveRequest req;
  req.orders_csv = fixtures::demo_orders();
  const auto r = svc.solve(req);
  REQUIRE(r.status == 200);
  const std::string id = r.body["id"];
  const auto got = svc.get_solution(id);
  CHECK(got.status == 200);
  CHECK(got.body["id"] == id);
  CHECK(svc.get_solution(id).body == got.body);
  CHECK(svc.get_solution("nope").status == 404);
  CHECK(svc.list_solutions().body["solutions"].size() == 1);

  auto bad = svc.solve_json(R"({"orders_csv":"x","strategy":"sa"})");
  CHECK(bad.status == 400);
  CHECK(bad.body["field"] == "strategy");
  CHECK(svc.solve_json(R"({"orders_csv":"x","days_to_plan":20})").status == 400);
  CHECK(svc.solve_json("[1]").status == 400);
  CHECK(svc.solve_json("{").status == 400);

  // A failed solve persists nothing.
  const auto broken = svc.solve_json(R"({"orders_csv":"order_id,geometry_id,quantity,due_date,priority\nA,g77,1,2023-09-11T08:00,0\n"})");
  CHECK(broken.status == 400);
  CHECK(svc.list_solutions().body["solutions"].size() == 1);

  // Episode endpoints.
  auto ep = svc.create_episode(json{{"solution_id", id}}.dump());
  REQUIRE(ep.status == 201);
  const std::string eid = ep.body["id"];
  auto mask = svc.episode_mask(eid);
  CHECK(mask.body["mask"].size() == 774);
  auto st = svc.step_episode(eid, R"({"action":43})");
  CHECK(st.status == 200);
  CHECK(st.body["delta"]["worker"] == "w01");
  CHECK(svc.step_episode(eid, R"({"action":0})").status == 409);
  CHECK(svc.step_episode(eid, R"({"action":"x"})").status == 400);
  CHECK(svc.step_episode("ep999", R"({"action":0})").status == 404);
  CHECK(svc.create_episode(R"({"solution_id":"none"})").status == 404);
  CHECK(svc.create_episode("{}").status == 400);

  // Play to the end, then stepping is gone.
  for (;;) {
    const auto m = svc.episode_mask(eid).body;
    if (m["legal"].empty()) break;
    REQUIRE(svc.step_episode(eid, json{{"action", m["legal"][0]["action"]}}.dump()).status == 200);
  }
  CHECK(svc.get_episode(eid).body["state"]["terminal"] == true);
  CHECK(svc.step_episode(eid, R"({"action":0})").status == 410);

  fs::remove_all(dir);
}

TEST_CASE("unfillable slots answer 422 with a stored record") {
  const auto dir = fresh_dir("422");
  auto cfg = config(dir);
  json doc = json::parse(cfg.static_json);
  for (auto& w : doc["workers"]) w["shifts"] = json::array({"early"});
  cfg.static_json = doc.dump();
  PlannerService svc(cfg);
  SolveRequest req;
  req.orders_csv = fixtures::demo_orders();
  const auto r = svc.solve(req);
  CHECK(r.status == 422);
  CHECK(r.body["unfilled_slots"].get<int>() > 0);
  CHECK_FALSE(r.body["warnings"].empty());
  CHECK(svc.get_solution(r.body["id"]).status == 200);
  fs::remove_all(dir);
}

TEST_CASE("HTTP round trip") {
  const auto dir = fresh_dir("http");
  PlannerService svc(config(dir));
  const int port = svc.start_background();
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(120, 0);

  auto api = cli.Get("/openapi.json");
  REQUIRE(api);
  CHECK(api->status == 200);
  CHECK(json::parse(api->body)["openapi"] == "3.0.3");

  httplib::MultipartFormDataItems form = {
      {"orders", fixtures::demo_orders(), "orders.csv", "text/csv"},
      {"objective", "balanced", "", ""},
      {"reward", "balanced", "", ""},
      {"strategy", "greedy", "", ""},
      {"days_to_plan", "5", "", ""},
  };
  auto solved = cli.Post("/solve", form);
  REQUIRE(solved);
  REQUIRE(solved->status == 200);
  const std::string id = json::parse(solved->body)["id"];

  auto bad = cli.Post("/solve", json{{"orders_csv", fixtures::demo_orders()}, {"strategy", "sa"}}.dump(),
                      "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["field"] == "strategy");

  auto rec = cli.Get("/solutions/" + id);
  REQUIRE(rec);
  CHECK(rec->status == 200);
  CHECK(cli.Get("/solutions/none")->status == 404);
  CHECK(json::parse(cli.Get("/solutions")->body)["solutions"].size() == 1);

  auto ep = cli.Post("/episodes", json{{"solution_id", id}}.dump(), "application/json");
  REQUIRE(ep);
  CHECK(ep->status == 201);
  const std::string eid = json::parse(ep->body)["id"];
  const auto mask = json::parse(cli.Get("/episodes/" + eid + "/mask")->body);
  CHECK(mask["mask"].size() == 774);
  CHECK(mask["n_rows"] == 18);
  CHECK(mask["n_workers"] == 43);

  auto st = cli.Post("/episodes/" + eid + "/step", R"({"action":43})", "application/json");
  REQUIRE(st);
  CHECK(st->status == 200);
  const auto body = json::parse(st->body);
  CHECK(body["delta"]["worker"] == "w01");
  CHECK(body["state"]["rows"][1]["workers"][0] == "w01");

  const auto before = cli.Get("/episodes/" + eid)->body;
  auto illegal = cli.Post("/episodes/" + eid + "/step", R"({"action":0})", "application/json");
  CHECK(illegal->status == 409);
  CHECK(cli.Get("/episodes/" + eid)->body == before);
  CHECK(cli.Get("/episodes/ep404/mask")->status == 404);

  svc.stop();
  fs::remove_all(dir);
}

TEST_CASE("port from the environment") {
  ::setenv("FAIRPLAN_PORT", "9123", 1);
  CHECK(port_from_env() == 9123);
  ::setenv("FAIRPLAN_PORT", "http", 1);
  CHECK_THROWS_AS(port_from_env(), DomainError);
  ::unsetenv("FAIRPLAN_PORT");
  CHECK(port_from_env(7000) == 7000);
}
