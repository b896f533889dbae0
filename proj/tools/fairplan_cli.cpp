// Command-line front end: one subcommand per service endpoint plus
// training, instance generation and benchmarking.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "fairplan/generator.hpp"
#include "fairplan/pipeline.hpp"
#include "fairplan/service.hpp"

using namespace fairplan;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream os(out, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + out);
}

struct RunArgs {
  std::string orders;
  std::string static_doc;
  std::string objective = "balanced";
  std::string reward = "balanced";
  std::string strategy = "greedy";
  int days = 5;
  std::uint64_t seed = 0;
  int rollouts = 3;
  std::int64_t policy_steps = 6000;
  double time_limit_s = 10.0;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--orders", a.orders, "orders CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--static", a.static_doc, "static context JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--objective", a.objective)->check(CLI::IsMember({"makespan", "tardiness", "balanced"}));
  cmd->add_option("--reward", a.reward)->check(CLI::IsMember({"preference", "resilience", "experience", "balanced"}));
  cmd->add_option("--strategy", a.strategy)->check(CLI::IsMember({"greedy", "rl", "mcts"}));
  cmd->add_option("--days", a.days, "days to plan")->check(CLI::Range(1, 14));
  cmd->add_option("--seed", a.seed);
  cmd->add_option("--rollouts", a.rollouts, "MCTS rollouts per step")->check(CLI::PositiveNumber);
  cmd->add_option("--policy-steps", a.policy_steps, "training steps for the rl strategy");
  cmd->add_option("--time-limit", a.time_limit_s, "layer-1 time limit in seconds");
}

json run_record(const RunArgs& a) {
  SolveRequest req;
  req.orders_csv = slurp(a.orders);
  req.static_json = slurp(a.static_doc);
  req.parametrization = {parse_objective(a.objective), parse_reward(a.reward), parse_strategy(a.strategy)};
  req.days_to_plan = a.days;
  req.seed = a.seed;
  LoadOptions lo;
  lo.horizon_days = a.days;
  const Instance inst = load_instance(req.orders_csv, *req.static_json, lo);
  PipelineOptions opt;
  opt.seed = a.seed;
  opt.days_to_plan = a.days;
  opt.mcts_rollouts = a.rollouts;
  opt.layer1.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(a.time_limit_s * 1000));
  const auto steps = a.policy_steps;
  opt.policy_provider = [steps](RewardKind r) { return default_policy(r, steps); };
  return make_record(req, run_pipeline(inst, req.parametrization, opt));
}

json load_record(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairplan: two-layer production and workforce planner"};
  app.require_subcommand(1);

  RunArgs run;
  std::string out;

  auto* solve_cmd = app.add_subcommand("solve", "run both layers and print the solution record");
  add_run_options(solve_cmd, run);
  solve_cmd->add_option("-o,--out", out, "output file (default stdout)");

  std::string record_path;
  auto* kpi_cmd = app.add_subcommand("kpi", "KPI summary of a record (or of a fresh run)");
  kpi_cmd->add_option("--record", record_path)->check(CLI::ExistingFile);
  kpi_cmd->add_option("-o,--out", out);

  auto* export_cmd = app.add_subcommand("export", "timeboxes of a record as a JSON array");
  export_cmd->add_option("--record", record_path)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("-o,--out", out);

  RunArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run the full parametrization grid; prints radar CSV");
  add_run_options(bench_cmd, bench);
  bench_cmd->add_option("-o,--out", out);

  std::string reward = "balanced", curve_out;
  std::int64_t steps = 20000;
  std::uint64_t seed = 0;
  auto* train_cmd = app.add_subcommand("train", "train the linear masked policy on generated instances");
  train_cmd->add_option("--reward", reward)->check(CLI::IsMember({"preference", "resilience", "experience", "balanced"}));
  train_cmd->add_option("--steps", steps);
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("-o,--out", out, "policy JSON");
  train_cmd->add_option("--curve", curve_out, "training curve CSV");

  std::string store = "solutions", static_path, host = "0.0.0.0";
  int port = 0;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP planner service (port from FAIRPLAN_PORT)");
  serve_cmd->add_option("--store", store, "record directory");
  serve_cmd->add_option("--static", static_path, "default static context JSON")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port, "overrides FAIRPLAN_PORT");
  serve_cmd->add_option("--rollouts", run.rollouts);

  GeneratorConfig gen;
  std::string gen_dir = ".";
  auto* gen_cmd = app.add_subcommand("generate", "write a seeded random instance (orders.csv, static.json)");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--batches", gen.batches.hi, "maximum batch count");
  gen_cmd->add_option("--lines", gen.lines.hi, "maximum line count");
  gen_cmd->add_option("--workers", gen.workers.hi, "maximum worker count");
  gen_cmd->add_option("--out-dir", gen_dir);

  auto* list_cmd = app.add_subcommand("list", "index of a record directory");
  list_cmd->add_option("--store", store);
  std::string show_id;
  auto* show_cmd = app.add_subcommand("show", "print one stored record");
  show_cmd->add_option("--store", store);
  show_cmd->add_option("id", show_id)->required();

  std::vector<int> actions;
  auto* step_cmd = app.add_subcommand("step", "replay flattened actions on a record's episode");
  step_cmd->add_option("--record", record_path)->required()->check(CLI::ExistingFile);
  step_cmd->add_option("actions", actions, "flattened action indices");
  step_cmd->add_option("--static", static_path, "static document if the record has none");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      emit(run_record(run).dump(2), out);
    } else if (*kpi_cmd) {
      if (record_path.empty()) throw std::runtime_error("kpi needs --record");
      const json r = load_record(record_path);
      emit(r.at("kpis").dump(2), out);
    } else if (*export_cmd) {
      emit(load_record(record_path).at("timeboxes").dump(2), out);
    } else if (*bench_cmd) {
      std::vector<RadarInput> inputs;
      for (const auto& p : all_parametrizations()) {
        RunArgs a = bench;
        a.objective = std::string(to_string(p.objective));
        a.reward = std::string(to_string(p.reward));
        a.strategy = std::string(to_string(p.strategy));
        const json r = run_record(a);
        if (r.at("kpis").is_null()) continue;
        KpiSummary k;
        k.mean_xi = r["kpis"]["mean_xi"];
        k.mean_pi = r["kpis"]["mean_pi"];
        k.mean_rho = r["kpis"]["mean_rho"];
        inputs.push_back({std::string(to_string(p.strategy)), std::string(to_string(p.objective)) + "/" +
                                                                   std::string(to_string(p.reward)), k});
        std::cerr << p.label() << " done\n";
      }
      emit(radar_csv(radar_data(inputs)), out);
    } else if (*train_cmd) {
      const RewardConfig cfg = reward_config(parse_reward(reward));
      TrainOptions opt;
      opt.total_steps = steps;
      opt.seed = seed;
      const auto res = rl_train([&](std::uint64_t s) { return generated_episode(s, cfg); }, opt);
      emit(res.policy.to_json(), out);
      if (!curve_out.empty()) emit(curve_csv(res.curve), curve_out);
    } else if (*serve_cmd) {
      ServiceConfig cfg;
      cfg.store_dir = store;
      cfg.static_json = slurp(static_path);
      cfg.mcts_rollouts = run.rollouts;
      PlannerService svc(cfg);
      const int p = port > 0 ? port : port_from_env(8080);
      std::cerr << "listening on " << host << ":" << p << "\n";
      svc.serve(host, p);
    } else if (*gen_cmd) {
      const Instance inst = generate(gen);
      std::filesystem::create_directories(gen_dir);
      emit(to_orders_csv(inst), (std::filesystem::path(gen_dir) / "orders.csv").string());
      emit(to_static_json(inst), (std::filesystem::path(gen_dir) / "static.json").string());
    } else if (*list_cmd) {
      ServiceConfig cfg;
      cfg.store_dir = store;
      emit(PlannerService(cfg).list_solutions().body.dump(2), "");
    } else if (*show_cmd) {
      ServiceConfig cfg;
      cfg.store_dir = store;
      const auto r = PlannerService(cfg).get_solution(show_id);
      emit(r.body.dump(2), "");
      return r.status == 200 ? 0 : 1;
    } else if (*step_cmd) {
      const json r = load_record(record_path);
      ServiceConfig cfg;
      cfg.store_dir = std::filesystem::temp_directory_path() / "fairplan-step";
      if (!static_path.empty()) cfg.static_json = slurp(static_path);
      PlannerService svc(cfg);
      SolutionStore tmp(cfg.store_dir);
      const std::string id = tmp.put(r);
      auto created = svc.create_episode(json{{"solution_id", id}}.dump());
      if (created.status != 201) {
        emit(created.body.dump(2), "");
        return 1;
      }
      const std::string ep = created.body["id"];
      for (int a : actions) {
        const auto s = svc.step_episode(ep, json{{"action", a}}.dump());
        if (s.status != 200) {
          emit(s.body.dump(2), "");
          return 1;
        }
        std::cout << "A=" << a << " reward=" << s.body["reward"] << "\n";
      }
      emit(svc.get_episode(ep).body.dump(2), "");
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation failed:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
