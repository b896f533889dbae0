#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fairplan/generator.hpp"
#include "fairplan/pipeline.hpp"
#include "fairplan/service.hpp"

namespace py = pybind11;
using namespace fairplan;
using nlohmann::json;

namespace {

Instance load(const std::string& orders_csv, const std::string& static_json, std::optional<int> days) {
  LoadOptions lo;
  lo.horizon_days = days;
  return load_instance(orders_csv, static_json, lo);
}

// Layer-2 environment over the optimal schedule of an instance.
class Episode {
 public:
  Episode(const std::string& orders_csv, const std::string& static_json, const std::string& objective,
          const std::string& reward, std::uint64_t seed) {
    Instance inst = load(orders_csv, static_json, std::nullopt);
    validate(inst);
    const auto schedule = solve(inst, objective_weights(parse_objective(objective)), {}, seed);
    state_ = make_episode(inst, schedule, reward_config(parse_reward(reward)));
  }

  int n_rows() const { return state_.model().n_rows(); }
  int n_workers() const { return state_.model().n_workers(); }
  int n_actions() const { return state_.model().n_actions(); }
  int n_slots() const { return state_.model().n_slots; }
  std::vector<std::string> workers() const { return state_.model().workers; }
  bool terminal() const { return state_.terminal(); }
  std::vector<bool> mask() const { return state_.action_mask(); }
  std::vector<int> legal_actions() const { return state_.legal_actions(); }
  std::vector<double> observation() const { return state_.observation(); }
  double total_return() const { return state_.total_return(); }
  int decision_steps() const { return state_.decision_steps(); }
  int unfilled_slots() const { return state_.unfilled_slots(); }

  // (reward, terminal, continuations)
  py::tuple step(int action) {
    const double r = state_.apply(action);
    const int cont = state_.trace().empty() ? 0 : state_.trace().back().continuations;
    return py::make_tuple(r, state_.terminal(), cont);
  }

  std::vector<std::pair<std::string, std::string>> assignments() const {
    std::vector<std::pair<std::string, std::string>> out;
    const auto& m = state_.model();
    for (const auto& a : state_.assignments()) {
      const auto& row = m.rows[a.r_idx];
      out.emplace_back(std::to_string(row.slot.interval) + ":" + row.slot.line_id, m.workers[a.w_idx]);
    }
    return out;
  }

  std::string greedy() const { return episode_json(greedy_solve(state_).final_state).dump(); }

 private:
  AllocationState state_;
};

std::string run(const std::string& orders_csv, const std::string& static_json, const std::string& objective,
                const std::string& reward, const std::string& strategy, int days_to_plan, std::uint64_t seed,
                int mcts_rollouts) {
  SolveRequest req;
  req.orders_csv = orders_csv;
  req.static_json = static_json;
  req.parametrization = {parse_objective(objective), parse_reward(reward), parse_strategy(strategy)};
  req.days_to_plan = days_to_plan;
  req.seed = seed;
  PipelineOptions opt;
  opt.seed = seed;
  opt.days_to_plan = days_to_plan;
  opt.mcts_rollouts = mcts_rollouts;
  const Instance inst = load(orders_csv, static_json, days_to_plan);
  json rec;
  {
    py::gil_scoped_release release;
    rec = make_record(req, run_pipeline(inst, req.parametrization, opt));
  }
  rec["id"] = content_id(rec);
  return rec.dump();
}

std::string solve_schedule(const std::string& orders_csv, const std::string& static_json, const std::string& objective,
                           std::uint64_t seed) {
  Instance inst = load(orders_csv, static_json, std::nullopt);
  validate(inst);
  const auto s = solve(inst, objective_weights(parse_objective(objective)), {}, seed);
  inst.calendar.horizon_days = std::max(inst.calendar.horizon_days, covering_days(s.makespan));
  return schedule_json(s, inst.calendar).dump();
}

py::tuple generate_instance(std::uint64_t seed, int batches, int lines, int workers) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.batches = {std::min(cfg.batches.lo, batches), batches};
  cfg.lines = {1, lines};
  cfg.workers = {std::min(cfg.workers.lo, workers), workers};
  const Instance inst = generate(cfg);
  return py::make_tuple(to_orders_csv(inst), to_static_json(inst));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "fairplan C++ core";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IllegalActionError>(m, "IllegalActionError", PyExc_ValueError);

  m.def("parse_iso8601", [](const std::string& t) { return parse_iso8601(t); });
  m.def("format_iso8601", &format_iso8601);
  m.def(
      "to_solver_minutes",
      [](EpochSeconds ts, EpochSeconds reference) { return to_solver_minutes(ts, SolverCalendar{reference, 14}); },
      py::arg("ts"), py::arg("reference"));
  m.def(
      "from_solver_minutes",
      [](SolverMinute t, EpochSeconds reference, int horizon_days) {
        return from_solver_minutes(t, SolverCalendar{reference, horizon_days});
      },
      py::arg("minute"), py::arg("reference"), py::arg("horizon_days") = 14);
  m.def(
      "shift_grid",
      [](EpochSeconds reference, int days) {
        std::vector<py::tuple> out;
        for (const auto& s : shift_grid(SolverCalendar{reference, days}))
          out.push_back(py::make_tuple(s.start, s.end, std::string(to_string(s.label)), s.day));
        return out;
      },
      py::arg("reference"), py::arg("days"));

  m.def("flatten", &flatten, py::arg("r_idx"), py::arg("w_idx"), py::arg("n_rows"), py::arg("n_workers"));
  m.def("unflatten", &unflatten, py::arg("action"), py::arg("n_rows"), py::arg("n_workers"));
  m.def("fairness_score", &fairness_score, py::arg("preferences"));

  m.def("run", &run, py::arg("orders_csv"), py::arg("static_json"), py::arg("objective"), py::arg("reward"),
        py::arg("strategy"), py::arg("days_to_plan"), py::arg("seed"), py::arg("mcts_rollouts"));
  m.def("solve_schedule", &solve_schedule);
  m.def("timebox_schema", [] { return timebox_schema().dump(); });
  m.def("generate", &generate_instance);

  py::class_<Episode>(m, "Episode")
      .def(py::init<const std::string&, const std::string&, const std::string&, const std::string&, std::uint64_t>(),
           py::arg("orders_csv"), py::arg("static_json"), py::arg("objective") = "balanced",
           py::arg("reward") = "balanced", py::arg("seed") = 0)
      .def_property_readonly("n_rows", &Episode::n_rows)
      .def_property_readonly("n_workers", &Episode::n_workers)
      .def_property_readonly("n_actions", &Episode::n_actions)
      .def_property_readonly("n_slots", &Episode::n_slots)
      .def_property_readonly("workers", &Episode::workers)
      .def_property_readonly("terminal", &Episode::terminal)
      .def_property_readonly("total_return", &Episode::total_return)
      .def_property_readonly("decision_steps", &Episode::decision_steps)
      .def_property_readonly("unfilled_slots", &Episode::unfilled_slots)
      .def("mask", &Episode::mask)
      .def("legal_actions", &Episode::legal_actions)
      .def("observation", &Episode::observation)
      .def("step", &Episode::step, py::arg("action"))
      .def("assignments", &Episode::assignments)
      .def("greedy", &Episode::greedy);
}
