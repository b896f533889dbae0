#include "fairplan/kpi.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace fairplan {
namespace {

KpiSummary summarize(const std::vector<std::string>& worker_ids, const std::vector<TaskFactors>& picks,
                     const std::vector<int>& who) {
  if (picks.empty()) throw DomainError("no assignments to summarize");
  KpiSummary k;
  std::map<int, std::vector<double>> per_worker;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    k.mean_xi += picks[i].experience;
    k.mean_pi += picks[i].preference;
    k.mean_rho += picks[i].resilience;
    per_worker[who[i]].push_back(picks[i].preference);
  }
  const double n = static_cast<double>(picks.size());
  k.mean_xi /= n;
  k.mean_pi /= n;
  k.mean_rho /= n;
  k.assignments = static_cast<int>(picks.size());
  std::vector<std::vector<double>> lists;
  for (const auto& [w, prefs] : per_worker) {
    lists.push_back(prefs);
    const double mean = std::accumulate(prefs.begin(), prefs.end(), 0.0) / static_cast<double>(prefs.size());
    k.workers.push_back({worker_ids[w], static_cast<int>(prefs.size()), mean});
  }
  k.s_fair = fairness_score(lists);
  return k;
}

}  // namespace

KpiSummary kpis(const AllocationState& state) {
  const EpisodeModel& m = state.model();
  std::vector<TaskFactors> picks;
  std::vector<int> who;
  for (const auto& a : state.assignments()) {
    const Cell& c = m.cell(a.r_idx, a.w_idx);
    picks.push_back({c.mu, c.pi, c.rho, c.xi});
    who.push_back(a.w_idx);
  }
  return summarize(m.workers, picks, who);
}

std::string task_label(const std::string& order, const std::string& geometry) {
  return order + " × " + geometry;
}

std::vector<Timebox> export_timeboxes(const OrderLineSchedule& schedule, const AllocationState& state,
                                      const Instance& instance, const SolverCalendar& calendar) {
  const EpisodeModel& m = state.model();
  auto epoch_start = [&](SolverMinute t) { return calendar.instant_at(t); };
  // End instants belong to the minute before them; keeps Friday ends on Saturday 06:00.
  auto epoch_end = [&](SolverMinute t) { return t > 0 ? calendar.instant_at(t - 1) + 60 : calendar.instant_at(0); };

  std::vector<Timebox> out;
  for (const auto& p : schedule.placements) {
    const GeometryBatch& b = instance.batch(p.batch_id);
    const LineOption& opt = b.options.at(p.line_id);
    const SolverMinute prod_start = p.start + opt.setup_minutes;

    Timebox proto;
    proto.resource = p.line_id;
    proto.task = task_label(b.order_id, b.geometry_id);
    proto.geometry = b.geometry_id;
    proto.order = b.order_id;
    proto.total_amount = b.quantity;

    if (opt.setup_minutes > 0) {
      Timebox s = proto;
      s.is_setup = true;
      s.solver_start = p.start;
      s.solver_end = prod_start;
      for (const auto& iv : m.intervals)
        if (iv.start > p.start && iv.start < prod_start) {
          s.warning = "setup spans a shift change";
          break;
        }
      out.push_back(std::move(s));
    }

    std::vector<Timebox> prod;
    for (int r = 0; r < m.n_rows(); ++r) {
      const RowInfo& row = m.rows[r];
      if (row.slot.batch_id != b.id || row.slot.line_id != p.line_id) continue;
      const SolverMinute s0 = std::max(row.start, prod_start);
      if (s0 >= row.end) continue;
      Timebox t = proto;
      t.solver_start = s0;
      t.solver_end = row.end;
      t.required_workers = row.slot.required;
      for (int w = 0; w < m.n_workers(); ++w)
        if (state.sigma(r, w)) t.workers.push_back(m.workers[w]);
      if (state.allocated(r) < row.slot.required)
        t.warning = "unfilled slots: " + std::to_string(row.slot.required - state.allocated(r)) + " of " +
                    std::to_string(row.slot.required);
      prod.push_back(std::move(t));
    }

    // Largest-remainder split; equal remainders favour the later box.
    std::int64_t total_len = 0;
    for (const auto& t : prod) total_len += t.solver_end - t.solver_start;
    if (total_len > 0) {
      std::vector<std::int64_t> rem(prod.size());
      std::int64_t assigned = 0;
      for (std::size_t k = 0; k < prod.size(); ++k) {
        const std::int64_t num = b.quantity * (prod[k].solver_end - prod[k].solver_start);
        prod[k].produced_amount = num / total_len;
        rem[k] = num % total_len;
        assigned += prod[k].produced_amount;
      }
      std::vector<std::size_t> order(prod.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return rem[x] != rem[y] ? rem[x] > rem[y] : x > y;
      });
      for (std::size_t k = 0; assigned < b.quantity; ++k, ++assigned) ++prod[order[k]].produced_amount;
    }
    std::int64_t cumulative = 0;
    for (auto& t : prod) {
      cumulative += t.produced_amount;
      t.produced_until_now = cumulative;
      out.push_back(std::move(t));
    }
  }
  for (auto& t : out) {
    t.start = epoch_start(t.solver_start);
    t.finish = epoch_end(t.solver_end);
  }
  return out;
}

nlohmann::json to_json(const Timebox& t) {
  nlohmann::json j;
  j["Start"] = t.start;
  j["Finish"] = t.finish;
  j["Resource"] = t.resource;
  j["Task"] = t.task;
  j["geometry"] = t.geometry;
  j["order"] = t.order;
  j["is_setup_timebox"] = t.is_setup ? 1 : 0;
  j["produced_amount"] = t.produced_amount;
  j["produced_until_now"] = t.produced_until_now;
  j["total_amount"] = t.total_amount;
  j["required_workers"] = t.required_workers;
  j["workers"] = t.workers;
  j["warning"] = t.warning ? nlohmann::json(*t.warning) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const std::vector<Timebox>& boxes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : boxes) arr.push_back(to_json(b));
  return arr;
}

Timebox timebox_from_json(const nlohmann::json& j) {
  const auto problems = check_timebox_document(j);
  if (!problems.empty()) throw DomainError("malformed timebox: " + problems.front());
  Timebox t;
  t.start = j["Start"].get<EpochSeconds>();
  t.finish = j["Finish"].get<EpochSeconds>();
  t.resource = j["Resource"].get<std::string>();
  t.task = j["Task"].get<std::string>();
  t.geometry = j["geometry"].get<std::string>();
  t.order = j["order"].get<std::string>();
  t.is_setup = j["is_setup_timebox"].get<int>() == 1;
  t.produced_amount = j["produced_amount"].get<std::int64_t>();
  t.produced_until_now = j["produced_until_now"].get<std::int64_t>();
  t.total_amount = j["total_amount"].get<std::int64_t>();
  t.required_workers = j["required_workers"].get<int>();
  t.workers = j["workers"].get<std::vector<std::string>>();
  if (!j["warning"].is_null()) t.warning = j["warning"].get<std::string>();
  return t;
}

std::vector<std::string> check_timebox_document(const nlohmann::json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) return {"record is not an object"};
  static const std::vector<std::string> ints = {"Start", "Finish", "produced_amount", "produced_until_now",
                                                "total_amount", "required_workers"};
  static const std::vector<std::string> strings = {"Resource", "Task", "geometry", "order"};
  std::set<std::string> expected(ints.begin(), ints.end());
  expected.insert(strings.begin(), strings.end());
  expected.insert({"is_setup_timebox", "workers", "warning"});
  for (const auto& [key, _] : j.items())
    if (!expected.contains(key)) problems.push_back("unexpected key '" + key + "'");
  for (const auto& key : expected)
    if (!j.contains(key)) problems.push_back("missing key '" + key + "'");
  if (!problems.empty()) return problems;
  for (const auto& key : ints)
    if (!j[key].is_number_integer()) problems.push_back("'" + key + "' must be an integer");
  for (const auto& key : strings)
    if (!j[key].is_string()) problems.push_back("'" + key + "' must be a string");
  const auto& setup = j["is_setup_timebox"];
  if (!setup.is_number_integer() || (setup.get<int>() != 0 && setup.get<int>() != 1))
    problems.push_back("'is_setup_timebox' must be 0 or 1");
  if (!j["warning"].is_null() && !j["warning"].is_string()) problems.push_back("'warning' must be a string or null");
  if (!j["workers"].is_array()) {
    problems.push_back("'workers' must be an array");
  } else {
    for (const auto& w : j["workers"])
      if (!w.is_string()) problems.push_back("'workers' entries must be strings");
  }
  return problems;
}

nlohmann::json timebox_schema() {
  using nlohmann::json;
  const json integer = {{"type", "integer"}};
  const json string = {{"type", "string"}};
  return {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"title", "Timebox"},
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"Finish", "Resource", "Start", "Task", "geometry", "is_setup_timebox", "order",
                    "produced_amount", "produced_until_now", "required_workers", "total_amount", "warning",
                    "workers"}},
      {"properties",
       {{"Finish", integer},
        {"Resource", string},
        {"Start", integer},
        {"Task", string},
        {"geometry", string},
        {"is_setup_timebox", {{"type", "integer"}, {"enum", {0, 1}}}},
        {"order", string},
        {"produced_amount", integer},
        {"produced_until_now", integer},
        {"required_workers", integer},
        {"total_amount", integer},
        {"warning", {{"type", {"string", "null"}}}},
        {"workers", {{"type", "array"}, {"items", string}}}}},
  };
}

KpiSummary kpis_from_timeboxes(const std::vector<Timebox>& boxes, const Instance& instance) {
  std::vector<std::string> ids;
  std::map<std::string, int> index;
  for (const auto& w : instance.workers) {
    index[w.id] = static_cast<int>(ids.size());
    ids.push_back(w.id);
  }
  std::vector<TaskFactors> picks;
  std::vector<int> who;
  for (const auto& t : boxes) {
    if (t.is_setup) continue;
    for (const auto& w : t.workers) {
      auto it = index.find(w);
      if (it == index.end()) throw DomainError("timebox names unknown worker '" + w + "'");
      picks.push_back(instance.factors.lookup(w, t.resource, t.geometry));
      who.push_back(it->second);
    }
  }
  return summarize(ids, picks, who);
}

std::vector<RadarRow> radar_data(const std::vector<RadarInput>& inputs) {
  std::vector<RadarRow> rows;
  for (const auto& in : inputs) {
    const auto& s = in.summary;
    for (double v : {s.mean_xi, s.mean_pi, s.mean_rho})
      if (!(v >= 0.0 && v <= 1.0))
        throw DomainError("KPI value out of [0, 1] for " + in.strategy + "/" + in.parametrization);
    rows.push_back({in.strategy, in.parametrization, s.mean_xi, s.mean_pi, s.mean_rho});
  }
  return rows;
}

std::string radar_csv(const std::vector<RadarRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "strategy,parametrization,mean_xi,mean_pi,mean_rho\n";
  for (const auto& r : rows)
    os << r.strategy << ',' << r.parametrization << ',' << r.xi << ',' << r.pi << ',' << r.rho << '\n';
  return os.str();
}

}  // namespace fairplan
