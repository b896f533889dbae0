#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairplan/allocation.hpp"
#include "fairplan/order_line.hpp"

namespace fairplan {

struct WorkerKpi {
  std::string worker_id;
  int assignments = 0;
  double mean_pi = 0.0;
};

struct KpiSummary {
  double mean_xi = 0.0;
  double mean_pi = 0.0;
  double mean_rho = 0.0;
  double s_fair = 0.0;
  int assignments = 0;
  std::vector<WorkerKpi> workers;  // only workers with at least one assignment
};

/// Means over every (row, worker) assignment of the state; throws DomainError
/// when nothing was assigned.
KpiSummary kpis(const AllocationState& state);

struct Timebox {
  EpochSeconds start = 0;
  EpochSeconds finish = 0;
  std::string resource;
  std::string task;
  std::string geometry;
  std::string order;
  bool is_setup = false;
  std::int64_t produced_amount = 0;
  std::int64_t produced_until_now = 0;
  std::int64_t total_amount = 0;
  int required_workers = 0;
  std::vector<std::string> workers;
  std::optional<std::string> warning;

  // Solver-minute bounds; not part of the exported document.
  SolverMinute solver_start = 0;
  SolverMinute solver_end = 0;
};

/// One setup box per batch with setup time, then one production box per
/// interval the batch occupies. Amounts are split by duration with the
/// largest-remainder method so batch totals are exact.
std::vector<Timebox> export_timeboxes(const OrderLineSchedule& schedule, const AllocationState& state,
                                      const Instance& instance, const SolverCalendar& calendar);

std::string task_label(const std::string& order, const std::string& geometry);

nlohmann::json to_json(const Timebox& box);
nlohmann::json to_json(const std::vector<Timebox>& boxes);
Timebox timebox_from_json(const nlohmann::json& j);

/// Problems with one exported record: missing or extra keys, wrong types.
std::vector<std::string> check_timebox_document(const nlohmann::json& j);
/// JSON Schema (draft 2020-12) for one record.
nlohmann::json timebox_schema();

/// Recomputes the KPI summary from exported boxes and the instance factors.
KpiSummary kpis_from_timeboxes(const std::vector<Timebox>& boxes, const Instance& instance);

struct RadarRow {
  std::string strategy;
  std::string parametrization;
  double xi = 0.0;
  double pi = 0.0;
  double rho = 0.0;
};

struct RadarInput {
  std::string strategy;
  std::string parametrization;
  KpiSummary summary;
};

/// Throws DomainError when any axis value lies outside [0, 1].
std::vector<RadarRow> radar_data(const std::vector<RadarInput>& inputs);
std::string radar_csv(const std::vector<RadarRow>& rows);

}  // namespace fairplan
