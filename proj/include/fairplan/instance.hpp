#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fairplan/calendar.hpp"

namespace fairplan {

/// Instance documents that fail validation. `offending_ids` lists every
/// unresolved or out-of-range identifier found.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::vector<std::string> problems, std::vector<std::string> offending_ids);

  const std::vector<std::string>& problems() const { return problems_; }
  const std::vector<std::string>& offending_ids() const { return offending_ids_; }

 private:
  std::vector<std::string> problems_;
  std::vector<std::string> offending_ids_;
};

struct LineOption {
  std::int64_t setup_minutes = 0;
  double rate = 1.0;  // units per minute
  int required_workers = 1;

  friend bool operator==(const LineOption&, const LineOption&) = default;
};

struct GeometryBatch {
  std::string id;
  std::string geometry_id;
  std::string order_id;
  std::int64_t quantity = 1;
  SolverMinute due_date = 0;
  bool priority = false;
  std::map<std::string, LineOption> options;  // admissible lines

  friend bool operator==(const GeometryBatch&, const GeometryBatch&) = default;
};

struct Worker {
  std::string id;
  std::set<ShiftLabel> shifts;                      // applies to every working day
  std::map<int, std::set<ShiftLabel>> day_overrides;  // working-day index -> shifts

  bool available(const Shift& shift) const;

  friend bool operator==(const Worker&, const Worker&) = default;
};

/// Factor values a worker brings to one (line, geometry) combination.
struct TaskFactors {
  bool medical = false;
  double preference = 0.0;
  double resilience = 0.0;
  double experience = 0.0;

  friend bool operator==(const TaskFactors&, const TaskFactors&) = default;
};

/// Human-factor lookups. Resilience is held per worker, with an optional
/// per-(line, geometry) override. Unlisted combinations read as not medically cleared.
class HumanFactorTable {
 public:
  struct TaskEntry {
    bool medical = false;
    double preference = 0.0;
    double experience = 0.0;
    std::optional<double> resilience;

    friend bool operator==(const TaskEntry&, const TaskEntry&) = default;
  };
  using Key = std::tuple<std::string, std::string, std::string>;  // worker, line, geometry

  void set_task(const std::string& worker, const std::string& line, const std::string& geometry,
                TaskEntry entry);
  void set_resilience(const std::string& worker, double rho);

  TaskFactors lookup(const std::string& worker, const std::string& line,
                     const std::string& geometry) const;

  const std::map<Key, TaskEntry>& tasks() const { return tasks_; }
  const std::map<std::string, double>& resilience() const { return resilience_; }

  friend bool operator==(const HumanFactorTable&, const HumanFactorTable&) = default;

 private:
  std::map<Key, TaskEntry> tasks_;
  std::map<std::string, double> resilience_;
};

struct Instance {
  std::vector<GeometryBatch> batches;
  std::vector<std::string> lines;
  std::vector<Worker> workers;
  HumanFactorTable factors;
  SolverCalendar calendar;

  const GeometryBatch& batch(std::string_view id) const;
  int line_index(std::string_view id) const;  // -1 when unknown

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Production minutes for `batch` on `line_id`: setup + ceil(quantity / rate).
std::int64_t duration(const GeometryBatch& batch, const std::string& line_id);

/// Checks every cross-reference and range invariant; throws ValidationError.
void validate(const Instance& instance);

struct LoadOptions {
  std::optional<int> horizon_days;            // overrides the static document
  std::optional<EpochSeconds> reference;      // overrides the static document
};

/// Orders CSV (order_id, geometry_id, quantity, due_date, priority[, batch_id])
/// plus the static context document (JSON text).
Instance load_instance(std::string_view orders_csv, std::string_view static_json,
                       const LoadOptions& options = {});

std::string to_orders_csv(const Instance& instance);
std::string to_static_json(const Instance& instance);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace fairplan
