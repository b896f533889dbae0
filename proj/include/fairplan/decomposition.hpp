#pragma once

#include <string>
#include <vector>

#include "fairplan/calendar.hpp"
#include "fairplan/instance.hpp"
#include "fairplan/order_line.hpp"

namespace fairplan {

struct SlotRow {
  int interval = 0;  // 1-based, as in the figures
  std::string line_id;
  std::string batch_id;
  std::string geometry_id;
  std::string order_id;
  int required = 0;
  bool setup_only = false;  // the whole interval lies inside the batch's setup prefix
};

struct TimeInterval {
  int index = 0;  // 1-based
  SolverMinute start = 0;
  SolverMinute end = 0;
  std::vector<SlotRow> rows;  // instance line order, active lines only
};

struct DecomposeOptions {
  // Staff intervals that are pure setup with the option's crew instead of zero.
  bool staffed_setup = false;
};

/// Splits the schedule at every placement boundary and every shift boundary
/// inside the schedule span. Intervals with no active line are dropped.
std::vector<TimeInterval> decompose(const OrderLineSchedule& schedule, const Instance& instance,
                                    const ShiftGrid& grid, const DecomposeOptions& options = {});

int slot_count(const std::vector<TimeInterval>& intervals);

}  // namespace fairplan
