#include "fairplan/decomposition.hpp"

#include <algorithm>
#include <set>

namespace fairplan {

std::vector<TimeInterval> decompose(const OrderLineSchedule& schedule, const Instance& instance,
                                    const ShiftGrid& grid, const DecomposeOptions& options) {
  std::vector<TimeInterval> out;
  if (schedule.placements.empty()) return out;

  SolverMinute lo = schedule.placements.front().start, hi = schedule.placements.front().end;
  std::set<SolverMinute> cuts;
  for (const auto& p : schedule.placements) {
    lo = std::min(lo, p.start);
    hi = std::max(hi, p.end);
    cuts.insert(p.start);
    cuts.insert(p.end);
  }
  for (const auto& s : grid) {
    if (s.start > lo && s.start < hi) cuts.insert(s.start);
    if (s.end > lo && s.end < hi) cuts.insert(s.end);
  }

  const std::vector<SolverMinute> bounds(cuts.begin(), cuts.end());
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    TimeInterval iv;
    iv.start = bounds[k];
    iv.end = bounds[k + 1];
    for (const auto& line : instance.lines) {
      for (const auto& p : schedule.placements) {
        if (p.line_id != line || p.start > iv.start || p.end < iv.end) continue;
        const GeometryBatch& b = instance.batch(p.batch_id);
        const LineOption& opt = b.options.at(line);
        SlotRow row;
        row.line_id = line;
        row.batch_id = b.id;
        row.geometry_id = b.geometry_id;
        row.order_id = b.order_id;
        row.setup_only = iv.end <= p.start + opt.setup_minutes;
        row.required = row.setup_only && !options.staffed_setup ? 0 : opt.required_workers;
        iv.rows.push_back(std::move(row));
        break;
      }
    }
    if (iv.rows.empty()) continue;
    iv.index = static_cast<int>(out.size()) + 1;
    for (auto& r : iv.rows) r.interval = iv.index;
    out.push_back(std::move(iv));
  }
  return out;
}

int slot_count(const std::vector<TimeInterval>& intervals) {
  int n = 0;
  for (const auto& iv : intervals)
    for (const auto& r : iv.rows) n += r.required;
  return n;
}

}  // namespace fairplan
