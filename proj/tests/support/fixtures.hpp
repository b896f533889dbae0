#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "fairplan/allocation.hpp"
#include "fairplan/instance.hpp"

namespace fixtures {

using namespace fairplan;

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("missing fixture " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline std::string demo_orders() { return read_file(std::string(FAIRPLAN_DATA_DIR) + "/demo/orders.csv"); }
inline std::string demo_static() { return read_file(std::string(FAIRPLAN_DATA_DIR) + "/demo/static.json"); }

inline constexpr EpochSeconds kMonday0600 = 1694412000;  // 2023-09-11T06:00

// Hand-sized episode: two lines, up to `max_workers` workers, intervals of one
// hour inside the first early shift and at most `max_slots` slots.
struct TinyEpisode {
  Instance instance;
  std::vector<TimeInterval> intervals;
};

inline TinyEpisode tiny_episode(std::mt19937_64& rng, int max_slots, int max_workers, int max_intervals = 3) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto unit = [&] { return std::round(std::uniform_real_distribution<double>(0.0, 1.0)(rng) * 100.0) / 100.0; };
  TinyEpisode t;
  Instance& inst = t.instance;
  inst.calendar.reference = kMonday0600;
  inst.calendar.horizon_days = 1;
  inst.lines = {"l1", "l2"};
  const int nw = pick(2, max_workers);
  for (int w = 1; w <= nw; ++w) {
    Worker worker;
    worker.id = "w" + std::to_string(w);
    if (pick(0, 9) > 0) worker.shifts = {ShiftLabel::early};
    inst.workers.push_back(worker);
    inst.factors.set_resilience(worker.id, unit());
    for (const auto& l : inst.lines)
      for (const std::string g : {"g1", "g2"}) {
        HumanFactorTable::TaskEntry e;
        e.medical = pick(0, 6) > 0;
        e.preference = unit();
        e.experience = unit();
        inst.factors.set_task(worker.id, l, g, e);
      }
  }
  int slots = 0;
  const int ni = pick(1, max_intervals);
  for (int i = 0; i < ni && slots < max_slots; ++i) {
    TimeInterval iv;
    iv.index = static_cast<int>(t.intervals.size()) + 1;
    iv.start = 60 * i;
    iv.end = 60 * (i + 1);
    for (const auto& l : inst.lines) {
      if (slots >= max_slots || pick(0, 3) == 0) continue;
      SlotRow row;
      row.interval = iv.index;
      row.line_id = l;
      row.geometry_id = pick(0, 2) == 0 ? "g2" : "g1";
      row.batch_id = "o1/" + row.geometry_id;
      row.order_id = "o1";
      row.required = std::min(pick(1, 2), max_slots - slots);
      slots += row.required;
      iv.rows.push_back(row);
    }
    if (!iv.rows.empty()) t.intervals.push_back(iv);
  }
  return t;
}

}  // namespace fixtures
