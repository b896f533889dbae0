#include "fairplan/order_line.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace fairplan {

void ObjectiveWeights::validate() const {
  if (!(makespan >= 0.0) || !(tardiness >= 0.0) || !std::isfinite(makespan) || !std::isfinite(tardiness))
    throw DomainError("objective weights must be finite and non-negative");
  if (makespan == 0.0 && tardiness == 0.0) throw DomainError("objective weights must not both be zero");
}

const BatchPlacement& OrderLineSchedule::placement(std::string_view batch_id) const {
  for (const auto& p : placements)
    if (p.batch_id == batch_id) return p;
  throw DomainError("schedule has no placement for batch '" + std::string(batch_id) + "'");
}

std::string_view to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::missing_batch: return "missing_batch";
    case ViolationRule::duplicate_batch: return "duplicate_batch";
    case ViolationRule::unknown_batch: return "unknown_batch";
    case ViolationRule::inadmissible_line: return "inadmissible_line";
    case ViolationRule::interval_length: return "interval_length";
    case ViolationRule::negative_start: return "negative_start";
    case ViolationRule::overlap: return "overlap";
    case ViolationRule::priority: return "priority";
    case ViolationRule::objective_mismatch: return "objective_mismatch";
  }
  return "unknown";
}

ObjectiveComponents objective_components(const OrderLineSchedule& schedule, const Instance& instance,
                                         const ObjectiveWeights& weights) {
  ObjectiveComponents c;
  for (const auto& p : schedule.placements) {
    c.makespan = std::max(c.makespan, p.end);
    c.total_tardiness += std::max<SolverMinute>(0, p.end - instance.batch(p.batch_id).due_date);
  }
  c.objective = weights.makespan * static_cast<double>(c.makespan) +
                weights.tardiness * static_cast<double>(c.total_tardiness);
  return c;
}

VerifyReport verify(const OrderLineSchedule& schedule, const Instance& instance,
                    const ObjectiveWeights& weights) {
  VerifyReport report;
  auto add = [&](ViolationRule rule, std::vector<std::string> ids, std::string msg) {
    report.violations.push_back({rule, std::move(ids), std::move(msg)});
  };

  std::map<std::string, int> seen;
  for (const auto& p : schedule.placements) ++seen[p.batch_id];
  for (const auto& b : instance.batches) {
    auto it = seen.find(b.id);
    if (it == seen.end()) add(ViolationRule::missing_batch, {b.id}, "batch has no placement");
    else if (it->second > 1) add(ViolationRule::duplicate_batch, {b.id}, "batch placed more than once");
  }

  std::vector<const BatchPlacement*> known;
  for (const auto& p : schedule.placements) {
    const GeometryBatch* batch = nullptr;
    for (const auto& b : instance.batches)
      if (b.id == p.batch_id) batch = &b;
    if (!batch) {
      add(ViolationRule::unknown_batch, {p.batch_id}, "placement names an unknown batch");
      continue;
    }
    known.push_back(&p);
    if (!batch->options.contains(p.line_id)) {
      add(ViolationRule::inadmissible_line, {p.batch_id}, "line '" + p.line_id + "' is not admissible");
    } else if (p.end - p.start != duration(*batch, p.line_id)) {
      add(ViolationRule::interval_length, {p.batch_id},
          "interval length " + std::to_string(p.end - p.start) + " != duration " +
              std::to_string(duration(*batch, p.line_id)));
    }
    if (p.start < 0) add(ViolationRule::negative_start, {p.batch_id}, "negative start");
  }

  for (std::size_t i = 0; i < known.size(); ++i)
    for (std::size_t j = i + 1; j < known.size(); ++j) {
      const auto& a = *known[i];
      const auto& b = *known[j];
      if (a.line_id == b.line_id && a.start < b.end && b.start < a.end)
        add(ViolationRule::overlap, {a.batch_id, b.batch_id}, "intervals overlap on line '" + a.line_id + "'");
    }

  for (const auto* g : known)
    for (const auto* h : known) {
      if (!instance.batch(g->batch_id).priority || instance.batch(h->batch_id).priority) continue;
      if (g->end > h->start)
        add(ViolationRule::priority, {g->batch_id, h->batch_id},
            "priority batch ends after a non-priority batch starts");
    }

  if (known.size() == schedule.placements.size()) {
    const auto c = objective_components(schedule, instance, weights);
    if (c.makespan != schedule.makespan || c.total_tardiness != schedule.total_tardiness ||
        std::abs(c.objective - schedule.objective) > 1e-9 * std::max(1.0, std::abs(c.objective)))
      add(ViolationRule::objective_mismatch, {}, "stored objective components disagree with placements");
  }
  return report;
}

namespace {

constexpr std::int64_t kInadmissible = -1;

struct Problem {
  int n = 0;
  int lines = 0;
  std::vector<std::vector<std::int64_t>> dur;  // [batch][line]
  std::vector<std::int64_t> due;
  std::vector<bool> prio;
  std::vector<int> id_rank;  // position of each batch in id order
  std::vector<int> by_id;    // batch indices sorted by id
  ObjectiveWeights w;

  double z(std::int64_t cmax, std::int64_t tard) const {
    return w.makespan * static_cast<double>(cmax) + w.tardiness * static_cast<double>(tard);
  }
};

Problem make_problem(const Instance& inst, const ObjectiveWeights& w) {
  Problem p;
  p.n = static_cast<int>(inst.batches.size());
  p.lines = static_cast<int>(inst.lines.size());
  p.w = w;
  for (const auto& b : inst.batches) {
    std::vector<std::int64_t> row(p.lines, kInadmissible);
    for (int l = 0; l < p.lines; ++l)
      if (b.options.contains(inst.lines[l])) row[l] = duration(b, inst.lines[l]);
    p.dur.push_back(std::move(row));
    p.due.push_back(b.due_date);
    p.prio.push_back(b.priority);
  }
  p.by_id.resize(p.n);
  std::iota(p.by_id.begin(), p.by_id.end(), 0);
  std::sort(p.by_id.begin(), p.by_id.end(),
            [&](int a, int b) { return inst.batches[a].id < inst.batches[b].id; });
  p.id_rank.resize(p.n);
  for (int r = 0; r < p.n; ++r) p.id_rank[p.by_id[r]] = r;
  return p;
}

struct Assignment {
  std::vector<int> line;
  std::vector<std::int64_t> start;
  std::int64_t cmax = 0;
  std::int64_t tard = 0;
  std::int64_t sum_start = 0;
  double z = std::numeric_limits<double>::infinity();
  bool valid = false;
};

// Lexicographic (start, line) comparison in batch-id order.
bool lex_less(const Problem& p, const Assignment& a, const Assignment& b) {
  for (int i : p.by_id) {
    if (a.start[i] != b.start[i]) return a.start[i] < b.start[i];
    if (a.line[i] != b.line[i]) return a.line[i] < b.line[i];
  }
  return false;
}

bool better(const Problem& p, const Assignment& a, const Assignment& b) {
  if (!b.valid) return true;
  if (a.z != b.z) return a.z < b.z;
  if (a.sum_start != b.sum_start) return a.sum_start < b.sum_start;
  return lex_less(p, a, b);
}

// List scheduling in the given order; priority batches must come first.
Assignment construct(const Problem& p, const std::vector<int>& order) {
  Assignment a;
  a.line.assign(p.n, -1);
  a.start.assign(p.n, 0);
  std::vector<std::int64_t> free(p.lines, 0);
  std::int64_t barrier = 0;
  bool barrier_set = false;
  for (int i : order) {
    if (!p.prio[i] && !barrier_set) {
      for (int j = 0; j < p.n; ++j)
        if (p.prio[j] && a.line[j] >= 0) barrier = std::max(barrier, a.start[j] + p.dur[j][a.line[j]]);
      barrier_set = true;
    }
    int best = -1;
    std::int64_t best_end = 0;
    for (int l = 0; l < p.lines; ++l) {
      if (p.dur[i][l] == kInadmissible) continue;
      const std::int64_t s = p.prio[i] ? free[l] : std::max(free[l], barrier);
      if (best < 0 || s + p.dur[i][l] < best_end) {
        best = l;
        best_end = s + p.dur[i][l];
      }
    }
    a.line[i] = best;
    a.start[i] = best_end - p.dur[i][best];
    free[best] = best_end;
    a.cmax = std::max(a.cmax, best_end);
    a.tard += std::max<std::int64_t>(0, best_end - p.due[i]);
    a.sum_start += a.start[i];
  }
  a.z = p.z(a.cmax, a.tard);
  a.valid = true;
  return a;
}

class BranchAndBound {
 public:
  BranchAndBound(const Problem& p, const SearchBudget& budget, Assignment incumbent)
      : p_(p), budget_(budget), best_(std::move(incumbent)) {
    cur_.line.assign(p.n, -1);
    cur_.start.assign(p.n, 0);
    free_.assign(p.lines, 0);
    remaining_prio_ = static_cast<int>(std::count(p.prio.begin(), p.prio.end(), true));
    deadline_ = std::chrono::steady_clock::now() + budget.time_limit;
  }

  void run() { dfs(p_.n); }
  bool aborted() const { return aborted_; }
  std::int64_t nodes() const { return nodes_; }
  const Assignment& best() const { return best_; }

 private:
  struct Bound {
    double z;
    std::int64_t sum_start;
  };

  std::int64_t base(int l) const {
    std::int64_t b = std::max(free_[l], last_start_);
    if (remaining_prio_ == 0) b = std::max(b, barrier_);
    return b;
  }

  Bound lower_bound() const {
    std::int64_t cmax = cmax_, tard = tard_, sum_start = sum_start_, work = 0;
    std::vector<std::int64_t> bases(p_.lines);
    for (int l = 0; l < p_.lines; ++l) bases[l] = base(l);

    std::int64_t prio_end = prio_end_;
    if (remaining_prio_ > 0) {
      for (int i = 0; i < p_.n; ++i) {
        if (placed_[i] || !p_.prio[i]) continue;
        std::int64_t est = std::numeric_limits<std::int64_t>::max(), eft = est, md = est;
        for (int l = 0; l < p_.lines; ++l) {
          if (p_.dur[i][l] == kInadmissible) continue;
          est = std::min(est, bases[l]);
          eft = std::min(eft, bases[l] + p_.dur[i][l]);
          md = std::min(md, p_.dur[i][l]);
        }
        prio_end = std::max(prio_end, eft);
        cmax = std::max(cmax, eft);
        tard += std::max<std::int64_t>(0, eft - p_.due[i]);
        sum_start += est;
        work += md;
      }
    }
    const std::int64_t np_floor = remaining_prio_ > 0 ? prio_end : barrier_;
    for (int i = 0; i < p_.n; ++i) {
      if (placed_[i] || p_.prio[i]) continue;
      std::int64_t est = std::numeric_limits<std::int64_t>::max(), eft = est, md = est;
      for (int l = 0; l < p_.lines; ++l) {
        if (p_.dur[i][l] == kInadmissible) continue;
        const std::int64_t s = std::max(bases[l], np_floor);
        est = std::min(est, s);
        eft = std::min(eft, s + p_.dur[i][l]);
        md = std::min(md, p_.dur[i][l]);
      }
      cmax = std::max(cmax, eft);
      tard += std::max<std::int64_t>(0, eft - p_.due[i]);
      sum_start += est;
      work += md;
    }
    if (work > 0) {
      // Smallest C with sum_l max(0, C - base_l) >= remaining work.
      std::sort(bases.begin(), bases.end());
      std::int64_t acc = 0;
      for (int k = 1; k <= p_.lines; ++k) {
        acc += bases[k - 1];
        const std::int64_t c = (acc + work + k - 1) / k;
        if (k == p_.lines || c <= bases[k]) {
          cmax = std::max(cmax, c);
          break;
        }
      }
    }
    return {p_.z(cmax, tard), sum_start};
  }

  bool prunable(const Bound& b) const {
    if (!best_.valid) return false;
    return b.z > best_.z || (b.z == best_.z && b.sum_start > best_.sum_start);
  }

  bool out_of_budget() {
    if (nodes_ >= budget_.node_limit) return true;
    if ((nodes_ & 1023) == 0 && std::chrono::steady_clock::now() >= deadline_) return true;
    return false;
  }

  void dfs(int left) {
    if (aborted_) return;
    ++nodes_;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    if (left == 0) {
      cur_.cmax = cmax_;
      cur_.tard = tard_;
      cur_.sum_start = sum_start_;
      cur_.z = p_.z(cmax_, tard_);
      cur_.valid = true;
      if (better(p_, cur_, best_)) best_ = cur_;
      return;
    }

    struct Child {
      Bound bound;
      std::int64_t start;
      int batch;
      int line;
    };
    std::vector<Child> children;
    const bool prio_phase = remaining_prio_ > 0;
    for (int i = 0; i < p_.n; ++i) {
      if (placed_[i] || p_.prio[i] != prio_phase) continue;
      for (int l = 0; l < p_.lines; ++l) {
        if (p_.dur[i][l] == kInadmissible) continue;
        const std::int64_t s = prio_phase ? free_[l] : std::max(free_[l], barrier_);
        // Canonical generation order: strictly increasing (start, batch index).
        if (has_last_ && (s < last_start_ || (s == last_start_ && i <= last_batch_))) continue;
        const Saved saved = apply(i, l, s);
        const Bound b = lower_bound();
        undo(i, l, saved);
        if (!prunable(b)) children.push_back({b, s, i, l});
      }
    }
    std::sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
      if (a.bound.z != b.bound.z) return a.bound.z < b.bound.z;
      if (a.bound.sum_start != b.bound.sum_start) return a.bound.sum_start < b.bound.sum_start;
      if (a.start != b.start) return a.start < b.start;
      if (a.batch != b.batch) return a.batch < b.batch;
      return a.line < b.line;
    });
    for (const Child& c : children) {
      if (prunable(c.bound)) continue;
      const Saved saved = apply(c.batch, c.line, c.start);
      dfs(left - 1);
      undo(c.batch, c.line, saved);
      if (aborted_) return;
    }
  }

  struct Saved {
    std::int64_t free, cmax, tard, sum_start, last_start, barrier, prio_end;
    int last_batch;
    bool has_last;
  };

  Saved apply(int i, int l, std::int64_t s) {
    Saved saved{free_[l], cmax_, tard_, sum_start_, last_start_, barrier_, prio_end_, last_batch_, has_last_};
    const std::int64_t e = s + p_.dur[i][l];
    placed_[i] = true;
    cur_.line[i] = l;
    cur_.start[i] = s;
    free_[l] = e;
    cmax_ = std::max(cmax_, e);
    tard_ += std::max<std::int64_t>(0, e - p_.due[i]);
    sum_start_ += s;
    last_start_ = s;
    last_batch_ = i;
    has_last_ = true;
    if (p_.prio[i]) {
      prio_end_ = std::max(prio_end_, e);
      if (--remaining_prio_ == 0) barrier_ = prio_end_;
    }
    return saved;
  }

  void undo(int i, int l, const Saved& s) {
    placed_[i] = false;
    cur_.line[i] = -1;
    free_[l] = s.free;
    cmax_ = s.cmax;
    tard_ = s.tard;
    sum_start_ = s.sum_start;
    last_start_ = s.last_start;
    last_batch_ = s.last_batch;
    has_last_ = s.has_last;
    barrier_ = s.barrier;
    prio_end_ = s.prio_end;
    if (p_.prio[i]) ++remaining_prio_;
  }

  const Problem& p_;
  SearchBudget budget_;
  Assignment best_;
  Assignment cur_;
  std::vector<std::int64_t> free_;
  std::vector<bool> placed_ = std::vector<bool>(p_.n, false);
  std::int64_t cmax_ = 0, tard_ = 0, sum_start_ = 0;
  std::int64_t last_start_ = 0, barrier_ = 0, prio_end_ = 0;
  int last_batch_ = -1;
  bool has_last_ = false;
  int remaining_prio_ = 0;
  std::int64_t nodes_ = 0;
  bool aborted_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

OrderLineSchedule to_schedule(const Instance& inst, const Problem& p, const Assignment& a) {
  OrderLineSchedule s;
  for (int i = 0; i < p.n; ++i) {
    BatchPlacement bp;
    bp.batch_id = inst.batches[i].id;
    bp.line_id = inst.lines[a.line[i]];
    bp.start = a.start[i];
    bp.end = a.start[i] + p.dur[i][a.line[i]];
    s.placements.push_back(std::move(bp));
  }
  s.makespan = a.cmax;
  s.total_tardiness = a.tard;
  s.objective = a.z;
  return s;
}

}  // namespace

OrderLineSchedule left_justify(const Instance& instance, const ObjectiveWeights& weights,
                               const std::vector<std::vector<std::string>>& sequence_per_line) {
  const Problem p = make_problem(instance, weights);
  if (static_cast<int>(sequence_per_line.size()) != p.lines)
    throw DomainError("one sequence per line is required");
  Assignment a;
  a.line.assign(p.n, -1);
  a.start.assign(p.n, 0);
  auto index_of = [&](const std::string& id) {
    for (int i = 0; i < p.n; ++i)
      if (instance.batches[i].id == id) return i;
    throw DomainError("unknown batch '" + id + "'");
  };
  std::vector<std::vector<int>> seq(p.lines);
  for (int l = 0; l < p.lines; ++l) {
    bool seen_regular = false;
    for (const auto& id : sequence_per_line[l]) {
      const int i = index_of(id);
      if (a.line[i] >= 0) throw DomainError("batch '" + id + "' sequenced twice");
      if (p.dur[i][l] == kInadmissible) throw DomainError("batch '" + id + "' not admissible on its line");
      if (p.prio[i] && seen_regular) throw DomainError("priority batch sequenced after a non-priority batch");
      seen_regular = seen_regular || !p.prio[i];
      a.line[i] = l;
      seq[l].push_back(i);
    }
  }
  for (int i = 0; i < p.n; ++i)
    if (a.line[i] < 0) throw DomainError("batch '" + instance.batches[i].id + "' not sequenced");
  std::vector<std::int64_t> free(p.lines, 0);
  std::int64_t barrier = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (int l = 0; l < p.lines; ++l)
      for (int i : seq[l]) {
        if (p.prio[i] != (pass == 0)) continue;
        const std::int64_t s = pass == 0 ? free[l] : std::max(free[l], barrier);
        a.start[i] = s;
        free[l] = s + p.dur[i][l];
      }
    if (pass == 0)
      for (int i = 0; i < p.n; ++i)
        if (p.prio[i]) barrier = std::max(barrier, a.start[i] + p.dur[i][a.line[i]]);
  }
  for (int i = 0; i < p.n; ++i) {
    const std::int64_t e = a.start[i] + p.dur[i][a.line[i]];
    a.cmax = std::max(a.cmax, e);
    a.tard += std::max<std::int64_t>(0, e - p.due[i]);
    a.sum_start += a.start[i];
  }
  a.z = p.z(a.cmax, a.tard);
  a.valid = true;
  OrderLineSchedule s = to_schedule(instance, p, a);
  s.status = SolveStatus::feasible;
  return s;
}

OrderLineSchedule solve(const Instance& instance, const ObjectiveWeights& weights,
                        const SearchBudget& budget, std::uint64_t seed) {
  weights.validate();
  if (budget.time_limit.count() <= 0 || budget.node_limit <= 0)
    throw DomainError("search budget must be positive");
  if (instance.batches.empty()) {
    OrderLineSchedule empty;
    empty.status = SolveStatus::proven_optimal;
    return empty;
  }
  const Problem p = make_problem(instance, weights);

  // Initial incumbent from a handful of list-scheduling orders.
  std::vector<int> base_order(p.n);
  std::iota(base_order.begin(), base_order.end(), 0);
  auto prio_first = [&](std::vector<int> order) {
    std::stable_partition(order.begin(), order.end(), [&](int i) { return p.prio[i]; });
    return order;
  };
  auto min_dur = [&](int i) {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (auto d : p.dur[i])
      if (d != kInadmissible) m = std::min(m, d);
    return m;
  };
  std::vector<std::vector<int>> orders;
  auto by_due = base_order;
  std::stable_sort(by_due.begin(), by_due.end(), [&](int a, int b) { return p.due[a] < p.due[b]; });
  orders.push_back(prio_first(by_due));
  auto lpt = base_order;
  std::stable_sort(lpt.begin(), lpt.end(), [&](int a, int b) { return min_dur(a) > min_dur(b); });
  orders.push_back(prio_first(lpt));
  auto spt = base_order;
  std::stable_sort(spt.begin(), spt.end(), [&](int a, int b) { return min_dur(a) < min_dur(b); });
  orders.push_back(prio_first(spt));
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 8; ++k) {
    auto shuffled = base_order;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    orders.push_back(prio_first(shuffled));
  }
  Assignment incumbent;
  for (const auto& order : orders) {
    Assignment a = construct(p, order);
    if (better(p, a, incumbent)) incumbent = std::move(a);
  }

  BranchAndBound bnb(p, budget, incumbent);
  bnb.run();
  if (!bnb.best().valid) throw NoSolutionError("no solution within budget");
  OrderLineSchedule s = to_schedule(instance, p, bnb.best());
  s.status = bnb.aborted() ? SolveStatus::feasible : SolveStatus::proven_optimal;
  s.nodes = bnb.nodes();
  return s;
}

}  // namespace fairplan
