#include "fairplan/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairplan {

void RewardConfig::validate() const {
  for (double w : {w_pi, w_rho, w_xi, w_fair})
    if (!std::isfinite(w) || w < 0.0) throw DomainError("reward weights must be finite and non-negative");
}

int flatten(int r_idx, int w_idx, int n_rows, int n_workers) {
  if (r_idx < 0 || r_idx >= n_rows || w_idx < 0 || w_idx >= n_workers)
    throw DomainError("row/worker index out of range");
  return r_idx * n_workers + w_idx;
}

std::pair<int, int> unflatten(int action, int n_rows, int n_workers) {
  if (n_workers <= 0 || action < 0 || action >= n_rows * n_workers)
    throw DomainError("action " + std::to_string(action) + " out of range");
  return {action / n_workers, action % n_workers};
}

double fairness_score(const std::vector<std::vector<double>>& preferences) {
  std::vector<double> means;
  for (const auto& p : preferences) {
    if (p.empty()) continue;
    double s = 0.0;
    for (double v : p) s += v;
    means.push_back(s / static_cast<double>(p.size()));
  }
  if (means.empty()) throw DomainError("fairness needs at least one worker with an assignment");
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(means.size());
  return std::clamp(1.0 - 4.0 * var, 0.0, 1.0);
}

std::shared_ptr<const EpisodeModel> build_model(const std::vector<TimeInterval>& intervals,
                                                const Instance& instance, const RewardConfig& config,
                                                const EnvOptions& options) {
  config.validate();
  auto m = std::make_shared<EpisodeModel>();
  m->intervals = intervals;
  m->config = config;
  m->options = options;
  for (const auto& w : instance.workers) m->workers.push_back(w.id);

  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    const int begin = m->n_rows();
    for (const auto& slot : iv.rows) {
      RowInfo row;
      row.slot = slot;
      row.interval = static_cast<int>(i);
      row.start = iv.start;
      row.end = iv.end;
      row.line_index = instance.line_index(slot.line_id);
      m->rows.push_back(std::move(row));
      m->n_slots += slot.required;
    }
    m->interval_rows.emplace_back(begin, m->n_rows());
  }

  for (auto& row : m->rows) {
    const std::size_t next = static_cast<std::size_t>(row.interval) + 1;
    if (next >= intervals.size() || intervals[next].start != row.end) continue;
    for (int r = m->interval_rows[next].first; r < m->interval_rows[next].second; ++r) {
      const SlotRow& cand = m->rows[r].slot;
      if (cand.line_id != row.slot.line_id) continue;
      if (options.continuity == Continuity::line_and_geometry && cand.geometry_id != row.slot.geometry_id)
        continue;
      row.next_row = r;
    }
  }

  m->cells.resize(static_cast<std::size_t>(m->n_rows()) * m->workers.size());
  for (int r = 0; r < m->n_rows(); ++r) {
    const RowInfo& row = m->rows[r];
    const Shift shift = shift_at(row.start, instance.calendar);
    for (int w = 0; w < m->n_workers(); ++w) {
      const Worker& worker = instance.workers[w];
      const TaskFactors f = instance.factors.lookup(worker.id, row.slot.line_id, row.slot.geometry_id);
      Cell& c = m->cells[static_cast<std::size_t>(r) * m->workers.size() + w];
      c.alpha = worker.available(shift);
      c.mu = f.medical;
      if (c.mu) {
        c.pi = f.preference;
        c.rho = f.resilience;
        c.xi = f.experience;
      }
    }
  }
  m->fair_star = config.fair_star(m->n_slots);
  return m;
}

AllocationState::AllocationState(std::shared_ptr<const EpisodeModel> model) : model_(std::move(model)) {
  const auto rows = static_cast<std::size_t>(model_->n_rows());
  const auto workers = model_->workers.size();
  sigma_.assign(rows * workers, 0);
  alloc_.assign(rows, 0);
  done_.assign(rows, 0);
  busy_.assign(model_->interval_rows.size() * workers, 0);
  pi_sum_.assign(workers, 0.0);
  count_.assign(workers, 0);
  for (std::size_t i = 0; i < model_->interval_rows.size(); ++i) refresh_done(static_cast<int>(i));
  active_ = 0;
  advance();
}

bool AllocationState::eligible(int r, int w) const {
  const Cell& c = model_->cell(r, w);
  return c.alpha && c.mu && !busy(model_->rows[r].interval, w);
}

void AllocationState::refresh_done(int interval) {
  const auto [begin, end] = model_->interval_rows[interval];
  for (int r = begin; r < end; ++r) {
    if (done_[r]) continue;
    bool open = alloc_[r] < model_->rows[r].slot.required;
    if (open) {
      open = false;
      for (int w = 0; w < model_->n_workers() && !open; ++w) open = eligible(r, w);
    }
    done_[r] = open ? 0 : 1;
  }
}

void AllocationState::advance() {
  const int n = static_cast<int>(model_->interval_rows.size());
  for (int i = std::max(active_, 0); i < n; ++i) {
    const auto [begin, end] = model_->interval_rows[i];
    for (int r = begin; r < end; ++r)
      if (!done_[r]) {
        active_ = i;
        return;
      }
  }
  active_ = -1;
}

std::vector<bool> AllocationState::action_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(model_->n_actions()), false);
  for (int a : legal_actions()) mask[a] = true;
  return mask;
}

std::vector<int> AllocationState::legal_actions() const {
  std::vector<int> out;
  if (terminal()) return out;
  const auto [begin, end] = model_->interval_rows[active_];
  for (int r = begin; r < end; ++r) {
    if (done_[r]) continue;
    for (int w = 0; w < model_->n_workers(); ++w)
      if (eligible(r, w)) out.push_back(r * model_->n_workers() + w);
  }
  return out;
}

bool AllocationState::is_legal(int action) const {
  if (terminal() || action < 0 || action >= model_->n_actions()) return false;
  const int r = action / model_->n_workers(), w = action % model_->n_workers();
  return model_->rows[r].interval == active_ && !done_[r] && eligible(r, w);
}

double AllocationState::assign(int r, int w) {
  const Cell& c = model_->cell(r, w);
  sigma_[idx(r, w)] = 1;
  ++alloc_[r];
  busy_[static_cast<std::size_t>(model_->rows[r].interval) * model_->workers.size() + w] = 1;
  pi_sum_[w] += c.pi;
  ++count_[w];
  const RewardConfig& cfg = model_->config;
  const double dense = cfg.w_pi * c.pi + cfg.w_rho * c.rho + cfg.w_xi * c.xi;
  dense_return_ += dense;
  return dense;
}

double AllocationState::apply(int action) {
  if (!is_legal(action)) throw IllegalActionError("action " + std::to_string(action) + " is masked out");
  const int r = action / model_->n_workers(), w = action % model_->n_workers();
  double reward = assign(r, w);
  int cascaded = 0;
  refresh_done(model_->rows[r].interval);
  // Continuation: follow the same worker forward while line (and geometry) repeat.
  for (int nx = model_->rows[r].next_row; nx >= 0; nx = model_->rows[nx].next_row) {
    if (alloc_[nx] >= model_->rows[nx].slot.required || !eligible(nx, w)) break;
    reward += assign(nx, w);
    ++cascaded;
    refresh_done(model_->rows[nx].interval);
  }
  continuations_ += cascaded;
  ++decision_steps_;
  advance();
  if (terminal()) {
    fairness_return_ = model_->fair_star * fairness();
    reward += fairness_return_;
  }
  if (model_->options.record_trace) trace_.push_back({decision_steps_, action, r, w, reward, cascaded});
  return reward;
}

int AllocationState::unfilled_slots() const {
  int n = 0;
  for (int r = 0; r < model_->n_rows(); ++r)
    if (done_[r]) n += model_->rows[r].slot.required - alloc_[r];
  return n;
}

double AllocationState::fairness() const {
  std::vector<std::vector<double>> means;
  for (std::size_t w = 0; w < count_.size(); ++w)
    if (count_[w] > 0) means.push_back({pi_sum_[w] / count_[w]});
  return fairness_score(means);
}

std::vector<double> AllocationState::mean_preference() const {
  std::vector<double> out(count_.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t w = 0; w < count_.size(); ++w)
    if (count_[w] > 0) out[w] = pi_sum_[w] / count_[w];
  return out;
}

std::vector<Assignment> AllocationState::assignments() const {
  std::vector<Assignment> out;
  for (int r = 0; r < model_->n_rows(); ++r)
    for (int w = 0; w < model_->n_workers(); ++w)
      if (sigma_[idx(r, w)]) out.push_back({r, w});
  return out;
}

std::vector<double> AllocationState::observation() const {
  const int nw = model_->n_workers();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(model_->n_rows()) * (kRowHeader + kWorkerColumns * nw));
  for (int r = 0; r < model_->n_rows(); ++r) {
    const RowInfo& row = model_->rows[r];
    out.push_back(row.interval + 1);
    out.push_back(static_cast<double>(row.start));
    out.push_back(static_cast<double>(row.end));
    out.push_back(row.line_index);
    out.push_back(row.slot.required);
    out.push_back(alloc_[r]);
    out.push_back(done_[r]);
    for (int w = 0; w < nw; ++w) {
      const Cell& c = model_->cell(r, w);
      out.push_back(c.alpha ? 1.0 : 0.0);
      out.push_back(c.mu ? 1.0 : 0.0);
      out.push_back(c.pi);
      out.push_back(c.rho);
      out.push_back(c.xi);
      out.push_back(sigma_[idx(r, w)]);
    }
  }
  return out;
}

AllocationState reset(const std::vector<TimeInterval>& intervals, const Instance& instance,
                      const RewardConfig& config, const EnvOptions& options) {
  return AllocationState(build_model(intervals, instance, config, options));
}

StepOutcome step(const AllocationState& state, int action) {
  StepOutcome out{state, 0.0, false};
  out.reward = out.next.apply(action);
  out.terminal = out.next.terminal();
  return out;
}

double reward(const AllocationState& state, int action, const AllocationState& next) {
  const EpisodeModel& m = state.model();
  const auto [r, w] = unflatten(action, m.n_rows(), m.n_workers());
  if (state.sigma(r, w) || !next.sigma(r, w)) throw DomainError("action is not the transition between the states");
  double total = 0.0;
  for (int row = 0; row < m.n_rows(); ++row)
    for (int k = 0; k < m.n_workers(); ++k)
      if (next.sigma(row, k) && !state.sigma(row, k)) {
        const Cell& c = m.cell(row, k);
        total += m.config.w_pi * c.pi + m.config.w_rho * c.rho + m.config.w_xi * c.xi;
      }
  if (next.terminal() && !state.terminal()) total += m.fair_star * next.fairness();
  return total;
}

}  // namespace fairplan
