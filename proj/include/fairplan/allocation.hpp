#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fairplan/decomposition.hpp"
#include "fairplan/instance.hpp"

namespace fairplan {

/// R = w_pi*pi + w_rho*rho + w_xi*xi per assignment, plus
/// N_slots * w_fair * S_fair once the episode terminates. No discounting.
struct RewardConfig {
  double w_pi = 1.0;
  double w_rho = 1.0;
  double w_xi = 1.0;
  double w_fair = 1.0;

  void validate() const;
  double fair_star(int n_slots) const { return w_fair * n_slots; }

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

enum class Continuity {
  line_and_geometry,  // carry a worker forward only when line and geometry both repeat
  line_only,
};

struct EnvOptions {
  Continuity continuity = Continuity::line_and_geometry;
  bool record_trace = true;
};

class IllegalActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int flatten(int r_idx, int w_idx, int n_rows, int n_workers);
std::pair<int, int> unflatten(int action, int n_rows, int n_workers);

/// S_fair = 1 - 4 * variance of per-worker mean preference. Workers with an
/// empty list are left out; throws DomainError if every list is empty.
double fairness_score(const std::vector<std::vector<double>>& preferences);

/// Row-by-worker cell as read from the state table. Preference, resilience
/// and experience read 0 when the worker is not medically cleared.
struct Cell {
  bool alpha = false;
  bool mu = false;
  double pi = 0.0;
  double rho = 0.0;
  double xi = 0.0;
};

struct RowInfo {
  SlotRow slot;
  int interval = 0;  // 0-based position in the interval list
  SolverMinute start = 0;
  SolverMinute end = 0;
  int line_index = 0;
  int next_row = -1;  // continuation target in the following interval
};

/// Immutable part of an episode, shared between all states derived from it.
struct EpisodeModel {
  std::vector<RowInfo> rows;
  std::vector<std::pair<int, int>> interval_rows;  // [begin, end) row range per interval
  std::vector<TimeInterval> intervals;
  std::vector<std::string> workers;
  std::vector<Cell> cells;  // rows x workers, row-major
  RewardConfig config;
  EnvOptions options;
  int n_slots = 0;
  double fair_star = 0.0;

  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_workers() const { return static_cast<int>(workers.size()); }
  int n_actions() const { return n_rows() * n_workers(); }
  const Cell& cell(int r, int w) const { return cells[static_cast<std::size_t>(r) * workers.size() + w]; }
};

struct TraceEntry {
  int step = 0;
  int action = 0;
  int r_idx = 0;
  int w_idx = 0;
  double reward = 0.0;
  int continuations = 0;
};

struct Assignment {
  int r_idx = 0;
  int w_idx = 0;
};

class AllocationState {
 public:
  AllocationState() = default;
  explicit AllocationState(std::shared_ptr<const EpisodeModel> model);

  const EpisodeModel& model() const { return *model_; }
  std::shared_ptr<const EpisodeModel> model_ptr() const { return model_; }

  bool terminal() const { return active_ < 0; }
  int active_interval() const { return active_; }  // 0-based, -1 once terminal
  bool sigma(int r, int w) const { return sigma_[idx(r, w)] != 0; }
  int allocated(int r) const { return alloc_[r]; }
  bool done(int r) const { return done_[r] != 0; }
  bool eligible(int r, int w) const;

  std::vector<bool> action_mask() const;
  std::vector<int> legal_actions() const;  // ascending
  bool is_legal(int action) const;

  /// Applies a legal action in place and returns its reward.
  double apply(int action);

  int decision_steps() const { return decision_steps_; }
  int continuation_assignments() const { return continuations_; }
  int unfilled_slots() const;  // required minus allocated over Done rows
  double dense_return() const { return dense_return_; }
  double fairness_return() const { return fairness_return_; }
  double total_return() const { return dense_return_ + fairness_return_; }
  /// Fairness of the current assignment profile; throws when nobody is assigned.
  double fairness() const;
  std::vector<Assignment> assignments() const;  // row-major order
  const std::vector<TraceEntry>& trace() const { return trace_; }

  /// Mean assigned preference per worker; NaN for workers with no assignment.
  std::vector<double> mean_preference() const;
  std::vector<int> assignment_counts() const { return count_; }

  /// Flattened numeric view, row-major: per row
  /// [interval, start, end, line, required, allocated, done] followed by
  /// (alpha, mu, pi, rho, xi, sigma) for every worker.
  std::vector<double> observation() const;
  static constexpr int kRowHeader = 7;
  static constexpr int kWorkerColumns = 6;

 private:
  std::size_t idx(int r, int w) const { return static_cast<std::size_t>(r) * model_->workers.size() + w; }
  bool busy(int interval, int w) const { return busy_[static_cast<std::size_t>(interval) * model_->workers.size() + w] != 0; }
  double assign(int r, int w);
  void refresh_done(int interval);
  void advance();

  std::shared_ptr<const EpisodeModel> model_;
  std::vector<std::uint8_t> sigma_;
  std::vector<int> alloc_;
  std::vector<std::uint8_t> done_;
  std::vector<std::uint8_t> busy_;  // intervals x workers
  std::vector<double> pi_sum_;
  std::vector<int> count_;
  int active_ = -1;
  int decision_steps_ = 0;
  int continuations_ = 0;
  double dense_return_ = 0.0;
  double fairness_return_ = 0.0;
  std::vector<TraceEntry> trace_;
};

struct StepOutcome {
  AllocationState next;
  double reward = 0.0;
  bool terminal = false;
};

std::shared_ptr<const EpisodeModel> build_model(const std::vector<TimeInterval>& intervals,
                                                const Instance& instance, const RewardConfig& config,
                                                const EnvOptions& options = {});

/// Initial state: nothing assigned, active interval at the first one with open rows.
AllocationState reset(const std::vector<TimeInterval>& intervals, const Instance& instance,
                      const RewardConfig& config, const EnvOptions& options = {});

/// Pure transition; throws IllegalActionError for masked-out actions.
StepOutcome step(const AllocationState& state, int action);

/// Reward recomputed from the difference between two states.
double reward(const AllocationState& state, int action, const AllocationState& next);

}  // namespace fairplan
