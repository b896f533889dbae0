#include "fairplan/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>

#include "fairplan/policy.hpp"

namespace fairplan {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

SolveResult finish(AllocationState state, Clock::time_point t0, std::string label) {
  SolveResult r;
  r.total_return = state.total_return();
  r.decision_steps = state.decision_steps();
  r.final_state = std::move(state);
  r.wall_ms = elapsed_ms(t0);
  r.strategy = std::move(label);
  return r;
}

int uniform_pick(const std::vector<int>& legal, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
  return legal[pick(rng)];
}

}  // namespace

std::vector<std::pair<int, double>> immediate_rewards(const AllocationState& state) {
  std::vector<std::pair<int, double>> out;
  for (int a : state.legal_actions()) {
    AllocationState probe = state;
    out.emplace_back(a, probe.apply(a));
  }
  return out;
}

int greedy_action(const AllocationState& state) {
  int best = -1;
  double best_r = -std::numeric_limits<double>::infinity();
  for (const auto& [a, r] : immediate_rewards(state))
    if (r > best_r) {
      best = a;
      best_r = r;
    }
  return best;
}

SolveResult greedy_solve(const AllocationState& start) {
  const auto t0 = Clock::now();
  AllocationState s = start;
  while (!s.terminal()) s.apply(greedy_action(s));
  return finish(std::move(s), t0, "greedy");
}

SolveResult random_solve(const AllocationState& start, std::uint64_t seed) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  AllocationState s = start;
  while (!s.terminal()) s.apply(uniform_pick(s.legal_actions(), rng));
  return finish(std::move(s), t0, "random");
}

namespace {

struct Node {
  AllocationState state;
  int parent = -1;
  int action = -1;
  std::vector<int> untried;
  std::vector<int> children;
  int visits = 0;
  double value_sum = 0.0;

  double mean() const { return visits ? value_sum / visits : 0.0; }
};

class Tree {
 public:
  Tree(const AllocationState& root, const MctsOptions& opt) : opt_(opt), rng_(opt.seed) {
    nodes_.push_back(make_node(root, -1, -1));
  }

  int root() const { return root_; }
  const Node& node(int i) const { return nodes_[i]; }

  void iterate() {
    int n = root_;
    while (!nodes_[n].state.terminal() && nodes_[n].untried.empty()) n = select(n);
    if (!nodes_[n].state.terminal()) n = expand(n);
    AllocationState sim = nodes_[n].state;
    while (!sim.terminal()) sim.apply(uniform_pick(sim.legal_actions(), rng_));
    // Full episode return: every node below the root shares the same prefix.
    const double value = sim.total_return();
    lo_ = std::min(lo_, value);
    hi_ = std::max(hi_, value);
    for (int k = n;; k = nodes_[k].parent) {
      ++nodes_[k].visits;
      nodes_[k].value_sum += value;
      if (k == root_) break;
    }
  }

  int commit() {
    const Node& r = nodes_[root_];
    int best = -1;
    for (int c : r.children) {
      if (nodes_[c].visits == 0) continue;
      if (best < 0) {
        best = c;
        continue;
      }
      const Node& a = nodes_[c];
      const Node& b = nodes_[best];
      if (a.visits != b.visits ? a.visits > b.visits
                               : a.mean() != b.mean() ? a.mean() > b.mean() : a.action < b.action)
        best = c;
    }
    return best;
  }

  // The committed child's subtree and statistics carry over to the next step.
  void reroot(int child) { root_ = child; }

 private:
  Node make_node(const AllocationState& s, int parent, int action) {
    Node n;
    n.state = s;
    n.parent = parent;
    n.action = action;
    n.untried = s.legal_actions();
    return n;
  }

  double normalized(double v) const {
    if (!(hi_ > lo_)) return 0.5;
    return (v - lo_) / (hi_ - lo_);
  }

  int select(int n) {
    const Node& p = nodes_[n];
    const double log_n = std::log(static_cast<double>(std::max(p.visits, 1)));
    int best = -1;
    double best_u = -std::numeric_limits<double>::infinity();
    for (int c : p.children) {
      const Node& ch = nodes_[c];
      const double u = normalized(ch.mean()) + opt_.exploration * std::sqrt(log_n / ch.visits);
      if (u > best_u) {
        best_u = u;
        best = c;
      }
    }
    return best;
  }

  int expand(int n) {
    auto& untried = nodes_[n].untried;
    std::uniform_int_distribution<std::size_t> pick(0, untried.size() - 1);
    const std::size_t k = pick(rng_);
    const int action = untried[k];
    untried.erase(untried.begin() + static_cast<std::ptrdiff_t>(k));
    AllocationState s = nodes_[n].state;
    s.apply(action);
    nodes_.push_back(make_node(s, n, action));
    const int id = static_cast<int>(nodes_.size()) - 1;
    // Children stay sorted by action so selection ties resolve to the lowest index.
    auto& kids = nodes_[n].children;
    kids.insert(std::lower_bound(kids.begin(), kids.end(), id,
                                 [&](int x, int y) { return nodes_[x].action < nodes_[y].action; }),
                id);
    return id;
  }

  MctsOptions opt_;
  std::mt19937_64 rng_;
  std::vector<Node> nodes_;
  int root_ = 0;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

SolveResult mcts_solve(const AllocationState& start, const MctsOptions& options) {
  if (options.rollouts_per_step < 1) throw DomainError("rollouts_per_step must be at least 1");
  const auto t0 = Clock::now();
  Tree tree(start, options);
  while (!tree.node(tree.root()).state.terminal()) {
    for (int i = 0; i < options.rollouts_per_step; ++i) tree.iterate();
    tree.reroot(tree.commit());
  }
  return finish(tree.node(tree.root()).state, t0, "mcts");
}

SolveResult rl_solve(const AllocationState& start, const LinearPolicy& policy) {
  const auto t0 = Clock::now();
  AllocationState s = start;
  while (!s.terminal()) s.apply(policy.best_action(s));
  return finish(std::move(s), t0, "rl");
}

}  // namespace fairplan
