#include "fairplan/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fairplan {

const std::vector<std::string>& LinearPolicy::feature_names() {
  static const std::vector<std::string> names = {
      "bias",  "pi",           "rho",           "xi",        "dense_reward",
      "fairness_gain", "continuation", "worker_load", "row_fill", "worker_options",
  };
  return names;
}

LinearPolicy::LinearPolicy(std::vector<double> theta) : theta_(std::move(theta)) {
  if (theta_.size() != static_cast<std::size_t>(kFeatures))
    throw DomainError("policy expects " + std::to_string(kFeatures) + " parameters");
}

std::vector<double> LinearPolicy::features(const AllocationState& s, int action) {
  const EpisodeModel& m = s.model();
  const auto [r, w] = unflatten(action, m.n_rows(), m.n_workers());
  const Cell& c = m.cell(r, w);
  const RewardConfig& cfg = m.config;

  // Change in the squared distance of this worker's mean preference from the
  // current global mean, negated so that evening out scores positive.
  const auto means = s.mean_preference();
  const auto counts = s.assignment_counts();
  double g = 0.0;
  int k = 0;
  for (double v : means)
    if (!std::isnan(v)) {
      g += v;
      ++k;
    }
  g = k ? g / k : c.pi;
  const double old_dev = counts[w] ? (means[w] - g) * (means[w] - g) : 0.0;
  const double new_mean = counts[w] ? (means[w] * counts[w] + c.pi) / (counts[w] + 1) : c.pi;
  const double fairness_gain = old_dev - (new_mean - g) * (new_mean - g);

  int chain = 0;
  for (int nx = m.rows[r].next_row; nx >= 0; nx = m.rows[nx].next_row) {
    if (s.allocated(nx) >= m.rows[nx].slot.required || !s.eligible(nx, w)) break;
    ++chain;
  }

  const auto [begin, end] = m.interval_rows[m.rows[r].interval];
  int options = 0;
  for (int row = begin; row < end; ++row)
    if (!s.done(row) && s.eligible(row, w)) ++options;

  const int required = std::max(m.rows[r].slot.required, 1);
  return {
      1.0,
      c.pi,
      c.rho,
      c.xi,
      cfg.w_pi * c.pi + cfg.w_rho * c.rho + cfg.w_xi * c.xi,
      cfg.w_fair * fairness_gain * 4.0,
      chain / 4.0,
      counts[w] / 10.0,
      static_cast<double>(s.allocated(r)) / required,
      static_cast<double>(options) / std::max(end - begin, 1),
  };
}

double LinearPolicy::score(const AllocationState& state, int action) const {
  const auto phi = features(state, action);
  double z = 0.0;
  for (int i = 0; i < kFeatures; ++i) z += theta_[i] * phi[i];
  return z;
}

std::vector<double> LinearPolicy::probabilities(const AllocationState& state) const {
  const auto legal = state.legal_actions();
  std::vector<double> p(legal.size());
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < legal.size(); ++i) {
    p[i] = score(state, legal[i]);
    hi = std::max(hi, p[i]);
  }
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

int LinearPolicy::best_action(const AllocationState& state) const {
  int best = -1;
  double best_s = -std::numeric_limits<double>::infinity();
  for (int a : state.legal_actions()) {
    const double sc = score(state, a);
    if (sc > best_s) {
      best_s = sc;
      best = a;
    }
  }
  return best;
}

std::string LinearPolicy::to_json() const {
  nlohmann::json j;
  j["format"] = "fairplan-linear-policy";
  j["version"] = 1;
  j["features"] = feature_names();
  j["parameters"] = theta_;
  return j.dump(2);
}

LinearPolicy LinearPolicy::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("policy document does not parse: ") + e.what());
  }
  if (j.value("format", "") != "fairplan-linear-policy") throw DomainError("not a policy document");
  if (j.value("version", 0) != 1) throw DomainError("unsupported policy version");
  if (j.at("features").get<std::vector<std::string>>() != feature_names())
    throw DomainError("policy feature layout does not match");
  return LinearPolicy(j.at("parameters").get<std::vector<double>>());
}

TrainResult rl_train(const EpisodeGenerator& generator, const TrainOptions& options) {
  if (options.total_steps < 0 || !(options.learning_rate > 0.0))
    throw DomainError("training needs non-negative steps and a positive learning rate");
  TrainResult out;
  std::vector<double> theta(LinearPolicy::kFeatures, 0.0);
  std::vector<double> baseline;  // running mean return-to-go per step index
  std::vector<int> baseline_n;
  double adv_sq = 0.0;
  std::int64_t adv_n = 0;
  std::mt19937_64 rng(options.seed);
  std::int64_t steps = 0;
  double window_sum = 0.0;
  int window_n = 0;

  int idle = 0;
  for (std::uint64_t ep = 0; steps < options.total_steps; ++ep) {
    AllocationState s = generator(options.seed * 1'000'003ULL + ep);
    if (s.terminal()) {
      if (++idle > 1000) throw DomainError("episode generator yields no decisions");
      continue;
    }
    idle = 0;
    LinearPolicy policy(theta);
    std::vector<std::vector<double>> grads;
    std::vector<double> rewards;
    while (!s.terminal()) {
      const auto legal = s.legal_actions();
      const auto p = policy.probabilities(s);
      std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
      const std::size_t choice = pick(rng);
      // grad log pi(a|s) = phi(a) - E_p[phi]
      std::vector<double> g = LinearPolicy::features(s, legal[choice]);
      for (std::size_t i = 0; i < legal.size(); ++i) {
        const auto phi = LinearPolicy::features(s, legal[i]);
        for (int f = 0; f < LinearPolicy::kFeatures; ++f) g[f] -= p[i] * phi[f];
      }
      grads.push_back(std::move(g));
      rewards.push_back(s.apply(legal[choice]));
      ++steps;
    }

    const std::size_t T = rewards.size();
    std::vector<double> adv(T);
    double togo = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      togo += rewards[t];
      if (baseline.size() <= t) {
        baseline.resize(t + 1, 0.0);
        baseline_n.resize(t + 1, 0);
      }
      adv[t] = togo - (baseline_n[t] ? baseline[t] : togo);
      ++baseline_n[t];
      baseline[t] += (togo - baseline[t]) / baseline_n[t];
    }
    // One running scale across episodes; a per-episode scale would weight
    // short episodes differently from long ones and bias the update.
    for (double a : adv) {
      ++adv_n;
      adv_sq += (a * a - adv_sq) / static_cast<double>(adv_n);
    }
    const double sd = std::sqrt(adv_sq);
    for (std::size_t t = 0; t < T; ++t) {
      const double a = sd > 1e-12 ? adv[t] / sd : adv[t];
      for (int f = 0; f < LinearPolicy::kFeatures; ++f)
        theta[f] += options.learning_rate * a * grads[t][f] / static_cast<double>(T);
    }
    for (double v : theta)
      if (!std::isfinite(v)) throw TrainingError("policy parameters diverged", steps);

    ++out.episodes;
    window_sum += s.total_return();
    ++window_n;
    if (window_n >= options.log_every_episodes || steps >= options.total_steps) {
      out.curve.push_back({steps, window_sum / window_n});
      window_sum = 0.0;
      window_n = 0;
    }
  }
  out.policy = LinearPolicy(theta);
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "step,mean_return\n";
  for (const auto& p : curve) os << p.step << ',' << p.mean_return << '\n';
  return os.str();
}

}  // namespace fairplan
