#include "fairplan/generator.hpp"

#include <cmath>
#include <random>

namespace fairplan {
namespace {

template <typename T>
void check_range(const Range<T>& r, const char* name, T floor) {
  if (r.lo > r.hi || r.lo < floor) throw DomainError(std::string("invalid range for ") + name);
}

std::string numbered(char prefix, int i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

}  // namespace

void GeneratorConfig::validate() const {
  check_range(batches, "batches", 1);
  check_range(lines, "lines", 1);
  check_range(workers, "workers", 1);
  check_range(quantity, "quantity", std::int64_t{1});
  check_range(rate, "rate", 1e-9);
  check_range(setup, "setup", std::int64_t{0});
  check_range(required_workers, "required_workers", 1);
  for (double p : {admissible_probability, medical_probability, priority_probability, second_shift_probability})
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probabilities must lie in [0, 1]");
  if (!(due_tightness >= 1.0)) throw DomainError("due tightness must be at least 1");
  if (horizon_days < 1) throw DomainError("horizon_days must be at least 1");
}

Instance generate(const GeneratorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  auto integer = [&](auto lo, auto hi) {
    return std::uniform_int_distribution<decltype(lo + hi)>(lo, hi)(rng);
  };
  auto real = [&](double lo, double hi) { return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  // Factors are rounded to two decimals so fixtures read like survey data.
  auto unit = [&]() { return std::round(real(0.0, 1.0) * 100.0) / 100.0; };

  Instance inst;
  inst.calendar.reference = cfg.reference;
  inst.calendar.horizon_days = cfg.horizon_days;

  const int n_lines = integer(cfg.lines.lo, cfg.lines.hi);
  for (int l = 1; l <= n_lines; ++l) inst.lines.push_back(numbered('l', l, 1));

  const int n_batches = integer(cfg.batches.lo, cfg.batches.hi);
  for (int g = 1; g <= n_batches; ++g) {
    GeometryBatch b;
    b.geometry_id = numbered('g', g, 1);
    b.order_id = numbered('o', (g + 1) / 2, 1);
    b.id = b.order_id + "/" + b.geometry_id;
    b.quantity = integer(cfg.quantity.lo, cfg.quantity.hi);
    b.priority = coin(cfg.priority_probability);
    for (const auto& line : inst.lines)
      if (coin(cfg.admissible_probability)) b.options[line] = {};
    if (b.options.empty()) b.options[inst.lines[integer(0, n_lines - 1)]] = {};
    std::int64_t fastest = -1;
    for (auto& [line, opt] : b.options) {
      opt.setup_minutes = integer(cfg.setup.lo, cfg.setup.hi);
      opt.rate = std::round(real(cfg.rate.lo, cfg.rate.hi) * 100.0) / 100.0;
      if (opt.rate <= 0.0) opt.rate = cfg.rate.hi;
      opt.required_workers = integer(cfg.required_workers.lo, cfg.required_workers.hi);
      const std::int64_t d = duration(b, line);
      fastest = fastest < 0 ? d : std::min(fastest, d);
    }
    b.due_date = static_cast<SolverMinute>(std::ceil(cfg.due_tightness * static_cast<double>(fastest)));
    inst.batches.push_back(std::move(b));
  }

  const int n_workers = integer(cfg.workers.lo, cfg.workers.hi);
  const int width = n_workers >= 100 ? 3 : 2;
  for (int w = 1; w <= n_workers; ++w) {
    Worker worker;
    worker.id = numbered('w', w, width);
    const auto first = static_cast<ShiftLabel>(integer(0, 2));
    worker.shifts.insert(first);
    if (coin(cfg.second_shift_probability)) worker.shifts.insert(static_cast<ShiftLabel>((static_cast<int>(first) + 1) % 3));
    inst.factors.set_resilience(worker.id, unit());
    inst.workers.push_back(std::move(worker));
  }
  for (const auto& worker : inst.workers)
    for (const auto& b : inst.batches)
      for (const auto& [line, opt] : b.options) {
        HumanFactorTable::TaskEntry e;
        e.medical = coin(cfg.medical_probability);
        e.preference = unit();
        e.experience = unit();
        inst.factors.set_task(worker.id, line, b.geometry_id, e);
      }
  validate(inst);
  return inst;
}

}  // namespace fairplan
