#pragma once

#include <cstdint>
#include <utility>

#include "fairplan/instance.hpp"

namespace fairplan {

template <typename T>
struct Range {
  T lo;
  T hi;
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  Range<int> batches{3, 6};
  Range<int> lines{1, 3};
  Range<int> workers{4, 8};
  Range<std::int64_t> quantity{100, 2000};
  Range<double> rate{2.0, 20.0};  // units per minute
  Range<std::int64_t> setup{0, 60};
  Range<int> required_workers{1, 3};
  double admissible_probability = 0.6;  // per (batch, line); at least one line is always kept
  double medical_probability = 0.8;
  double priority_probability = 0.2;
  double second_shift_probability = 0.1;
  double due_tightness = 1.5;  // due >= tightness * fastest duration
  EpochSeconds reference = 1694412000;  // Monday 2023-09-11 06:00
  int horizon_days = 5;

  void validate() const;
};

/// Seeded instance; identical configs give identical instances.
Instance generate(const GeneratorConfig& config);

}  // namespace fairplan
