#pragma once

#include <cstdint>

#include "wrsf/dataset.hpp"

namespace wrsf::data {

// Proportional-hazards simulator with a known risk ordering, used by oracle
// tests and exposed through the CLI. Features are standard normal; sample i's
// event time is exponential with rate exp(beta . x_i) where beta_k = 1/(k+1),
// so earlier features carry more risk. An independent exponential censoring
// time is drawn with rate chosen so each sample is censored with probability
// `censoring` exactly.
struct SyntheticSpec {
  int n = 100;
  int features = 5;
  double censoring = 0.3;  // per-sample censoring probability, in [0, 1)
  std::uint64_t seed = 1;
};

SurvivalDataset make_synthetic(const SyntheticSpec& spec);

}  // namespace wrsf::data
