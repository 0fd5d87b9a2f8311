#include "wrsf/synthetic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wrsf/rng.hpp"

namespace wrsf::data {

SurvivalDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("make_synthetic: need at least one sample");
  if (spec.features < 1) throw std::invalid_argument("make_synthetic: need at least one feature");
  if (!(spec.censoring >= 0.0 && spec.censoring < 1.0))
    throw std::invalid_argument("make_synthetic: censoring probability must lie in [0, 1), got " +
                                std::to_string(spec.censoring));

  SurvivalDataset ds;
  ds.feature_names.reserve(static_cast<std::size_t>(spec.features));
  for (int k = 0; k < spec.features; ++k) {
    ds.feature_names.push_back("x" + std::to_string(k));
    ds.feature_kinds.push_back(FeatureKind::numeric);
  }

  // With censor rate = event rate * c/(1-c), the probability the censoring
  // clock rings first is exactly c for every sample.
  const double censor_ratio = spec.censoring / (1.0 - spec.censoring);

  Rng rng(spec.seed);
  ds.samples.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    Sample s;
    s.features.resize(spec.features);
    double risk = 0.0;
    for (int k = 0; k < spec.features; ++k) {
      s.features[k] = rng.next_normal();
      risk += s.features[k] / static_cast<double>(k + 1);
    }
    const double event_rate = std::exp(risk);
    const double event_time = rng.next_exponential(event_rate);
    double censor_time = std::numeric_limits<double>::infinity();
    if (censor_ratio > 0.0) censor_time = rng.next_exponential(event_rate * censor_ratio);
    s.event = event_time <= censor_time;
    s.time = s.event ? event_time : censor_time;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace wrsf::data
