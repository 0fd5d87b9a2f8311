#pragma once

#include "wrsf/step_function.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace wrsf {

// How a hazard curve is reduced to the scalar that concordance comparisons
// use. `sample` evaluates the curve at the sample's own observed time; `grid`
// sums the curve over a fixed time grid (typically the training event times),
// which is the usual risk-score reading.
enum class TimePolicyKind { sample, grid };

struct TimePolicy {
  TimePolicyKind kind = TimePolicyKind::sample;
  Eigen::VectorXd grid_times;  // required (nonempty) for the grid policy

  static TimePolicy at_sample_times() { return {}; }

  static TimePolicy on_grid(Eigen::VectorXd times) {
    if (times.size() == 0)
      throw std::invalid_argument("TimePolicy::on_grid: grid must be nonempty");
    TimePolicy p;
    p.kind = TimePolicyKind::grid;
    p.grid_times = std::move(times);
    return p;
  }
};

inline double policy_value(const StepFunction& chf, double sample_time, const TimePolicy& policy) {
  if (policy.kind == TimePolicyKind::sample) return chf(sample_time);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < policy.grid_times.size(); ++k) sum += chf(policy.grid_times[k]);
  return sum;
}

inline std::string to_string(TimePolicyKind kind) {
  return kind == TimePolicyKind::sample ? "sample" : "grid";
}

}  // namespace wrsf
