#pragma once

#include <Eigen/Core>

#include <vector>

namespace wrsf {

// Right-continuous nondecreasing step function that is 0 before its first
// knot. Represents cumulative hazard curves H(t); the survival curve follows
// as exp(-H(t)). An empty function is the constant 0.
struct StepFunction {
  Eigen::VectorXd knots;   // strictly increasing
  Eigen::VectorXd values;  // nondecreasing, values[0] >= 0

  // Value at t: values[k] for the largest knot <= t, 0 below the first knot.
  double operator()(double t) const;

  bool empty() const { return knots.size() == 0; }
};

// Pointwise sum of coeffs[s] * (*sources[s]) represented on the union of all
// knot sets. At every union knot the contributions are added in source order,
// so the result is a pure function of (sources, coeffs) — reassociation never
// depends on thread scheduling. With nonnegative coefficients the output is
// nondecreasing: floating-point rounding is monotone, so ordered partial sums
// of pointwise-nondecreasing terms stay nondecreasing.
StepFunction combine_step_functions(const std::vector<const StepFunction*>& sources,
                                    const Eigen::VectorXd& coeffs);

}  // namespace wrsf
