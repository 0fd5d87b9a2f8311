#pragma once

#include "wrsf/dataset.hpp"
#include "wrsf/forest.hpp"
#include "wrsf/policy.hpp"
#include "wrsf/step_function.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace wrsf::weights {

using data::PairSet;
using data::SurvivalDataset;
using ensemble::Forest;
using ensemble::GroupedForest;

// Nonnegative entries summing to 1 (a point on the unit simplex).
using WeightVector = Eigen::VectorXd;

// Clips roundoff-negative entries (>= -1e-12) to zero and verifies the
// simplex invariants; throws when they fail beyond tolerance.
WeightVector sanitize_weight_vector(WeightVector w);

// Per-pair differences of per-source hazard values, the data of the weight
// optimization: row r is value(i_r) - value(j_r) across sources, where
// value() reduces a hazard curve to a scalar under the evaluation-time
// policy. Stored in factored form (per-sample value matrix + pair list) when
// built from a forest — products against weight vectors then cost
// O(samples * sources) instead of O(pairs * sources) — or as an explicit
// dense matrix for synthetic instances.
class PairDifferenceMatrix {
 public:
  // Factored: values is (n_samples x n_sources); each pair indexes its rows.
  PairDifferenceMatrix(Eigen::MatrixXd values, std::vector<std::pair<int, int>> pairs,
                       TimePolicy policy);

  // Dense: each row is already a difference vector.
  static PairDifferenceMatrix from_dense(Eigen::MatrixXd differences);

  Eigen::Index rows() const;
  Eigen::Index cols() const;

  Eigen::VectorXd row(Eigen::Index r) const;
  Eigen::MatrixXd dense() const;

  // D * w.
  Eigen::VectorXd apply(const Eigen::VectorXd& w) const;

  // Sum of rows r with z[r] > 0 (the hinge-active subgradient direction).
  Eigen::VectorXd active_row_sum(const Eigen::VectorXd& z) const;

  // True when every row is exactly zero.
  bool is_zero() const;

  const TimePolicy& policy() const { return policy_; }

 private:
  PairDifferenceMatrix() = default;

  bool factored_ = false;
  Eigen::MatrixXd values_;                     // factored storage
  std::vector<std::pair<int, int>> pairs_;     // factored storage
  Eigen::MatrixXd dense_;                      // dense storage
  TimePolicy policy_;
};

// Evaluate every hazard source at every sample of ds under the policy and
// pair the results up. Sources are the forest's trees, or the group means of
// a grouped forest.
PairDifferenceMatrix build_pair_differences(const Forest& forest, const SurvivalDataset& ds,
                                            const PairSet& pairs, const TimePolicy& policy);
PairDifferenceMatrix build_pair_differences(const GroupedForest& grouped,
                                            const SurvivalDataset& ds, const PairSet& pairs,
                                            const TimePolicy& policy);

// K distinct pairs drawn uniformly without replacement; K >= |pairs| returns
// the input unchanged (same order).
PairSet sample_constraints(const PairSet& pairs, long k, std::uint64_t seed);

// Euclidean projection onto the unit simplex (exact sort-based algorithm).
WeightVector project_simplex(const Eigen::VectorXd& v);

struct QPOptions {
  long max_iterations = 20000;
  // Consecutive iterations without a 1e-9 objective improvement before the
  // solver concludes it has stalled. At every stall an exact minimizer over
  // the current hinge-activity region is tried first; the solver stops only
  // when that no longer improves either.
  long stall_window = 2500;
  double improvement_tolerance = 1e-9;
  double initial_step = 0.0;  // 0 = sqrt(2) / |subgradient at uniform|
};

struct QPSolution {
  WeightVector weights;
  double objective = 0.0;
  Eigen::VectorXd xi;  // per-pair hinge slack at the returned weights
  long iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  std::string note;
};

// Minimize sum_r max(0, d_r . w) + lambda * |w|^2 over the unit simplex by
// projected subgradient descent (step eta0/sqrt(t), uniform start, best
// iterate kept) with an exact region polish at stalls. The objective is
// convex, so the global optimum is the target; the returned objective is
// never worse than the uniform start.
QPSolution optimize_weights_qp(const PairDifferenceMatrix& differences, double lambda,
                               const QPOptions& options = {});

struct SigmoidOptions {
  long iterations = 500;
  double initial_step = 1.0;
};

// Projected gradient ascent with backtracking on the smooth concordance
// surrogate mean_r sigmoid(-d_r . w); the objective never decreases across
// accepted steps.
WeightVector optimize_weights_sigmoid(const PairDifferenceMatrix& differences,
                                      const SigmoidOptions& options = {});

// sum_q w_q * H_q(t | x) over the union knot set, in fixed source order.
StepFunction weighted_chf(const Forest& forest, const WeightVector& w, const Eigen::VectorXd& x);
// Group version: each group's weight spreads uniformly over its member trees.
StepFunction weighted_chf(const GroupedForest& grouped, const WeightVector& w,
                          const Eigen::VectorXd& x);

}  // namespace wrsf::weights
