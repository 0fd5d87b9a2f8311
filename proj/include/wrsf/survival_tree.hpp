#pragma once

#include "wrsf/dataset.hpp"
#include "wrsf/step_function.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wrsf::tree {

using data::SurvivalDataset;

enum class SplitRule { log_rank, conservation, approx_log_rank };

SplitRule split_rule_from_string(const std::string& name);
std::string to_string(SplitRule rule);

// Nelson-Aalen summary of one terminal node: at each distinct event time the
// cumulative hazard grows by deaths/at_risk.
struct LeafEstimate {
  StepFunction chf;
  Eigen::VectorXd death_times;  // distinct event times in the node, increasing
  Eigen::VectorXi deaths;       // events at each death time (>= 1)
  Eigen::VectorXi at_risk;      // samples still under observation, nonincreasing
  int unique_deaths = 0;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double statistic = 0.0;  // signed log-rank value, or the transformed conservation score
  int n_left = 0;
  int n_right = 0;
};

// feature == -1 marks a leaf; `leaf` then indexes SurvivalTree::leaves.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;
};

struct GrowthParams {
  SplitRule rule = SplitRule::log_rank;
  int min_unique_deaths = 3;  // required distinct event times per daughter
  int mtry = 0;               // candidate features per node; 0 = ceil(sqrt(m))
  int max_depth = 0;          // 0 = grow to full size
};

struct SurvivalTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<LeafEstimate> leaves;
  std::vector<int> in_bag;  // bootstrap multiset the tree was grown on
  std::vector<int> oob;     // ascending
  GrowthParams params;
  std::uint64_t seed = 0;
  int n_features = 0;
};

// Nelson-Aalen estimate over a multiset of sample indices.
LeafEstimate node_estimate(const SurvivalDataset& ds, const std::vector<int>& node_samples);

// Splitting statistics for the daughter split {x_feature <= threshold} vs the
// rest, summed over the parent node's distinct event times. Each returns NaN
// when its variance term (or radicand) degenerates — such candidates are
// skipped by the split search rather than raised as errors.
double log_rank_statistic(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                          int feature, double threshold);

// Conservation-of-events score, already transformed to 1/(1 + Cons) so that
// larger means better separation, like the log-rank family.
double conservation_statistic(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                              int feature, double threshold);

// Approximate log-rank statistic; `node_chf` is the parent node's own
// Nelson-Aalen estimate.
double approx_log_rank_statistic(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                                 int feature, double threshold, const StepFunction& node_chf);

// Exhaustive search over (candidate feature, midpoint threshold) pairs.
// A candidate is valid when both daughters are nonempty and each keeps at
// least `min_unique_deaths` distinct event times. Log-rank rules maximize the
// absolute statistic; conservation maximizes its transformed score. Ties are
// broken toward the lower feature index, then the lower threshold. Returns
// nothing when the node cannot support any valid split.
std::optional<SplitCandidate> best_split(const SurvivalDataset& ds,
                                         const std::vector<int>& node_samples,
                                         const std::vector<int>& candidate_features,
                                         SplitRule rule, int min_unique_deaths);

// Recursive growth on a bootstrap multiset. Every node draws its candidate
// features from an RNG derived from (seed, node path), so the structure is a
// pure function of the arguments. Nodes left with censored samples only
// become leaves that inherit the parent's hazard estimate.
SurvivalTree grow_tree(const SurvivalDataset& ds, const std::vector<int>& in_bag,
                       const GrowthParams& params, std::uint64_t seed);

// Routes x to a leaf (x <= threshold goes left) and returns its hazard curve.
const StepFunction& predict_chf(const SurvivalTree& tree, const Eigen::VectorXd& x);

// Index of the leaf x falls into; cheaper handle for bulk evaluation.
int leaf_index(const SurvivalTree& tree, const Eigen::VectorXd& x);

}  // namespace wrsf::tree
