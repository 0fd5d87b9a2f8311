#pragma once

#include "wrsf/dataset.hpp"
#include "wrsf/step_function.hpp"
#include "wrsf/survival_tree.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace wrsf::ensemble {

using data::SurvivalDataset;

struct ForestParams {
  int trees = 100;  // Q
  tree::SplitRule rule = tree::SplitRule::log_rank;
  int min_unique_deaths = 3;
  int mtry = 0;  // 0 = ceil(sqrt(m))
  int max_depth = 0;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct Forest {
  std::vector<tree::SurvivalTree> trees;
  ForestParams params;
  int n_features = 0;

  int size() const { return static_cast<int>(trees.size()); }
};

// A partition of the forest into G contiguous equally sized tree blocks; each
// block acts as one hazard source whose curve is the unweighted mean of its
// members. G must divide the tree count.
struct GroupedForest {
  const Forest* parent = nullptr;
  int groups = 0;      // G
  int group_size = 0;  // g, with g * G = Q
};

// Grow params.trees trees, tree q on an independent bootstrap drawn with a
// seed derived from (params.seed, q). Bit-identical output for any worker
// count. The rare bootstrap that draws no events is redrawn deterministically.
Forest fit_forest(const SurvivalDataset& ds, const ForestParams& params);

// (1/Q) * sum of all trees' hazard curves on the union knot set.
StepFunction ensemble_chf(const Forest& forest, const Eigen::VectorXd& x);

// Mean hazard curve over the trees whose bootstrap excluded sample i.
// Errors when sample i is in-bag everywhere.
StepFunction oob_ensemble_chf(const Forest& forest, const SurvivalDataset& ds, int sample_index);

GroupedForest group_trees(const Forest& forest, int groups);

// Mean hazard curve of group k's member trees at x.
StepFunction group_chf(const GroupedForest& grouped, int group, const Eigen::VectorXd& x);

}  // namespace wrsf::ensemble
