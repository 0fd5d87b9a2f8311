#include "wrsf/forest.hpp"

#include "wrsf/rng.hpp"
#include "wrsf/thread_pool.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wrsf::ensemble {

namespace {

// Bootstrap for tree q. A draw without a single event cannot support a
// Nelson-Aalen estimate, so such draws are rejected and redrawn from the next
// seed in the tree's own stream — still a pure function of (dataset, seed).
data::BootstrapDraw draw_with_events(const SurvivalDataset& ds, std::uint64_t tree_seed) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    data::BootstrapDraw draw =
        data::bootstrap_sample(ds, mix_seed(tree_seed, 2 + static_cast<std::uint64_t>(attempt)));
    for (int idx : draw.in_bag)
      if (ds.samples[static_cast<std::size_t>(idx)].event) return draw;
  }
  throw std::runtime_error("fit_forest: could not draw a bootstrap containing an event");
}

}  // namespace

Forest fit_forest(const SurvivalDataset& ds, const ForestParams& params) {
  if (params.trees < 1) throw std::invalid_argument("fit_forest: tree count must be >= 1");
  if (ds.n() < 2) throw std::invalid_argument("fit_forest: need at least two samples");
  if (ds.count_events() == 0) throw std::invalid_argument("fit_forest: dataset has no events");

  Forest forest;
  forest.params = params;
  forest.n_features = ds.m();
  forest.trees.resize(static_cast<std::size_t>(params.trees));

  tree::GrowthParams growth;
  growth.rule = params.rule;
  growth.min_unique_deaths = params.min_unique_deaths;
  growth.mtry = params.mtry;
  growth.max_depth = params.max_depth;

  parallel_for_index(params.trees, params.workers, [&](int q) {
    const std::uint64_t tree_seed = mix_seed(params.seed, static_cast<std::uint64_t>(q));
    data::BootstrapDraw draw = draw_with_events(ds, tree_seed);
    tree::SurvivalTree t = tree::grow_tree(ds, draw.in_bag, growth, mix_seed(tree_seed, 1));
    t.oob = std::move(draw.oob);
    forest.trees[static_cast<std::size_t>(q)] = std::move(t);
  });
  return forest;
}

StepFunction ensemble_chf(const Forest& forest, const Eigen::VectorXd& x) {
  std::vector<const StepFunction*> leaves;
  leaves.reserve(forest.trees.size());
  for (const tree::SurvivalTree& t : forest.trees) leaves.push_back(&predict_chf(t, x));
  StepFunction sum = combine_step_functions(leaves, Eigen::VectorXd::Ones(forest.size()));
  sum.values /= static_cast<double>(forest.size());
  return sum;
}

StepFunction oob_ensemble_chf(const Forest& forest, const SurvivalDataset& ds, int sample_index) {
  if (sample_index < 0 || sample_index >= ds.n())
    throw std::invalid_argument("oob_ensemble_chf: sample index out of range");
  const Eigen::VectorXd& x = ds.samples[static_cast<std::size_t>(sample_index)].features;
  std::vector<const StepFunction*> leaves;
  for (const tree::SurvivalTree& t : forest.trees) {
    if (std::binary_search(t.oob.begin(), t.oob.end(), sample_index))
      leaves.push_back(&predict_chf(t, x));
  }
  if (leaves.empty())
    throw std::runtime_error("oob_ensemble_chf: sample " + std::to_string(sample_index) +
                             " is in-bag for every tree; no OOB trees to average");
  StepFunction sum =
      combine_step_functions(leaves, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(leaves.size())));
  sum.values /= static_cast<double>(leaves.size());
  return sum;
}

GroupedForest group_trees(const Forest& forest, int groups) {
  if (groups < 1 || forest.size() % groups != 0)
    throw std::invalid_argument("group_trees: group count " + std::to_string(groups) +
                                " does not divide tree count " + std::to_string(forest.size()));
  GroupedForest grouped;
  grouped.parent = &forest;
  grouped.groups = groups;
  grouped.group_size = forest.size() / groups;
  return grouped;
}

StepFunction group_chf(const GroupedForest& grouped, int group, const Eigen::VectorXd& x) {
  if (group < 0 || group >= grouped.groups)
    throw std::invalid_argument("group_chf: group index out of range");
  const Forest& forest = *grouped.parent;
  std::vector<const StepFunction*> leaves;
  leaves.reserve(static_cast<std::size_t>(grouped.group_size));
  const int begin = group * grouped.group_size;
  for (int q = begin; q < begin + grouped.group_size; ++q)
    leaves.push_back(&predict_chf(forest.trees[static_cast<std::size_t>(q)], x));
  StepFunction sum =
      combine_step_functions(leaves, Eigen::VectorXd::Ones(grouped.group_size));
  sum.values /= static_cast<double>(grouped.group_size);
  return sum;
}

}  // namespace wrsf::ensemble
