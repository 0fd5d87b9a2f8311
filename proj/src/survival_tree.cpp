#include "wrsf/survival_tree.hpp"

#include "wrsf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace wrsf::tree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Distinct event times of a node with parent-level death/at-risk counts.
struct NodeGrid {
  std::vector<double> times;  // t_1 < ... < t_N
  std::vector<int> at_risk;   // Y_i = #{samples with T >= t_i}
  std::vector<int> deaths;    // Z_i = #{events at t_i}
  int total_events = 0;

  int size() const { return static_cast<int>(times.size()); }

  // Index of the largest grid time <= t, or -1 when t precedes the grid.
  int position(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return static_cast<int>(it - times.begin()) - 1;
  }
};

NodeGrid build_grid(const SurvivalDataset& ds, const std::vector<int>& node_samples) {
  NodeGrid grid;
  std::vector<double> event_times;
  std::vector<double> all_times;
  all_times.reserve(node_samples.size());
  for (int idx : node_samples) {
    const data::Sample& s = ds.samples[static_cast<std::size_t>(idx)];
    all_times.push_back(s.time);
    if (s.event) event_times.push_back(s.time);
  }
  std::sort(event_times.begin(), event_times.end());
  std::sort(all_times.begin(), all_times.end());
  grid.total_events = static_cast<int>(event_times.size());

  grid.times = event_times;
  grid.times.erase(std::unique(grid.times.begin(), grid.times.end()), grid.times.end());
  const int n_node = static_cast<int>(all_times.size());
  grid.at_risk.resize(grid.times.size());
  grid.deaths.resize(grid.times.size());
  for (std::size_t i = 0; i < grid.times.size(); ++i) {
    const double t = grid.times[i];
    grid.at_risk[i] = n_node - static_cast<int>(std::lower_bound(all_times.begin(),
                                                                 all_times.end(), t) -
                                                all_times.begin());
    auto range = std::equal_range(event_times.begin(), event_times.end(), t);
    grid.deaths[i] = static_cast<int>(range.second - range.first);
  }
  return grid;
}

// Log-rank statistic from parent counts (Y, Z) and left-daughter counts
// (Y1, Z1) per grid time. Times with fewer than two subjects at risk carry no
// information about the split and are skipped. NaN flags a degenerate
// variance, i.e. an uninformative candidate.
double log_rank_from_counts(const std::vector<int>& Y, const std::vector<int>& Z,
                            const std::vector<int>& Y1, const std::vector<int>& Z1) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < Y.size(); ++i) {
    if (Y[i] < 2) continue;
    const double y = static_cast<double>(Y[i]);
    const double frac = static_cast<double>(Y1[i]) / y;
    num += static_cast<double>(Z1[i]) - static_cast<double>(Y1[i]) * static_cast<double>(Z[i]) / y;
    den += frac * (1.0 - frac) *
           (static_cast<double>(Y[i] - Z[i]) / static_cast<double>(Y[i] - 1)) *
           static_cast<double>(Z[i]);
  }
  if (!(den > 0.0)) return kNaN;
  return num / std::sqrt(den);
}

// Conservation-of-events score, already transformed to 1/(1 + Cons). Each
// daughter contributes its first-time at-risk count times the running sum of
// deaths * next-time-at-risk * Nelson-Aalen value; empty risk sets contribute
// nothing (0/0 reads as 0).
double conservation_from_counts(const std::vector<int>& Y, const std::vector<int>& Z,
                                const std::vector<int>& Y1, const std::vector<int>& Z1) {
  const int n_times = static_cast<int>(Y.size());
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    double na = 0.0, inner = 0.0;
    int first_at_risk = 0;
    for (int k = 0; k < n_times; ++k) {
      const int yk = side == 0 ? Y1[static_cast<std::size_t>(k)]
                               : Y[static_cast<std::size_t>(k)] - Y1[static_cast<std::size_t>(k)];
      const int zk = side == 0 ? Z1[static_cast<std::size_t>(k)]
                               : Z[static_cast<std::size_t>(k)] - Z1[static_cast<std::size_t>(k)];
      if (k == 0) first_at_risk = yk;
      if (yk > 0) na += static_cast<double>(zk) / static_cast<double>(yk);
      if (k + 1 < n_times) {
        const int y_next = side == 0
                               ? Y1[static_cast<std::size_t>(k + 1)]
                               : Y[static_cast<std::size_t>(k + 1)] - Y1[static_cast<std::size_t>(k + 1)];
        inner += static_cast<double>(zk) * static_cast<double>(y_next) * na;
      }
    }
    total += static_cast<double>(first_at_risk) * inner;
  }
  const double cons = total / static_cast<double>(Y[0]);  // Y_11 + Y_12 = Y_1
  return 1.0 / (1.0 + cons);
}

// Approximate log-rank from totals only: Z events in the node, Z1 of them in
// the left daughter, and A = sum of the parent hazard curve at the left
// daughter's observed times. Valid only while 0 < A < Z.
double approx_log_rank_from_totals(int total_events, int left_events, double left_hazard_sum) {
  const double z = static_cast<double>(total_events);
  const double a = left_hazard_sum;
  if (!(a > 0.0) || !(a < z)) return kNaN;
  return std::sqrt(z) * (static_cast<double>(left_events) - a) / std::sqrt(a * (z - a));
}

// Left-daughter counts per grid time for the membership test x <= threshold,
// built by direct enumeration. This is the reference path used by the public
// statistic functions; best_split maintains the same counts incrementally.
void left_counts(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                 const NodeGrid& grid, int feature, double threshold,
                 std::vector<int>& Y1, std::vector<int>& Z1) {
  const std::size_t n_times = grid.times.size();
  Y1.assign(n_times, 0);
  Z1.assign(n_times, 0);
  for (int idx : node_samples) {
    const data::Sample& s = ds.samples[static_cast<std::size_t>(idx)];
    if (!(s.features[feature] <= threshold)) continue;
    for (std::size_t i = 0; i < n_times; ++i)
      if (s.time >= grid.times[i]) Y1[i] += 1;
    if (s.event) {
      const int p = grid.position(s.time);
      if (p >= 0 && grid.times[static_cast<std::size_t>(p)] == s.time)
        Z1[static_cast<std::size_t>(p)] += 1;
    }
  }
}

void check_node_arguments(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                          int feature) {
  if (node_samples.empty()) throw std::invalid_argument("split statistic: empty node");
  if (feature < 0 || feature >= ds.m())
    throw std::invalid_argument("split statistic: feature index " + std::to_string(feature) +
                                " out of range for m=" + std::to_string(ds.m()));
}

}  // namespace

SplitRule split_rule_from_string(const std::string& name) {
  if (name == "logrank") return SplitRule::log_rank;
  if (name == "conservation") return SplitRule::conservation;
  if (name == "approx-logrank") return SplitRule::approx_log_rank;
  throw std::invalid_argument("unknown split rule '" + name +
                              "' (expected logrank, conservation, or approx-logrank)");
}

std::string to_string(SplitRule rule) {
  switch (rule) {
    case SplitRule::log_rank: return "logrank";
    case SplitRule::conservation: return "conservation";
    case SplitRule::approx_log_rank: return "approx-logrank";
  }
  return "?";
}

LeafEstimate node_estimate(const SurvivalDataset& ds, const std::vector<int>& node_samples) {
  if (node_samples.empty()) throw std::invalid_argument("node_estimate: empty node");
  const NodeGrid grid = build_grid(ds, node_samples);
  LeafEstimate est;
  const int n_times = grid.size();
  est.unique_deaths = n_times;
  est.death_times = Eigen::Map<const Eigen::VectorXd>(grid.times.data(), n_times);
  est.deaths = Eigen::Map<const Eigen::VectorXi>(grid.deaths.data(), n_times);
  est.at_risk = Eigen::Map<const Eigen::VectorXi>(grid.at_risk.data(), n_times);
  est.chf.knots = est.death_times;
  est.chf.values.resize(n_times);
  double cum = 0.0;
  for (int i = 0; i < n_times; ++i) {
    cum += static_cast<double>(grid.deaths[static_cast<std::size_t>(i)]) /
           static_cast<double>(grid.at_risk[static_cast<std::size_t>(i)]);
    est.chf.values[i] = cum;
  }
  return est;
}

double log_rank_statistic(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                          int feature, double threshold) {
  check_node_arguments(ds, node_samples, feature);
  const NodeGrid grid = build_grid(ds, node_samples);
  if (grid.size() == 0) return kNaN;
  std::vector<int> Y1, Z1;
  left_counts(ds, node_samples, grid, feature, threshold, Y1, Z1);
  return log_rank_from_counts(grid.at_risk, grid.deaths, Y1, Z1);
}

double conservation_statistic(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                              int feature, double threshold) {
  check_node_arguments(ds, node_samples, feature);
  const NodeGrid grid = build_grid(ds, node_samples);
  if (grid.size() == 0) return kNaN;
  std::vector<int> Y1, Z1;
  left_counts(ds, node_samples, grid, feature, threshold, Y1, Z1);
  return conservation_from_counts(grid.at_risk, grid.deaths, Y1, Z1);
}

double approx_log_rank_statistic(const SurvivalDataset& ds, const std::vector<int>& node_samples,
                                 int feature, double threshold, const StepFunction& node_chf) {
  check_node_arguments(ds, node_samples, feature);
  const NodeGrid grid = build_grid(ds, node_samples);
  if (grid.size() == 0) return kNaN;
  int left_events = 0;
  // Hazards are added in ascending feature-value order (ties in node order),
  // the same order the split sweep accumulates its running sum, so the two
  // code paths round identically and agree bitwise on every candidate.
  std::vector<std::pair<double, double>> left;  // (feature value, hazard)
  for (int idx : node_samples) {
    const data::Sample& s = ds.samples[static_cast<std::size_t>(idx)];
    if (!(s.features[feature] <= threshold)) continue;
    left.emplace_back(s.features[feature], node_chf(s.time));
    if (s.event) ++left_events;
  }
  std::stable_sort(left.begin(), left.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double left_hazard_sum = 0.0;
  for (const auto& [value, hazard] : left) left_hazard_sum += hazard;
  return approx_log_rank_from_totals(grid.total_events, left_events, left_hazard_sum);
}

std::optional<SplitCandidate> best_split(const SurvivalDataset& ds,
                                         const std::vector<int>& node_samples,
                                         const std::vector<int>& candidate_features,
                                         SplitRule rule, int min_unique_deaths) {
  if (min_unique_deaths < 0)
    throw std::invalid_argument("best_split: min_unique_deaths must be nonnegative");
  const int n_node = static_cast<int>(node_samples.size());
  if (n_node < 2) return std::nullopt;

  const NodeGrid grid = build_grid(ds, node_samples);
  const int n_times = grid.size();
  // Each daughter must keep min_unique_deaths distinct event times; with
  // fewer than d+1 in the parent no threshold can achieve that.
  if (n_times < min_unique_deaths + 1) return std::nullopt;

  // The approximate rule scores candidates against the parent node's own
  // Nelson-Aalen curve; precompute its value at every node sample's time.
  StepFunction node_chf;
  if (rule == SplitRule::approx_log_rank) {
    node_chf.knots = Eigen::Map<const Eigen::VectorXd>(grid.times.data(), n_times);
    node_chf.values.resize(n_times);
    double cum = 0.0;
    for (int i = 0; i < n_times; ++i) {
      cum += static_cast<double>(grid.deaths[static_cast<std::size_t>(i)]) /
             static_cast<double>(grid.at_risk[static_cast<std::size_t>(i)]);
      node_chf.values[i] = cum;
    }
  }

  struct Entry {
    double value;
    double time;
    bool event;
    int grid_pos;   // largest grid time <= time (-1 below the grid)
    double hazard;  // parent chf at time (approximate rule only)
  };
  std::vector<Entry> entries(static_cast<std::size_t>(n_node));

  std::vector<int> features = candidate_features;
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::optional<SplitCandidate> best;
  double best_score = -std::numeric_limits<double>::infinity();

  std::vector<int> bins, left_z, y1;
  for (int feature : features) {
    if (feature < 0 || feature >= ds.m())
      throw std::invalid_argument("best_split: feature index " + std::to_string(feature) +
                                  " out of range");
    for (int k = 0; k < n_node; ++k) {
      const data::Sample& s = ds.samples[static_cast<std::size_t>(node_samples[static_cast<std::size_t>(k)])];
      Entry& e = entries[static_cast<std::size_t>(k)];
      e.value = s.features[feature];
      e.time = s.time;
      e.event = s.event;
      e.grid_pos = grid.position(s.time);
      e.hazard = rule == SplitRule::approx_log_rank ? node_chf(s.time) : 0.0;
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });
    if (entries.front().value == entries.back().value) continue;  // constant feature

    // Sweep thresholds in increasing order, moving whole groups of equal
    // feature values into the left daughter and rescoring incrementally.
    bins.assign(static_cast<std::size_t>(n_times) + 1, 0);  // bins[p+1] = # left with grid_pos p
    left_z.assign(static_cast<std::size_t>(n_times), 0);
    y1.assign(static_cast<std::size_t>(n_times), 0);
    int n_left = 0;
    int left_events = 0;
    int left_unique = 0;
    int right_unique = n_times;
    double left_hazard_sum = 0.0;

    std::size_t k = 0;
    while (k < entries.size()) {
      const double value = entries[k].value;
      for (; k < entries.size() && entries[k].value == value; ++k) {
        const Entry& e = entries[k];
        bins[static_cast<std::size_t>(e.grid_pos) + 1] += 1;
        ++n_left;
        if (e.event) {
          ++left_events;
          std::size_t p = static_cast<std::size_t>(e.grid_pos);
          if (++left_z[p] == 1) ++left_unique;
          if (left_z[p] == grid.deaths[p]) --right_unique;
        }
        left_hazard_sum += e.hazard;
      }
      if (k == entries.size()) break;  // everything on one side: not a split

      const double next_value = entries[k].value;
      const double threshold = value + (next_value - value) / 2.0;
      // A midpoint can round onto the upper value when neighbors are a few
      // ulps apart; such a threshold would not separate what we just counted.
      if (!(threshold < next_value)) continue;

      if (left_unique < min_unique_deaths || right_unique < min_unique_deaths) continue;

      double statistic;
      if (rule == SplitRule::approx_log_rank) {
        statistic = approx_log_rank_from_totals(grid.total_events, left_events, left_hazard_sum);
      } else {
        // Y1 per grid time from the position bins (suffix sums).
        int acc = 0;
        for (int i = n_times - 1; i >= 0; --i) {
          acc += bins[static_cast<std::size_t>(i) + 1];
          y1[static_cast<std::size_t>(i)] = acc;
        }
        statistic = rule == SplitRule::log_rank
                        ? log_rank_from_counts(grid.at_risk, grid.deaths, y1, left_z)
                        : conservation_from_counts(grid.at_risk, grid.deaths, y1, left_z);
      }
      if (std::isnan(statistic)) continue;

      const double score = rule == SplitRule::conservation ? statistic : std::abs(statistic);
      if (score > best_score) {
        best_score = score;
        best = SplitCandidate{feature, threshold, statistic, n_left, n_node - n_left};
      }
    }
  }
  return best;
}

namespace {

struct GrowContext {
  const SurvivalDataset& ds;
  SurvivalTree& tree;
  GrowthParams params;
  int mtry = 0;
};

int grow_node(GrowContext& ctx, std::vector<int>&& samples, std::uint64_t path, int depth,
              const StepFunction* parent_chf) {
  LeafEstimate est = node_estimate(ctx.ds, samples);

  auto make_leaf = [&]() {
    if (est.unique_deaths == 0) {
      // All remaining samples are censored: Nelson-Aalen is undefined here,
      // so the leaf keeps the parent's hazard estimate.
      est.chf = *parent_chf;
    }
    const int leaf_id = static_cast<int>(ctx.tree.leaves.size());
    ctx.tree.leaves.push_back(std::move(est));
    const int node_id = static_cast<int>(ctx.tree.nodes.size());
    TreeNode node;
    node.leaf = leaf_id;
    ctx.tree.nodes.push_back(node);
    return node_id;
  };

  if (est.unique_deaths == 0) return make_leaf();

  std::optional<SplitCandidate> split;
  const bool depth_allows = ctx.params.max_depth == 0 || depth < ctx.params.max_depth;
  if (depth_allows && static_cast<int>(samples.size()) >= 2 &&
      est.unique_deaths >= ctx.params.min_unique_deaths + 1) {
    Rng feature_rng(mix_seed(path, 1));
    std::vector<int> candidates = feature_rng.sample_without_replacement(ctx.ds.m(), ctx.mtry);
    std::sort(candidates.begin(), candidates.end());
    split = best_split(ctx.ds, samples, candidates, ctx.params.rule, ctx.params.min_unique_deaths);
  }
  if (!split) return make_leaf();

  std::vector<int> left, right;
  left.reserve(static_cast<std::size_t>(split->n_left));
  right.reserve(static_cast<std::size_t>(split->n_right));
  for (int idx : samples) {
    const data::Sample& s = ctx.ds.samples[static_cast<std::size_t>(idx)];
    (s.features[split->feature] <= split->threshold ? left : right).push_back(idx);
  }

  const int node_id = static_cast<int>(ctx.tree.nodes.size());
  TreeNode node;
  node.feature = split->feature;
  node.threshold = split->threshold;
  ctx.tree.nodes.push_back(node);
  samples.clear();
  samples.shrink_to_fit();

  const StepFunction node_chf = est.chf;  // children may need it for censored-only leaves
  const int left_id = grow_node(ctx, std::move(left), mix_seed(path, 2), depth + 1, &node_chf);
  const int right_id = grow_node(ctx, std::move(right), mix_seed(path, 3), depth + 1, &node_chf);
  ctx.tree.nodes[static_cast<std::size_t>(node_id)].left = left_id;
  ctx.tree.nodes[static_cast<std::size_t>(node_id)].right = right_id;
  return node_id;
}

}  // namespace

SurvivalTree grow_tree(const SurvivalDataset& ds, const std::vector<int>& in_bag,
                       const GrowthParams& params, std::uint64_t seed) {
  if (in_bag.empty()) throw std::invalid_argument("grow_tree: empty bootstrap sample");
  if (params.min_unique_deaths < 1)
    throw std::invalid_argument("grow_tree: min_unique_deaths must be positive");
  int events = 0;
  for (int idx : in_bag) {
    if (idx < 0 || idx >= ds.n())
      throw std::invalid_argument("grow_tree: bootstrap index " + std::to_string(idx) +
                                  " out of range");
    events += ds.samples[static_cast<std::size_t>(idx)].event ? 1 : 0;
  }
  if (events == 0)
    throw std::invalid_argument("grow_tree: bootstrap sample contains no events");

  SurvivalTree tree;
  tree.params = params;
  tree.seed = seed;
  tree.n_features = ds.m();
  tree.in_bag = in_bag;

  GrowContext ctx{ds, tree, params, 0};
  ctx.mtry = params.mtry > 0 ? std::min(params.mtry, ds.m())
                             : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ds.m()))));
  std::vector<int> samples = in_bag;
  grow_node(ctx, std::move(samples), mix_seed(seed, 1), 0, nullptr);
  return tree;
}

int leaf_index(const SurvivalTree& tree, const Eigen::VectorXd& x) {
  if (x.size() != tree.n_features)
    throw std::invalid_argument("predict: feature vector has " + std::to_string(x.size()) +
                                " entries, tree expects " + std::to_string(tree.n_features));
  int node_id = 0;
  while (true) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    if (node.feature < 0) return node.leaf;
    node_id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
}

const StepFunction& predict_chf(const SurvivalTree& tree, const Eigen::VectorXd& x) {
  return tree.leaves[static_cast<std::size_t>(leaf_index(tree, x))].chf;
}

}  // namespace wrsf::tree
