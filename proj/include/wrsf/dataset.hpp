#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace wrsf::data {

enum class FeatureKind { numeric, encoded_categorical };

// One right-censored observation: features x, observed time T, and the event
// indicator (true = the event was observed, false = censored at T).
struct Sample {
  Eigen::VectorXd features;
  double time = 0.0;
  bool event = false;
};

struct SurvivalDataset {
  std::vector<Sample> samples;
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;

  int n() const { return static_cast<int>(samples.size()); }
  int m() const { return static_cast<int>(feature_names.size()); }
  int count_events() const;
};

// Ordered comparison pairs (i, j): sample i saw the event strictly before
// sample j's recorded time. `total` is the pair count M used as the
// concordance denominator and always equals pairs.size().
struct PairSet {
  std::vector<std::pair<int, int>> pairs;
  std::size_t total = 0;
};

// Column mapping for CSV ingestion. An empty feature list means "every column
// that is not the time or event column, in header order".
struct ColumnSchema {
  std::string time_column;
  std::string event_column;
  std::vector<std::string> feature_columns;
};

// Parse CSV text (comma-separated, header row, '.' decimals, no quoting).
// Feature columns whose cells all parse as numbers stay numeric; any other
// column is integer-coded by first appearance and tagged encoded-categorical.
// `origin` names the source in error messages.
SurvivalDataset parse_csv(const std::string& text, const ColumnSchema& schema,
                          const std::string& origin);

SurvivalDataset load_csv(const std::string& path, const ColumnSchema& schema);

// Disjoint partition with llround(n * train_fraction) training samples.
// Deterministic under the seed; rejects splits that leave either side empty,
// a training side smaller than 2, or a training side with no events.
std::pair<SurvivalDataset, SurvivalDataset> train_test_split(const SurvivalDataset& ds,
                                                             double train_fraction,
                                                             std::uint64_t seed);

struct BootstrapDraw {
  std::vector<int> in_bag;  // n draws with replacement, in draw order
  std::vector<int> oob;     // ascending complement of in_bag
};

BootstrapDraw bootstrap_sample(const SurvivalDataset& ds, std::uint64_t seed);

// All pairs (i, j) with event[i] and time[i] < time[j]; ties are excluded
// because the concordance comparison is strict. i-major, j-minor order.
PairSet admissible_pairs(const SurvivalDataset& ds);

}  // namespace wrsf::data
