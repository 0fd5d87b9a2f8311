#include "wrsf/metrics.hpp"

#include <stdexcept>
#include <string>

namespace wrsf::metrics {

CIndexReport c_index(const std::vector<StepFunction>& predictions, const SurvivalDataset& ds,
                     const TimePolicy& policy) {
  if (static_cast<int>(predictions.size()) != ds.n())
    throw std::invalid_argument("c_index: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(ds.n()) + " samples");
  const data::PairSet pairs = data::admissible_pairs(ds);
  if (pairs.pairs.empty())
    throw std::runtime_error("c_index: no admissible pairs (need an observed event with a "
                             "strictly later comparison time)");

  std::vector<double> value(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i)
    value[i] = policy_value(predictions[i], ds.samples[i].time, policy);

  CIndexReport report;
  report.time_policy = policy.kind;
  report.admissible = static_cast<long>(pairs.pairs.size());
  for (const auto& [i, j] : pairs.pairs) {
    // i fails first; the pair counts when H(t_i*|x_i) < H(t_j*|x_j) strictly.
    if (value[static_cast<std::size_t>(i)] < value[static_cast<std::size_t>(j)])
      ++report.concordant;
  }
  report.c_index = static_cast<double>(report.concordant) / static_cast<double>(report.admissible);
  return report;
}

double c_index_of_weights(const weights::PairDifferenceMatrix& differences,
                          const weights::WeightVector& w) {
  if (differences.rows() == 0)
    throw std::invalid_argument("c_index_of_weights: empty difference matrix");
  const Eigen::VectorXd z = differences.apply(w);
  long concordant = 0;
  for (Eigen::Index r = 0; r < z.size(); ++r)
    if (-z[r] > 0.0) ++concordant;
  return static_cast<double>(concordant) / static_cast<double>(z.size());
}

}  // namespace wrsf::metrics
