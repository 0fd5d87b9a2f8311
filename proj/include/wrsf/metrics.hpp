#pragma once

#include <vector>

#include "wrsf/dataset.hpp"
#include "wrsf/policy.hpp"
#include "wrsf/step_function.hpp"
#include "wrsf/weights.hpp"

namespace wrsf::metrics {

using data::SurvivalDataset;

// Harrell-style concordance over the admissible pairs of a dataset.
struct CIndexReport {
  double c_index = 0.0;   // concordant / admissible
  long concordant = 0;    // pairs satisfying the concordance inequality below
  long admissible = 0;    // M: comparable pairs (earlier sample observed, times distinct)
  TimePolicyKind time_policy = TimePolicyKind::sample;
  // How pairs were formed; fixed for now but recorded so reports are self-describing.
  std::string pair_policy = "admissible";
};

// Scores one hazard curve per sample and counts, over all admissible pairs
// (i, j) with i failing first, those satisfying the concordance inequality
// H(t_i* | x_i) < H(t_j* | x_j) — equivalently S(t_i* | x_i) > S(t_j* | x_j).
// Strict comparisons; ties contribute nothing. Throws when the dataset yields
// no admissible pairs or predictions are missing/mismatched.
CIndexReport c_index(const std::vector<StepFunction>& predictions, const SurvivalDataset& ds,
                     const TimePolicy& policy);

// Concordance as a function of ensemble weights: the fraction of difference
// rows with -d_r . w > 0. Strict inequality, so an all-zero matrix scores 0,
// and any positive rescaling of w gives the same value.
double c_index_of_weights(const weights::PairDifferenceMatrix& differences,
                          const weights::WeightVector& w);

}  // namespace wrsf::metrics
