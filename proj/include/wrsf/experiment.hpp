#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wrsf/dataset.hpp"
#include "wrsf/forest.hpp"
#include "wrsf/policy.hpp"
#include "wrsf/weights.hpp"

namespace wrsf::bench {

using data::SurvivalDataset;

// Everything one benchmark or sweep run needs. The forest seed inside
// `forest` is ignored by the repeated protocols, which derive per-repetition
// seeds from `master_seed` instead.
struct ExperimentConfig {
  std::string data_path;
  data::ColumnSchema schema;
  ensemble::ForestParams forest;
  int groups = 0;  // weight sources G; 0 = one group per tree
  std::vector<double> lambdas = {0.001, 0.01, 0.1, 1.0, 10.0};
  long constraints = -1;  // hinge constraints kept per repetition; -1 = keep all
  TimePolicyKind time_policy = TimePolicyKind::sample;
  int repetitions = 20;
  double train_fraction = 0.75;
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";

  int effective_groups() const { return groups == 0 ? forest.trees : groups; }
  void validate() const;
};

// Sample statistics of one C-index series. A single observation reports a
// standard deviation of 0 (there is nothing to spread).
struct SeriesStats {
  double mean = 0.0;
  double stdev = 0.0;
  double median = 0.0;
};

SeriesStats summarize(const std::vector<double>& xs);

// Seed of repetition `rep`; a pure function of the master seed, shared by
// benchmark and sweep so their repetitions see the same splits and forests.
std::uint64_t repetition_seed(std::uint64_t master_seed, int rep);

// Concrete evaluation-time policy for a training set: `sample` needs no
// preparation, `grid` evaluates over the set's distinct event times.
TimePolicy make_time_policy(TimePolicyKind kind, const SurvivalDataset& train);

struct RepetitionResult {
  std::uint64_t seed = 0;  // the repetition seed all derived streams hang off
  double rsf = 0.0;        // test C-index of the uniform ensemble
  std::vector<double> wrsf;  // test C-index per lambda, in config order
};

struct BenchmarkReport {
  ExperimentConfig config;
  std::vector<RepetitionResult> reps;
  SeriesStats rsf;
  std::vector<SeriesStats> wrsf;  // per lambda
  int chosen_lambda = 0;          // index into config.lambdas with the best mean
  // Weights of repetition 0 at the chosen lambda, for the histogram file.
  weights::WeightVector designated_weights;
};

BenchmarkReport run_benchmark(const ExperimentConfig& config, const SurvivalDataset& ds);

// Writes benchmark_reps.csv, benchmark_summary.csv, weights_hist.csv and
// manifest.txt into config.out_dir. Nothing in the files depends on the
// clock or the worker count, so reruns are byte-identical.
void write_benchmark_report(const BenchmarkReport& report);

enum class SweepAxis { trees, groups, constraints, lambda };

SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  double rsf = 0.0;
  double wrsf = 0.0;          // at that value's chosen lambda
  double chosen_lambda = 0.0;
};

struct SweepReport {
  ExperimentConfig config;
  SweepAxis axis = SweepAxis::trees;
  std::vector<double> values;
  std::vector<SweepRow> rows;  // value-major, repetition-minor
};

// One benchmark-style evaluation per (axis value, repetition), with the same
// repetition seeds as run_benchmark. All values are checked before any
// computation starts.
SweepReport run_sweep(const ExperimentConfig& config, const SurvivalDataset& ds, SweepAxis axis,
                      const std::vector<double>& values);

// Writes sweep_<axis>.csv into config.out_dir.
void write_sweep_report(const SweepReport& report);

}  // namespace wrsf::bench
