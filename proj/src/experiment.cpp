#include "wrsf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "wrsf/metrics.hpp"
#include "wrsf/rng.hpp"

namespace wrsf::bench {

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("config: train fraction must lie strictly between 0 and 1");
  if (lambdas.empty()) throw std::invalid_argument("config: lambda grid must be nonempty");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("config: lambda values must be positive");
  if (forest.trees < 1) throw std::invalid_argument("config: need at least one tree");
  if (forest.workers < 1) throw std::invalid_argument("config: need at least one worker");
  const int g = effective_groups();
  if (g < 1 || forest.trees % g != 0)
    throw std::invalid_argument("config: groups (" + std::to_string(g) +
                                ") must divide the tree count (" + std::to_string(forest.trees) +
                                ")");
  if (constraints != -1 && constraints < 1)
    throw std::invalid_argument("config: constraint count must be >= 1 (or all)");
}

SeriesStats summarize(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("summarize: empty series");
  SeriesStats s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

std::uint64_t repetition_seed(std::uint64_t master_seed, int rep) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(rep) + 1);
}

TimePolicy make_time_policy(TimePolicyKind kind, const SurvivalDataset& train) {
  if (kind == TimePolicyKind::sample) return TimePolicy::at_sample_times();
  std::vector<double> times;
  for (const data::Sample& s : train.samples)
    if (s.event) times.push_back(s.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  Eigen::VectorXd grid(static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) grid[static_cast<Eigen::Index>(k)] = times[k];
  return TimePolicy::on_grid(std::move(grid));
}

namespace {

struct RepetitionEvaluation {
  RepetitionResult result;
  std::vector<weights::WeightVector> weights_per_lambda;  // filled only on request
};

// One repetition of the protocol: split, fit, evaluate the uniform ensemble,
// then the weighted ensemble at every lambda. All randomness hangs off the
// repetition seed through fixed stream tags, so no axis or lambda choice can
// shift another stream.
RepetitionEvaluation evaluate_repetition(const ExperimentConfig& config,
                                         const SurvivalDataset& ds, int rep,
                                         bool capture_weights) {
  RepetitionEvaluation eval;
  const std::uint64_t rep_seed = repetition_seed(config.master_seed, rep);
  eval.result.seed = rep_seed;

  auto [train, test] =
      data::train_test_split(ds, config.train_fraction, mix_seed(rep_seed, 1));

  ensemble::ForestParams params = config.forest;
  params.seed = mix_seed(rep_seed, 2);
  const ensemble::Forest forest = ensemble::fit_forest(train, params);
  const TimePolicy policy = make_time_policy(config.time_policy, train);

  std::vector<StepFunction> test_chf(test.samples.size());
  for (std::size_t i = 0; i < test.samples.size(); ++i)
    test_chf[i] = ensemble_chf(forest, test.samples[i].features);
  eval.result.rsf = metrics::c_index(test_chf, test, policy).c_index;

  const ensemble::GroupedForest grouped = group_trees(forest, config.effective_groups());
  data::PairSet pairs = data::admissible_pairs(train);
  if (pairs.pairs.empty())
    throw std::runtime_error("training split yields no admissible pairs to train weights on");
  if (config.constraints >= 0)
    pairs = weights::sample_constraints(pairs, config.constraints, mix_seed(rep_seed, 3));
  const weights::PairDifferenceMatrix differences =
      weights::build_pair_differences(grouped, train, pairs, policy);

  eval.result.wrsf.reserve(config.lambdas.size());
  if (capture_weights) eval.weights_per_lambda.reserve(config.lambdas.size());
  for (double lambda : config.lambdas) {
    const weights::QPSolution sol = weights::optimize_weights_qp(differences, lambda);
    for (std::size_t i = 0; i < test.samples.size(); ++i)
      test_chf[i] = weights::weighted_chf(grouped, sol.weights, test.samples[i].features);
    eval.result.wrsf.push_back(metrics::c_index(test_chf, test, policy).c_index);
    if (capture_weights) eval.weights_per_lambda.push_back(sol.weights);
  }
  return eval;
}

int best_lambda_index(const std::vector<SeriesStats>& per_lambda) {
  int best = 0;
  for (std::size_t k = 1; k < per_lambda.size(); ++k)
    if (per_lambda[k].mean > per_lambda[best].mean) best = static_cast<int>(k);
  return best;
}

std::string fmt_full(double v) {  // round-trippable
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_label(double v) {  // compact axis/lambda labels like 0.001
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

BenchmarkReport run_benchmark(const ExperimentConfig& config, const SurvivalDataset& ds) {
  config.validate();
  BenchmarkReport report;
  report.config = config;

  std::vector<weights::WeightVector> designated_candidates;
  for (int r = 0; r < config.repetitions; ++r) {
    try {
      RepetitionEvaluation eval = evaluate_repetition(config, ds, r, r == 0);
      if (r == 0) designated_candidates = std::move(eval.weights_per_lambda);
      report.reps.push_back(std::move(eval.result));
    } catch (const std::exception& e) {
      throw std::runtime_error("repetition " + std::to_string(r) + " (seed " +
                               std::to_string(repetition_seed(config.master_seed, r)) +
                               ") failed: " + e.what());
    }
  }

  std::vector<double> rsf_series;
  rsf_series.reserve(report.reps.size());
  for (const RepetitionResult& rep : report.reps) rsf_series.push_back(rep.rsf);
  report.rsf = summarize(rsf_series);

  report.wrsf.reserve(config.lambdas.size());
  for (std::size_t k = 0; k < config.lambdas.size(); ++k) {
    std::vector<double> series;
    series.reserve(report.reps.size());
    for (const RepetitionResult& rep : report.reps) series.push_back(rep.wrsf[k]);
    report.wrsf.push_back(summarize(series));
  }
  report.chosen_lambda = best_lambda_index(report.wrsf);
  report.designated_weights =
      designated_candidates[static_cast<std::size_t>(report.chosen_lambda)];
  return report;
}

void write_benchmark_report(const BenchmarkReport& report) {
  const ExperimentConfig& config = report.config;
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  const std::string groups_label = std::to_string(config.effective_groups());

  {
    std::ofstream out = open_out(dir / "benchmark_reps.csv");
    out << "rep,seed,model,groups,lambda,c_index\n";
    for (std::size_t r = 0; r < report.reps.size(); ++r) {
      const RepetitionResult& rep = report.reps[r];
      out << r << ',' << rep.seed << ",rsf,na,na," << fmt_full(rep.rsf) << '\n';
      for (std::size_t k = 0; k < config.lambdas.size(); ++k)
        out << r << ',' << rep.seed << ",wrsf," << groups_label << ','
            << fmt_label(config.lambdas[k]) << ',' << fmt_full(rep.wrsf[k]) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "benchmark_summary.csv");
    out << "model,groups,lambda,mean,std,median,reps,chosen\n";
    out << "rsf,na,na," << fmt_full(report.rsf.mean) << ',' << fmt_full(report.rsf.stdev) << ','
        << fmt_full(report.rsf.median) << ',' << report.reps.size() << ",na\n";
    for (std::size_t k = 0; k < config.lambdas.size(); ++k)
      out << "wrsf," << groups_label << ',' << fmt_label(config.lambdas[k]) << ','
          << fmt_full(report.wrsf[k].mean) << ',' << fmt_full(report.wrsf[k].stdev) << ','
          << fmt_full(report.wrsf[k].median) << ',' << report.reps.size() << ','
          << (static_cast<int>(k) == report.chosen_lambda ? 1 : 0) << '\n';
  }
  {
    // Weight-distribution plot input: repetition 0's weights, largest first.
    std::vector<double> sorted(report.designated_weights.data(),
                               report.designated_weights.data() +
                                   report.designated_weights.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    std::ofstream out = open_out(dir / "weights_hist.csv");
    out << "rank,weight\n";
    for (std::size_t k = 0; k < sorted.size(); ++k)
      out << (k + 1) << ',' << fmt_full(sorted[k]) << '\n';
  }
  {
    std::ofstream out = open_out(dir / "manifest.txt");
    out << "command: benchmark\n";
    out << "data: " << config.data_path << '\n';
    out << "time_column: " << config.schema.time_column << '\n';
    out << "event_column: " << config.schema.event_column << '\n';
    out << "trees: " << config.forest.trees << '\n';
    out << "rule: " << tree::to_string(config.forest.rule) << '\n';
    out << "min_unique_deaths: " << config.forest.min_unique_deaths << '\n';
    out << "mtry: " << config.forest.mtry << '\n';
    out << "max_depth: " << config.forest.max_depth << '\n';
    out << "groups: " << groups_label << '\n';
    out << "lambda_grid:";
    for (std::size_t k = 0; k < config.lambdas.size(); ++k)
      out << (k == 0 ? " " : ",") << fmt_label(config.lambdas[k]);
    out << '\n';
    out << "constraints: "
        << (config.constraints < 0 ? std::string("all") : std::to_string(config.constraints))
        << '\n';
    out << "repetitions: " << config.repetitions << '\n';
    out << "train_fraction: " << fmt_label(config.train_fraction) << '\n';
    out << "master_seed: " << config.master_seed << '\n';
    out << "time_policy: " << to_string(config.time_policy) << '\n';
    out << "chosen_lambda: " << fmt_label(config.lambdas[static_cast<std::size_t>(
                                    report.chosen_lambda)])
        << '\n';
    out << "lambda_selection: best mean test C-index across repetitions; optimistically biased "
           "(test folds reused for selection), per-lambda rows kept in benchmark_summary.csv\n";
    if (config.repetitions == 1)
      out << "std_note: single repetition; standard deviations are 0 by definition\n";
    out << "rsf_mean: " << fmt_full(report.rsf.mean) << '\n';
    out << "rsf_std: " << fmt_full(report.rsf.stdev) << '\n';
    out << "rsf_median: " << fmt_full(report.rsf.median) << '\n';
    const SeriesStats& chosen = report.wrsf[static_cast<std::size_t>(report.chosen_lambda)];
    out << "wrsf_mean: " << fmt_full(chosen.mean) << '\n';
    out << "wrsf_std: " << fmt_full(chosen.stdev) << '\n';
    out << "wrsf_median: " << fmt_full(chosen.median) << '\n';
  }
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "trees") return SweepAxis::trees;
  if (name == "groups") return SweepAxis::groups;
  if (name == "constraints") return SweepAxis::constraints;
  if (name == "lambda") return SweepAxis::lambda;
  throw std::invalid_argument("unknown sweep axis '" + name +
                              "' (expected trees, groups, constraints or lambda)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::trees: return "trees";
    case SweepAxis::groups: return "groups";
    case SweepAxis::constraints: return "constraints";
    case SweepAxis::lambda: return "lambda";
  }
  throw std::logic_error("unreachable sweep axis");
}

namespace {

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig config = base;
  const auto as_count = [&](const char* what) {
    if (!(value >= 1.0) || std::floor(value) != value)
      throw std::invalid_argument(std::string("sweep: ") + what + " value must be a positive "
                                  "integer, got " + fmt_label(value));
    return static_cast<long>(value);
  };
  switch (axis) {
    case SweepAxis::trees:
      config.forest.trees = static_cast<int>(as_count("trees"));
      break;
    case SweepAxis::groups:
      config.groups = static_cast<int>(as_count("groups"));
      break;
    case SweepAxis::constraints:
      config.constraints = as_count("constraints");
      break;
    case SweepAxis::lambda:
      if (!(value > 0.0))
        throw std::invalid_argument("sweep: lambda value must be positive, got " +
                                    fmt_label(value));
      config.lambdas = {value};
      break;
  }
  config.validate();
  return config;
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& config, const SurvivalDataset& ds, SweepAxis axis,
                      const std::vector<double>& values) {
  config.validate();
  if (values.empty()) throw std::invalid_argument("sweep: need at least one axis value");

  // Reject any bad value before touching the data.
  std::vector<ExperimentConfig> configs;
  configs.reserve(values.size());
  for (double v : values) configs.push_back(with_axis_value(config, axis, v));

  SweepReport report;
  report.config = config;
  report.axis = axis;
  report.values = values;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    const ExperimentConfig& local = configs[vi];
    std::vector<RepetitionResult> reps;
    reps.reserve(static_cast<std::size_t>(local.repetitions));
    for (int r = 0; r < local.repetitions; ++r) {
      try {
        reps.push_back(evaluate_repetition(local, ds, r, false).result);
      } catch (const std::exception& e) {
        throw std::runtime_error(to_string(axis) + "=" + fmt_label(values[vi]) +
                                 ", repetition " + std::to_string(r) + " (seed " +
                                 std::to_string(repetition_seed(local.master_seed, r)) +
                                 ") failed: " + e.what());
      }
    }
    std::vector<SeriesStats> per_lambda;
    per_lambda.reserve(local.lambdas.size());
    for (std::size_t k = 0; k < local.lambdas.size(); ++k) {
      std::vector<double> series;
      series.reserve(reps.size());
      for (const RepetitionResult& rep : reps) series.push_back(rep.wrsf[k]);
      per_lambda.push_back(summarize(series));
    }
    const int chosen = best_lambda_index(per_lambda);
    for (std::size_t r = 0; r < reps.size(); ++r) {
      SweepRow row;
      row.value = values[vi];
      row.rep = static_cast<int>(r);
      row.seed = reps[r].seed;
      row.rsf = reps[r].rsf;
      row.wrsf = reps[r].wrsf[static_cast<std::size_t>(chosen)];
      row.chosen_lambda = local.lambdas[static_cast<std::size_t>(chosen)];
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_sweep_report(const SweepReport& report) {
  const std::filesystem::path dir(report.config.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream out = open_out(dir / ("sweep_" + to_string(report.axis) + ".csv"));
  out << "axis,value,rep,seed,rsf_c_index,wrsf_c_index,chosen_lambda\n";
  for (const SweepRow& row : report.rows)
    out << to_string(report.axis) << ',' << fmt_label(row.value) << ',' << row.rep << ','
        << row.seed << ',' << fmt_full(row.rsf) << ',' << fmt_full(row.wrsf) << ','
        << fmt_label(row.chosen_lambda) << '\n';
}

}  // namespace wrsf::bench
