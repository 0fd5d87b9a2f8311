#include <doctest.h>

#include "wrsf/experiment.hpp"
#include "wrsf/rng.hpp"
#include "wrsf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace wrsf::bench;
using wrsf::data::SurvivalDataset;
using wrsf::data::make_synthetic;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.data_path = "synthetic";
  config.forest.trees = 6;
  config.forest.min_unique_deaths = 2;
  config.repetitions = 2;
  config.lambdas = {0.01, 0.1};
  config.master_seed = 5;
  return config;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("series statistics match hand-computed values") {
  const SeriesStats odd = summarize({3.0, 1.0, 2.0});
  CHECK(odd.mean == doctest::Approx(2.0));
  CHECK(odd.median == 2.0);
  CHECK(odd.stdev == doctest::Approx(1.0));  // sample variance: ((1)+(0)+(1))/2 = 1

  const SeriesStats even = summarize({4.0, 1.0, 3.0, 2.0});
  CHECK(even.median == doctest::Approx(2.5));
  CHECK(even.mean == doctest::Approx(2.5));

  const SeriesStats single = summarize({0.7});
  CHECK(single.mean == 0.7);
  CHECK(single.median == 0.7);
  CHECK(single.stdev == 0.0);  // one observation has no spread

  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("repetition seeds are pure and distinct") {
  CHECK(repetition_seed(1, 0) == repetition_seed(1, 0));
  CHECK(repetition_seed(1, 0) != repetition_seed(1, 1));
  CHECK(repetition_seed(1, 0) != repetition_seed(2, 0));
}

TEST_CASE("configs reject out-of-range protocol parameters") {
  ExperimentConfig config = small_config();
  config.validate();  // the baseline is fine

  ExperimentConfig bad = config;
  bad.repetitions = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = config;
  bad.train_fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.train_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = config;
  bad.lambdas = {};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.lambdas = {0.1, -1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = config;
  bad.groups = 4;  // does not divide 6 trees
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.groups = 3;
  bad.validate();

  bad = config;
  bad.constraints = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.constraints = -1;
  bad.validate();

  bad = config;
  bad.forest.trees = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = config;
  bad.forest.workers = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("grid policies are built from the training event times") {
  const SurvivalDataset ds = make_synthetic({20, 2, 0.3, 401});
  const wrsf::TimePolicy sample = make_time_policy(wrsf::TimePolicyKind::sample, ds);
  CHECK(sample.kind == wrsf::TimePolicyKind::sample);

  const wrsf::TimePolicy grid = make_time_policy(wrsf::TimePolicyKind::grid, ds);
  CHECK(grid.kind == wrsf::TimePolicyKind::grid);
  std::vector<double> events;
  for (const auto& s : ds.samples)
    if (s.event) events.push_back(s.time);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  REQUIRE(grid.grid_times.size() == static_cast<Eigen::Index>(events.size()));
  for (std::size_t k = 0; k < events.size(); ++k)
    CHECK(grid.grid_times(static_cast<Eigen::Index>(k)) == events[k]);
}

TEST_CASE("benchmark aggregates are recomputable from the repetitions") {
  const SurvivalDataset ds = make_synthetic({60, 3, 0.25, 405});
  const ExperimentConfig config = small_config();
  const BenchmarkReport report = run_benchmark(config, ds);

  REQUIRE(report.reps.size() == 2);
  for (const RepetitionResult& rep : report.reps) {
    CHECK(rep.wrsf.size() == config.lambdas.size());
    CHECK(rep.rsf > 0.0);
    CHECK(rep.rsf <= 1.0);
  }
  CHECK(report.reps[0].seed == repetition_seed(config.master_seed, 0));
  CHECK(report.reps[1].seed == repetition_seed(config.master_seed, 1));

  std::vector<double> rsf;
  for (const auto& rep : report.reps) rsf.push_back(rep.rsf);
  const SeriesStats rsf_stats = summarize(rsf);
  CHECK(report.rsf.mean == rsf_stats.mean);
  CHECK(report.rsf.stdev == rsf_stats.stdev);
  CHECK(report.rsf.median == rsf_stats.median);

  REQUIRE(report.wrsf.size() == config.lambdas.size());
  double best_mean = -1.0;
  int best_index = 0;
  for (std::size_t l = 0; l < config.lambdas.size(); ++l) {
    std::vector<double> series;
    for (const auto& rep : report.reps) series.push_back(rep.wrsf[l]);
    const SeriesStats stats = summarize(series);
    CHECK(report.wrsf[l].mean == stats.mean);
    CHECK(report.wrsf[l].stdev == stats.stdev);
    if (stats.mean > best_mean) {
      best_mean = stats.mean;
      best_index = static_cast<int>(l);
    }
  }
  CHECK(report.chosen_lambda == best_index);

  // The designated weights are a simplex point over the weight sources.
  REQUIRE(report.designated_weights.size() == config.effective_groups());
  CHECK(report.designated_weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.designated_weights.minCoeff() >= 0.0);
}

TEST_CASE("benchmarks are reproducible run to run") {
  const SurvivalDataset ds = make_synthetic({50, 3, 0.3, 407});
  const ExperimentConfig config = small_config();
  const BenchmarkReport a = run_benchmark(config, ds);
  const BenchmarkReport b = run_benchmark(config, ds);
  REQUIRE(a.reps.size() == b.reps.size());
  for (std::size_t r = 0; r < a.reps.size(); ++r) {
    CHECK(a.reps[r].rsf == b.reps[r].rsf);
    for (std::size_t l = 0; l < a.reps[r].wrsf.size(); ++l)
      CHECK(a.reps[r].wrsf[l] == b.reps[r].wrsf[l]);
  }
  CHECK(a.chosen_lambda == b.chosen_lambda);

  ExperimentConfig threaded = config;
  threaded.forest.workers = 3;
  const BenchmarkReport c = run_benchmark(threaded, ds);
  for (std::size_t r = 0; r < a.reps.size(); ++r) CHECK(a.reps[r].rsf == c.reps[r].rsf);
}

TEST_CASE("benchmark failures name the repetition and seed") {
  const SurvivalDataset tiny = make_synthetic({2, 2, 0.0, 409});
  ExperimentConfig config = small_config();
  try {
    run_benchmark(config, tiny);
    FAIL("expected the tiny dataset to be unsplittable");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("repetition 0") != std::string::npos);
    CHECK(msg.find("seed") != std::string::npos);
  }
}

TEST_CASE("report files are byte-identical across reruns and worker counts") {
  const SurvivalDataset ds = make_synthetic({50, 3, 0.3, 411});
  const auto base = std::filesystem::temp_directory_path() / "wrsf_exp_test";
  std::filesystem::remove_all(base);

  const std::vector<std::string> names = {"benchmark_reps.csv", "benchmark_summary.csv",
                                          "weights_hist.csv", "manifest.txt"};
  std::vector<std::string> first;
  for (int run = 0; run < 3; ++run) {
    ExperimentConfig config = small_config();
    config.forest.workers = run == 2 ? 4 : 1;
    config.out_dir = (base / ("run" + std::to_string(run))).string();
    const BenchmarkReport report = run_benchmark(config, ds);
    write_benchmark_report(report);
    for (std::size_t f = 0; f < names.size(); ++f) {
      const std::string content = slurp(std::filesystem::path(config.out_dir) / names[f]);
      if (run == 0)
        first.push_back(content);
      else
        CHECK(content == first[f]);
    }
  }

  // Spot-check the CSV shapes: header + R rows for the ensemble + R per lambda.
  CHECK(count_lines(first[0]) == 1 + 2 + 2 * 2);
  CHECK(count_lines(first[1]) == 1 + 1 + 2);       // ensemble row + one per lambda
  CHECK(count_lines(first[2]) == 1 + 6);           // one row per weight source
  CHECK(first[3].find("master_seed: 5") != std::string::npos);
  CHECK(first[3].find("chosen_lambda") != std::string::npos);
  CHECK(first[3].find("workers") == std::string::npos);  // worker count never changes results
  std::filesystem::remove_all(base);
}

TEST_CASE("sweeps share per-repetition work with the benchmark") {
  const SurvivalDataset ds = make_synthetic({50, 3, 0.3, 413});
  ExperimentConfig config = small_config();
  const BenchmarkReport bench = run_benchmark(config, ds);

  // A constraint sweep at K >= |pairs| is the unsampled problem.
  const SweepReport sweep = run_sweep(config, ds, SweepAxis::constraints, {1e6});
  REQUIRE(sweep.rows.size() == 2);
  for (std::size_t r = 0; r < sweep.rows.size(); ++r) {
    const SweepRow& row = sweep.rows[r];
    CHECK(row.value == 1e6);
    CHECK(row.rep == static_cast<int>(r));
    CHECK(row.seed == bench.reps[r].seed);
    CHECK(row.rsf == bench.reps[r].rsf);
    CHECK(row.chosen_lambda == config.lambdas[static_cast<std::size_t>(bench.chosen_lambda)]);
    CHECK(row.wrsf == bench.reps[r].wrsf[static_cast<std::size_t>(bench.chosen_lambda)]);
  }
}

TEST_CASE("sweep rows are value-major with validated values") {
  const SurvivalDataset ds = make_synthetic({50, 3, 0.3, 417});
  ExperimentConfig config = small_config();

  const SweepReport trees = run_sweep(config, ds, SweepAxis::trees, {4.0, 8.0});
  REQUIRE(trees.rows.size() == 4);
  CHECK(trees.rows[0].value == 4.0);
  CHECK(trees.rows[1].value == 4.0);
  CHECK(trees.rows[2].value == 8.0);
  CHECK(trees.rows[3].value == 8.0);
  CHECK(trees.rows[0].rep == 0);
  CHECK(trees.rows[1].rep == 1);
  for (const SweepRow& row : trees.rows) {
    CHECK(row.rsf > 0.0);
    CHECK(row.wrsf > 0.0);
  }

  // Bad values abort before any computation.
  CHECK_THROWS_AS(run_sweep(config, ds, SweepAxis::trees, {2.5}), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(config, ds, SweepAxis::trees, {}), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(config, ds, SweepAxis::groups, {5.0}), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(config, ds, SweepAxis::constraints, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(config, ds, SweepAxis::lambda, {-0.5}), std::invalid_argument);
}

TEST_CASE("sweep reports write one csv with a stable name") {
  const SurvivalDataset ds = make_synthetic({50, 3, 0.3, 419});
  ExperimentConfig config = small_config();
  const auto base = std::filesystem::temp_directory_path() / "wrsf_sweep_test";
  std::filesystem::remove_all(base);
  config.out_dir = base.string();

  SweepReport report = run_sweep(config, ds, SweepAxis::lambda, {0.01, 1.0});
  write_sweep_report(report);
  const std::string content = slurp(base / "sweep_lambda.csv");
  CHECK(count_lines(content) == 1 + 4);  // header + 2 values x 2 reps
  CHECK(content.find("axis,value,rep,seed,rsf_c_index,wrsf_c_index,chosen_lambda") !=
        std::string::npos);
  std::filesystem::remove_all(base);
}

TEST_CASE("axis names round trip") {
  CHECK(sweep_axis_from_string("trees") == SweepAxis::trees);
  CHECK(sweep_axis_from_string("groups") == SweepAxis::groups);
  CHECK(sweep_axis_from_string("constraints") == SweepAxis::constraints);
  CHECK(sweep_axis_from_string("lambda") == SweepAxis::lambda);
  CHECK(to_string(SweepAxis::groups) == "groups");
  CHECK_THROWS_AS(sweep_axis_from_string("depth"), std::invalid_argument);
}
