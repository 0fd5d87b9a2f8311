// Command-line harness: fit and persist models, evaluate concordance, run the
// repeated-split benchmark, sweep one experiment axis, and generate synthetic
// survival data.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wrsf/dataset.hpp"
#include "wrsf/experiment.hpp"
#include "wrsf/forest.hpp"
#include "wrsf/metrics.hpp"
#include "wrsf/model_io.hpp"
#include "wrsf/rng.hpp"
#include "wrsf/synthetic.hpp"
#include "wrsf/weights.hpp"

namespace {

using namespace wrsf;

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Flags every data-consuming subcommand shares. Schema resolution order:
// built-in defaults, then the JSON schema file, then explicit flags.
struct DataArgs {
  std::string data_path;
  std::string schema_path;
  std::string time_col;
  std::string event_col;
};

void add_data_flags(CLI::App* sub, DataArgs& args) {
  sub->add_option("--data", args.data_path, "dataset CSV file")->required();
  sub->add_option("--schema", args.schema_path,
                  "JSON schema file: {\"time\": ..., \"event\": ..., \"features\": [...]}");
  sub->add_option("--time-col", args.time_col, "time column (overrides the schema file)");
  sub->add_option("--event-col", args.event_col, "event column (overrides the schema file)");
}

data::ColumnSchema resolve_schema(const DataArgs& args) {
  data::ColumnSchema schema;
  schema.time_column = "time";
  schema.event_column = "event";
  if (!args.schema_path.empty()) {
    std::ifstream in(args.schema_path);
    if (!in) throw std::runtime_error("cannot open schema file '" + args.schema_path + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("schema file '" + args.schema_path + "': " + e.what());
    }
    if (doc.contains("time")) schema.time_column = doc.at("time").get<std::string>();
    if (doc.contains("event")) schema.event_column = doc.at("event").get<std::string>();
    if (doc.contains("features"))
      for (const auto& name : doc.at("features"))
        schema.feature_columns.push_back(name.get<std::string>());
  }
  if (!args.time_col.empty()) schema.time_column = args.time_col;
  if (!args.event_col.empty()) schema.event_column = args.event_col;
  return schema;
}

struct ModelArgs {
  int trees = 100;
  std::string rule = "logrank";
  int min_deaths = 3;
  int mtry = 0;
  int groups = 0;
  std::vector<double> lambdas;  // empty = caller-specific default
  std::string constraints = "all";
  std::string time_policy = "sample";
  std::uint64_t seed = 1;
  int workers = 1;
};

void add_model_flags(CLI::App* sub, ModelArgs& args) {
  sub->add_option("--trees", args.trees, "number of trees Q")->check(CLI::PositiveNumber);
  sub->add_option("--rule", args.rule, "splitting rule")
      ->check(CLI::IsMember({"logrank", "conservation", "approx-logrank"}));
  sub->add_option("--min-deaths", args.min_deaths,
                  "required distinct event times per terminal node")
      ->check(CLI::PositiveNumber);
  sub->add_option("--mtry", args.mtry, "candidate features per node (0 = ceil(sqrt(m)))");
  sub->add_option("--groups", args.groups, "tree groups acting as weight sources (0 = per tree)");
  sub->add_option("--lambda", args.lambdas, "ridge strength; repeat for a grid");
  sub->add_option("--constraints", args.constraints,
                  "hinge constraints kept per training set: a count, or 'all'");
  sub->add_option("--time-policy", args.time_policy, "hazard evaluation times")
      ->check(CLI::IsMember({"sample", "grid"}));
  sub->add_option("--seed", args.seed, "master seed");
  sub->add_option("--workers", args.workers, "threads for tree growing")
      ->check(CLI::PositiveNumber);
}

// CLI11 reads config files only when parsing starts at the top-level app, so
// a per-subcommand --config is expanded by hand before the real parse: every
// key in the file becomes an ordinary --key=value token appended to the
// command line, except keys the user already passed explicitly — flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;
  if (!std::ifstream(path).good())
    throw std::runtime_error("cannot open config file '" + path + "'");
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (!item.parents.empty())
      throw std::runtime_error("config file '" + path + "': sections are not supported");
    const std::string flag = "--" + item.name;
    bool given = false;
    for (const std::string& arg : args)
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) given = true;
    if (given) continue;
    if (item.inputs.empty()) args.push_back(flag);
    for (const std::string& input : item.inputs) args.push_back(flag + "=" + input);
  }
  return args;
}

long parse_constraints(const std::string& text) {
  if (text == "all") return -1;
  try {
    std::size_t used = 0;
    const long k = std::stol(text, &used);
    if (used != text.size() || k < 1) throw std::invalid_argument(text);
    return k;
  } catch (const std::exception&) {
    throw std::runtime_error("--constraints expects a positive count or 'all', got '" + text +
                             "'");
  }
}

bench::ExperimentConfig build_config(const DataArgs& data_args, const ModelArgs& model_args) {
  bench::ExperimentConfig config;
  config.data_path = data_args.data_path;
  config.schema = resolve_schema(data_args);
  config.forest.trees = model_args.trees;
  config.forest.rule = tree::split_rule_from_string(model_args.rule);
  config.forest.min_unique_deaths = model_args.min_deaths;
  config.forest.mtry = model_args.mtry;
  config.forest.workers = model_args.workers;
  config.groups = model_args.groups;
  if (!model_args.lambdas.empty()) config.lambdas = model_args.lambdas;
  config.constraints = parse_constraints(model_args.constraints);
  config.time_policy = model_args.time_policy == "grid" ? TimePolicyKind::grid
                                                        : TimePolicyKind::sample;
  config.master_seed = model_args.seed;
  return config;
}

// 64-bit FNV-1a over a canonical rendering of the training rows, so a fit can
// later be checked against the exact data that produced it.
std::uint64_t training_split_hash(const data::SurvivalDataset& ds) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](const std::string& text) {
    for (unsigned char c : text) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  char buf[64];
  for (const data::Sample& s : ds.samples) {
    std::snprintf(buf, sizeof(buf), "%a|%d", s.time, s.event ? 1 : 0);
    mix(buf);
    for (Eigen::Index k = 0; k < s.features.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "|%a", s.features[k]);
      mix(buf);
    }
    mix("\n");
  }
  return h;
}

int cmd_fit(const DataArgs& data_args, const ModelArgs& model_args, const std::string& out_dir) {
  if (model_args.lambdas.size() > 1)
    throw std::runtime_error("fit stores one weight vector; pass --lambda at most once");
  const data::ColumnSchema schema = resolve_schema(data_args);
  const data::SurvivalDataset ds = data::load_csv(data_args.data_path, schema);

  ensemble::ForestParams params;
  params.trees = model_args.trees;
  params.rule = tree::split_rule_from_string(model_args.rule);
  params.min_unique_deaths = model_args.min_deaths;
  params.mtry = model_args.mtry;
  params.seed = model_args.seed;
  params.workers = model_args.workers;
  const ensemble::Forest forest = ensemble::fit_forest(ds, params);

  ensemble::SavedModel model;
  model.forest = forest;
  model.feature_names = ds.feature_names;
  model.feature_kinds = ds.feature_kinds;

  std::optional<double> lambda;
  if (!model_args.lambdas.empty()) {
    lambda = model_args.lambdas.front();
    const int groups = model_args.groups == 0 ? forest.size() : model_args.groups;
    const ensemble::GroupedForest grouped = ensemble::group_trees(forest, groups);
    const TimePolicy policy = bench::make_time_policy(
        model_args.time_policy == "grid" ? TimePolicyKind::grid : TimePolicyKind::sample, ds);
    data::PairSet pairs = data::admissible_pairs(ds);
    if (pairs.pairs.empty())
      throw std::runtime_error("dataset yields no admissible pairs to train weights on");
    const long k = parse_constraints(model_args.constraints);
    if (k >= 0) pairs = weights::sample_constraints(pairs, k, mix_seed(model_args.seed, 3));
    const weights::PairDifferenceMatrix differences =
        weights::build_pair_differences(grouped, ds, pairs, policy);
    model.weights = weights::optimize_weights_qp(differences, *lambda).weights;
    model.weight_groups = groups;
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path model_path = std::filesystem::path(out_dir) / "model.wrsf";
  ensemble::save_model(model_path.string(), model);

  std::ofstream manifest(std::filesystem::path(out_dir) / "fit_manifest.txt", std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot write fit manifest in '" + out_dir + "'");
  manifest << "command: fit\n";
  manifest << "data: " << data_args.data_path << '\n';
  manifest << "time_column: " << schema.time_column << '\n';
  manifest << "event_column: " << schema.event_column << '\n';
  manifest << "rows: " << ds.n() << '\n';
  manifest << "events: " << ds.count_events() << '\n';
  manifest << "features: " << ds.m() << '\n';
  manifest << "tree_count: " << forest.size() << '\n';
  manifest << "rule: " << tree::to_string(params.rule) << '\n';
  manifest << "min_unique_deaths: " << params.min_unique_deaths << '\n';
  manifest << "mtry: " << params.mtry << '\n';
  manifest << "seed: " << params.seed << '\n';
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(training_split_hash(ds)));
  manifest << "training_split: full dataset\n";
  manifest << "training_split_hash: " << hash_buf << '\n';
  if (lambda.has_value()) {
    manifest << "weights: trained\n";
    manifest << "lambda: " << fmt_full(*lambda) << '\n';
    manifest << "groups: " << model.weight_groups << '\n';
  } else {
    manifest << "weights: none\n";
  }

  std::cout << "wrote " << model_path.string() << '\n';
  return 0;
}

int cmd_eval(const DataArgs& data_args, const std::string& model_path,
             const std::string& time_policy) {
  const ensemble::SavedModel model = ensemble::load_model(model_path);
  const data::ColumnSchema schema = resolve_schema(data_args);
  const data::SurvivalDataset ds = data::load_csv(data_args.data_path, schema);
  if (ds.m() != model.forest.n_features)
    throw std::runtime_error("dataset has " + std::to_string(ds.m()) + " features but '" +
                             model_path + "' was trained on " +
                             std::to_string(model.forest.n_features));

  const TimePolicy policy = bench::make_time_policy(
      time_policy == "grid" ? TimePolicyKind::grid : TimePolicyKind::sample, ds);
  std::vector<StepFunction> predictions(ds.samples.size());
  if (model.weights.has_value()) {
    const ensemble::GroupedForest grouped =
        ensemble::group_trees(model.forest, model.weight_groups);
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
      predictions[i] = weights::weighted_chf(grouped, *model.weights, ds.samples[i].features);
  } else {
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
      predictions[i] = ensemble_chf(model.forest, ds.samples[i].features);
  }
  const metrics::CIndexReport report = metrics::c_index(predictions, ds, policy);

  std::cout << "model: " << model_path << '\n';
  std::cout << "data: " << data_args.data_path << '\n';
  std::cout << "samples: " << ds.n() << '\n';
  std::cout << "weighted: " << (model.weights.has_value() ? "yes" : "no") << '\n';
  std::cout << "time_policy: " << to_string(report.time_policy) << '\n';
  std::cout << "admissible: " << report.admissible << '\n';
  std::cout << "concordant: " << report.concordant << '\n';
  std::cout << "c_index: " << fmt_full(report.c_index) << '\n';
  return 0;
}

int cmd_benchmark(const DataArgs& data_args, const ModelArgs& model_args, int reps,
                  double train_frac, const std::string& out_dir) {
  bench::ExperimentConfig config = build_config(data_args, model_args);
  config.repetitions = reps;
  config.train_fraction = train_frac;
  config.out_dir = out_dir;
  config.validate();

  const data::SurvivalDataset ds = data::load_csv(config.data_path, config.schema);
  const bench::BenchmarkReport report = bench::run_benchmark(config, ds);
  bench::write_benchmark_report(report);

  const bench::SeriesStats& wrsf = report.wrsf[static_cast<std::size_t>(report.chosen_lambda)];
  std::cout << "rsf_mean: " << fmt_full(report.rsf.mean) << '\n';
  std::cout << "wrsf_mean: " << fmt_full(wrsf.mean) << '\n';
  std::cout << "chosen_lambda: "
            << fmt_full(config.lambdas[static_cast<std::size_t>(report.chosen_lambda)]) << '\n';
  std::cout << "wrote " << out_dir << "/benchmark_summary.csv\n";
  return 0;
}

int cmd_sweep(const DataArgs& data_args, const ModelArgs& model_args, int reps, double train_frac,
              const std::string& out_dir, const std::string& axis_name,
              const std::vector<double>& values) {
  bench::ExperimentConfig config = build_config(data_args, model_args);
  config.repetitions = reps;
  config.train_fraction = train_frac;
  config.out_dir = out_dir;
  const bench::SweepAxis axis = bench::sweep_axis_from_string(axis_name);

  const data::SurvivalDataset ds = data::load_csv(config.data_path, config.schema);
  const bench::SweepReport report = bench::run_sweep(config, ds, axis, values);
  bench::write_sweep_report(report);
  std::cout << "wrote " << out_dir << "/sweep_" << axis_name << ".csv\n";
  return 0;
}

int cmd_synth(int n, int features, double censoring, std::uint64_t seed,
              const std::string& out_path) {
  data::SyntheticSpec spec;
  spec.n = n;
  spec.features = features;
  spec.censoring = censoring;
  spec.seed = seed;
  const data::SurvivalDataset ds = data::make_synthetic(spec);

  if (const auto parent = std::filesystem::path(out_path).parent_path(); !parent.empty())
    std::filesystem::create_directories(parent);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << "time,event";
  for (const std::string& name : ds.feature_names) out << ',' << name;
  out << '\n';
  for (const data::Sample& s : ds.samples) {
    out << fmt_full(s.time) << ',' << (s.event ? 1 : 0);
    for (Eigen::Index k = 0; k < s.features.size(); ++k) out << ',' << fmt_full(s.features[k]);
    out << '\n';
  }
  std::cout << "wrote " << out_path << " (" << ds.n() << " rows, " << ds.count_events()
            << " events)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random survival forests with trained ensemble weights"};
  app.require_subcommand(1);

  DataArgs fit_data, eval_data, bench_data, sweep_data;
  ModelArgs fit_model, bench_model, sweep_model;
  std::string fit_out = "fit-out", bench_out = "bench-out", sweep_out = "sweep-out";
  std::string eval_model_path, eval_policy = "sample";
  int bench_reps = 20, sweep_reps = 20;
  double bench_frac = 0.75, sweep_frac = 0.75;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  int synth_n = 100, synth_features = 5;
  double synth_censoring = 0.3;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "synthetic.csv";
  std::string config_file;
  const std::string config_help = "INI config file with the same keys as the flags; flags win";

  CLI::App* fit = app.add_subcommand("fit", "fit a forest (and optional weights), save it");
  add_data_flags(fit, fit_data);
  add_model_flags(fit, fit_model);
  fit->add_option("--out", fit_out, "output directory for model.wrsf and fit_manifest.txt");
  fit->add_option("--config", config_file, config_help);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved model's C-index on a dataset");
  add_data_flags(eval, eval_data);
  eval->add_option("--model", eval_model_path, "model file from fit")->required();
  eval->add_option("--time-policy", eval_policy, "hazard evaluation times")
      ->check(CLI::IsMember({"sample", "grid"}));
  eval->add_option("--config", config_file, config_help);

  CLI::App* benchmark =
      app.add_subcommand("benchmark", "repeated train/test protocol comparing both models");
  add_data_flags(benchmark, bench_data);
  add_model_flags(benchmark, bench_model);
  benchmark->add_option("--reps", bench_reps, "repetitions")->check(CLI::PositiveNumber);
  benchmark->add_option("--train-frac", bench_frac, "training fraction of each split");
  benchmark->add_option("--out", bench_out, "output directory");
  benchmark->add_option("--config", config_file, config_help);

  CLI::App* sweep = app.add_subcommand("sweep", "benchmark along one axis");
  add_data_flags(sweep, sweep_data);
  add_model_flags(sweep, sweep_model);
  sweep->add_option("--reps", sweep_reps, "repetitions")->check(CLI::PositiveNumber);
  sweep->add_option("--train-frac", sweep_frac, "training fraction of each split");
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--axis", sweep_axis, "trees, groups, constraints or lambda")->required();
  sweep->add_option("--values", sweep_values, "axis values (repeatable)")->required();
  sweep->add_option("--config", config_file, config_help);

  CLI::App* synth = app.add_subcommand("synth", "generate proportional-hazards survival data");
  synth->add_option("--n", synth_n, "rows")->check(CLI::PositiveNumber);
  synth->add_option("--features", synth_features, "feature count")->check(CLI::PositiveNumber);
  synth->add_option("--censoring", synth_censoring, "per-sample censoring probability in [0,1)");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::reverse(args.begin(), args.end());  // App::parse consumes back to front
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_data, fit_model, fit_out);
    if (eval->parsed()) return cmd_eval(eval_data, eval_model_path, eval_policy);
    if (benchmark->parsed())
      return cmd_benchmark(bench_data, bench_model, bench_reps, bench_frac, bench_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_data, sweep_model, sweep_reps, sweep_frac, sweep_out, sweep_axis,
                       sweep_values);
    if (synth->parsed())
      return cmd_synth(synth_n, synth_features, synth_censoring, synth_seed, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
