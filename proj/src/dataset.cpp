#include "wrsf/dataset.hpp"

#include "wrsf/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace wrsf::data {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && std::isfinite(out);
}

// Event cells must be 0/1 or false/true (any letter case).
bool parse_event(const std::string& raw, bool& out) {
  std::string s = raw;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "0" || s == "false") {
    out = false;
    return true;
  }
  if (s == "1" || s == "true") {
    out = true;
    return true;
  }
  return false;
}

[[noreturn]] void cell_error(const std::string& origin, std::size_t row, const std::string& column,
                             const std::string& what) {
  throw std::runtime_error(origin + ": row " + std::to_string(row) + ", column '" + column +
                           "': " + what);
}

}  // namespace

int SurvivalDataset::count_events() const {
  int c = 0;
  for (const Sample& s : samples) c += s.event ? 1 : 0;
  return c;
}

SurvivalDataset parse_csv(const std::string& text, const ColumnSchema& schema,
                          const std::string& origin) {
  // Slice into lines, tolerating \r\n endings and a trailing blank line.
  std::vector<std::string> lines;
  {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  }
  if (lines.empty()) throw std::runtime_error(origin + ": empty file");

  const std::vector<std::string> header = split_line(lines[0]);
  std::unordered_map<std::string, int> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) column_of.emplace(header[c], static_cast<int>(c));

  auto require_column = [&](const std::string& name, const char* role) {
    auto it = column_of.find(name);
    if (it == column_of.end())
      throw std::runtime_error(origin + ": schema names " + role + " column '" + name +
                               "' but the header has no such column");
    return it->second;
  };

  if (schema.time_column.empty() || schema.event_column.empty())
    throw std::runtime_error(origin + ": schema must name the time and event columns");
  const int time_col = require_column(schema.time_column, "time");
  const int event_col = require_column(schema.event_column, "event");

  std::vector<std::string> feature_names = schema.feature_columns;
  if (feature_names.empty()) {
    for (const std::string& name : header)
      if (name != schema.time_column && name != schema.event_column) feature_names.push_back(name);
  }
  if (feature_names.empty()) throw std::runtime_error(origin + ": no feature columns");
  std::vector<int> feature_cols;
  for (const std::string& name : feature_names)
    feature_cols.push_back(require_column(name, "feature"));

  const std::size_t n_rows = lines.size() - 1;
  const std::size_t m = feature_names.size();

  // First pass: collect cells and decide per feature column whether every
  // cell parses as a number. Columns that do not are categorical and get
  // integer codes in first-appearance order.
  std::vector<std::vector<std::string>> rows(n_rows);
  std::vector<bool> numeric(m, true);
  for (std::size_t r = 0; r < n_rows; ++r) {
    rows[r] = split_line(lines[r + 1]);
    if (rows[r].size() != header.size())
      throw std::runtime_error(origin + ": row " + std::to_string(r + 1) + " has " +
                               std::to_string(rows[r].size()) + " cells, header has " +
                               std::to_string(header.size()));
    for (std::size_t f = 0; f < m; ++f) {
      const std::string& cell = rows[r][static_cast<std::size_t>(feature_cols[f])];
      if (cell.empty())
        cell_error(origin, r + 1, feature_names[f], "missing value (imputation is not supported)");
      double unused;
      if (!parse_double(cell, unused)) numeric[f] = false;
    }
  }

  SurvivalDataset ds;
  ds.feature_names = feature_names;
  ds.feature_kinds.resize(m);
  for (std::size_t f = 0; f < m; ++f)
    ds.feature_kinds[f] = numeric[f] ? FeatureKind::numeric : FeatureKind::encoded_categorical;

  std::vector<std::unordered_map<std::string, double>> codes(m);
  ds.samples.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    Sample& sample = ds.samples[r];
    const std::string& time_cell = rows[r][static_cast<std::size_t>(time_col)];
    if (!parse_double(time_cell, sample.time))
      cell_error(origin, r + 1, schema.time_column, "cannot parse '" + time_cell + "' as a time");
    if (sample.time < 0.0)
      cell_error(origin, r + 1, schema.time_column, "negative time " + time_cell);

    const std::string& event_cell = rows[r][static_cast<std::size_t>(event_col)];
    if (!parse_event(event_cell, sample.event))
      cell_error(origin, r + 1, schema.event_column,
                 "event indicator must be 0/1 or false/true, got '" + event_cell + "'");

    sample.features.resize(static_cast<Eigen::Index>(m));
    for (std::size_t f = 0; f < m; ++f) {
      const std::string& cell = rows[r][static_cast<std::size_t>(feature_cols[f])];
      if (numeric[f]) {
        double v;
        if (!parse_double(cell, v))
          cell_error(origin, r + 1, feature_names[f], "cannot parse '" + cell + "' as a number");
        sample.features[static_cast<Eigen::Index>(f)] = v;
      } else {
        auto [it, inserted] = codes[f].emplace(cell, static_cast<double>(codes[f].size()));
        (void)inserted;
        sample.features[static_cast<Eigen::Index>(f)] = it->second;
      }
    }
  }
  return ds;
}

SurvivalDataset load_csv(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path);
}

std::pair<SurvivalDataset, SurvivalDataset> train_test_split(const SurvivalDataset& ds,
                                                             double train_fraction,
                                                             std::uint64_t seed) {
  const int n = ds.n();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must lie in (0, 1)");
  const int train_n = static_cast<int>(std::llround(train_fraction * n));
  if (train_n < 2 || train_n >= n)
    throw std::invalid_argument("train_test_split: fraction " + std::to_string(train_fraction) +
                                " leaves a degenerate part (train " + std::to_string(train_n) +
                                " of " + std::to_string(n) + ")");

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<int> train_idx(order.begin(), order.begin() + train_n);
  std::vector<int> test_idx(order.begin() + train_n, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<int>& idx) {
    SurvivalDataset part;
    part.feature_names = ds.feature_names;
    part.feature_kinds = ds.feature_kinds;
    part.samples.reserve(idx.size());
    for (int i : idx) part.samples.push_back(ds.samples[static_cast<std::size_t>(i)]);
    return part;
  };
  SurvivalDataset train = take(train_idx);
  SurvivalDataset test = take(test_idx);
  if (train.count_events() == 0)
    throw std::invalid_argument("train_test_split: training part drew no events under seed " +
                                std::to_string(seed));
  return {std::move(train), std::move(test)};
}

BootstrapDraw bootstrap_sample(const SurvivalDataset& ds, std::uint64_t seed) {
  const int n = ds.n();
  if (n < 1) throw std::invalid_argument("bootstrap_sample: empty dataset");
  Rng rng(seed);
  BootstrapDraw draw;
  draw.in_bag.resize(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const int pick = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    draw.in_bag[static_cast<std::size_t>(i)] = pick;
    seen[static_cast<std::size_t>(pick)] = true;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[static_cast<std::size_t>(i)]) draw.oob.push_back(i);
  return draw;
}

PairSet admissible_pairs(const SurvivalDataset& ds) {
  PairSet out;
  const int n = ds.n();
  for (int i = 0; i < n; ++i) {
    if (!ds.samples[static_cast<std::size_t>(i)].event) continue;
    const double ti = ds.samples[static_cast<std::size_t>(i)].time;
    for (int j = 0; j < n; ++j) {
      if (ti < ds.samples[static_cast<std::size_t>(j)].time) out.pairs.emplace_back(i, j);
    }
  }
  out.total = out.pairs.size();
  return out;
}

}  // namespace wrsf::data
