#include "wrsf/model_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wrsf::ensemble {

namespace {

constexpr const char* kMagic = "wrsf-forest v1";

// Hex floats round-trip exactly: the loader recovers the same bits, and
// re-serializing prints the same characters.
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::string kind_name(data::FeatureKind kind) {
  return kind == data::FeatureKind::numeric ? "numeric" : "categorical";
}

data::FeatureKind kind_from_name(const std::string& name, const std::string& context) {
  if (name == "numeric") return data::FeatureKind::numeric;
  if (name == "categorical") return data::FeatureKind::encoded_categorical;
  throw std::runtime_error(context + ": unknown feature kind '" + name + "'");
}

void write_leaf(std::ostream& out, const tree::LeafEstimate& leaf) {
  out << "leaf\n";
  out << "knots " << leaf.chf.knots.size();
  for (Eigen::Index k = 0; k < leaf.chf.knots.size(); ++k)
    out << ' ' << format_double(leaf.chf.knots[k]);
  out << "\nvalues " << leaf.chf.values.size();
  for (Eigen::Index k = 0; k < leaf.chf.values.size(); ++k)
    out << ' ' << format_double(leaf.chf.values[k]);
  out << "\ndeath_times " << leaf.death_times.size();
  for (Eigen::Index k = 0; k < leaf.death_times.size(); ++k)
    out << ' ' << format_double(leaf.death_times[k]);
  out << "\ndeaths " << leaf.deaths.size();
  for (Eigen::Index k = 0; k < leaf.deaths.size(); ++k) out << ' ' << leaf.deaths[k];
  out << "\nat_risk " << leaf.at_risk.size();
  for (Eigen::Index k = 0; k < leaf.at_risk.size(); ++k) out << ' ' << leaf.at_risk[k];
  out << "\nunique_deaths " << leaf.unique_deaths << '\n';
}

// Pulls whitespace-separated tokens off one line of the model file and
// reports malformed lines with their line number.
class LineReader {
 public:
  LineReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  std::string next_line() {
    std::string line;
    if (!std::getline(in_, line)) throw error("unexpected end of file");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // Reads a line of the form "<keyword> <tok> <tok> ...".
  std::vector<std::string> record(const std::string& keyword) {
    const std::string line = next_line();
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != keyword)
      throw error("expected '" + keyword + "', found '" + head + "'");
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
  }

  long as_long(const std::string& tok) const {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0')
      throw error("malformed integer '" + tok + "'");
    return v;
  }

  std::uint64_t as_u64(const std::string& tok) const {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0')
      throw error("malformed integer '" + tok + "'");
    return v;
  }

  double as_double(const std::string& tok) const {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw error("malformed number '" + tok + "'");
    return v;
  }

  std::runtime_error error(const std::string& what) const {
    return std::runtime_error(origin_ + ": line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::string origin_;
  long line_no_ = 0;
};

// A counted record: "<keyword> <count> <v0> <v1> ...".
std::vector<std::string> counted(LineReader& reader, const std::string& keyword) {
  std::vector<std::string> tokens = reader.record(keyword);
  if (tokens.empty()) throw reader.error("'" + keyword + "' is missing its count");
  const long count = reader.as_long(tokens.front());
  if (count < 0 || static_cast<std::size_t>(count) + 1 != tokens.size())
    throw reader.error("'" + keyword + "' announces " + tokens.front() + " entries but carries " +
                       std::to_string(tokens.size() - 1));
  tokens.erase(tokens.begin());
  return tokens;
}

Eigen::VectorXd read_double_vector(LineReader& reader, const std::string& keyword) {
  const std::vector<std::string> tokens = counted(reader, keyword);
  Eigen::VectorXd v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t k = 0; k < tokens.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = reader.as_double(tokens[k]);
  return v;
}

Eigen::VectorXi read_int_vector(LineReader& reader, const std::string& keyword) {
  const std::vector<std::string> tokens = counted(reader, keyword);
  Eigen::VectorXi v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t k = 0; k < tokens.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = static_cast<int>(reader.as_long(tokens[k]));
  return v;
}

std::vector<int> read_index_list(LineReader& reader, const std::string& keyword) {
  const std::vector<std::string> tokens = counted(reader, keyword);
  std::vector<int> v(tokens.size());
  for (std::size_t k = 0; k < tokens.size(); ++k)
    v[k] = static_cast<int>(reader.as_long(tokens[k]));
  return v;
}

}  // namespace

void save_model(std::ostream& out, const SavedModel& model) {
  const Forest& forest = model.forest;
  if (static_cast<int>(model.feature_names.size()) != forest.n_features ||
      model.feature_names.size() != model.feature_kinds.size())
    throw std::invalid_argument("save_model: feature metadata does not match the forest");
  if (model.weights.has_value()) {
    if (model.weight_groups < 1 || model.weights->size() != model.weight_groups)
      throw std::invalid_argument("save_model: weight vector does not match weight_groups");
    if (forest.size() % model.weight_groups != 0)
      throw std::invalid_argument("save_model: weight_groups must divide the tree count");
  } else if (model.weight_groups != 0) {
    throw std::invalid_argument("save_model: weight_groups set but no weights stored");
  }

  out << kMagic << '\n';
  out << "params " << tree::to_string(forest.params.rule) << ' '
      << forest.params.min_unique_deaths << ' ' << forest.params.mtry << ' '
      << forest.params.max_depth << ' ' << forest.params.seed << ' ' << forest.params.trees
      << '\n';
  out << "n_features " << forest.n_features << '\n';
  out << "feature_count " << model.feature_names.size() << '\n';
  for (std::size_t f = 0; f < model.feature_names.size(); ++f)
    out << model.feature_names[f] << '\n' << kind_name(model.feature_kinds[f]) << '\n';

  out << "weights " << model.weight_groups;
  if (model.weights.has_value())
    for (Eigen::Index k = 0; k < model.weights->size(); ++k)
      out << ' ' << format_double((*model.weights)[k]);
  out << '\n';

  out << "tree_count " << forest.trees.size() << '\n';
  for (std::size_t q = 0; q < forest.trees.size(); ++q) {
    const tree::SurvivalTree& t = forest.trees[q];
    out << "tree " << q << ' ' << t.seed << '\n';
    out << "tree_params " << tree::to_string(t.params.rule) << ' ' << t.params.min_unique_deaths
        << ' ' << t.params.mtry << ' ' << t.params.max_depth << ' ' << t.n_features << '\n';
    out << "in_bag " << t.in_bag.size();
    for (int i : t.in_bag) out << ' ' << i;
    out << "\noob " << t.oob.size();
    for (int i : t.oob) out << ' ' << i;
    out << "\nnodes " << t.nodes.size() << '\n';
    for (const tree::TreeNode& node : t.nodes)
      out << node.feature << ' ' << format_double(node.threshold) << ' ' << node.left << ' '
          << node.right << ' ' << node.leaf << '\n';
    out << "leaves " << t.leaves.size() << '\n';
    for (const tree::LeafEstimate& leaf : t.leaves) write_leaf(out, leaf);
  }
  out << "end\n";
  if (!out) throw std::runtime_error("save_model: write failed");
}

void save_model(const std::string& path, const SavedModel& model) {
  std::ofstream out(path, std::ios::binary);  // binary: keep '\n' exactly as written
  if (!out) throw std::runtime_error("save_model: cannot open '" + path + "' for writing");
  save_model(out, model);
  out.flush();
  if (!out) throw std::runtime_error("save_model: write to '" + path + "' failed");
}

SavedModel load_model(std::istream& in, const std::string& origin) {
  LineReader reader(in, origin);
  if (reader.next_line() != kMagic)
    throw reader.error(std::string("not a model file (expected '") + kMagic + "' header)");

  SavedModel model;
  Forest& forest = model.forest;

  {
    const auto tokens = reader.record("params");
    if (tokens.size() != 6) throw reader.error("'params' expects 6 fields");
    forest.params.rule = tree::split_rule_from_string(tokens[0]);
    forest.params.min_unique_deaths = static_cast<int>(reader.as_long(tokens[1]));
    forest.params.mtry = static_cast<int>(reader.as_long(tokens[2]));
    forest.params.max_depth = static_cast<int>(reader.as_long(tokens[3]));
    forest.params.seed = reader.as_u64(tokens[4]);
    forest.params.trees = static_cast<int>(reader.as_long(tokens[5]));
  }
  {
    const auto tokens = reader.record("n_features");
    if (tokens.size() != 1) throw reader.error("'n_features' expects 1 field");
    forest.n_features = static_cast<int>(reader.as_long(tokens[0]));
  }
  {
    const auto tokens = reader.record("feature_count");
    if (tokens.size() != 1) throw reader.error("'feature_count' expects 1 field");
    const long count = reader.as_long(tokens[0]);
    if (count != forest.n_features)
      throw reader.error("feature_count disagrees with n_features");
    for (long f = 0; f < count; ++f) {
      model.feature_names.push_back(reader.next_line());  // names may contain spaces
      model.feature_kinds.push_back(kind_from_name(reader.next_line(), origin));
    }
  }
  {
    auto tokens = reader.record("weights");
    if (tokens.empty()) throw reader.error("'weights' is missing its group count");
    const long groups = reader.as_long(tokens.front());
    model.weight_groups = static_cast<int>(groups);
    if (groups < 0 || static_cast<std::size_t>(groups) + 1 != tokens.size())
      throw reader.error("'weights' announces " + tokens.front() + " entries but carries " +
                         std::to_string(tokens.size() - 1));
    if (groups > 0) {
      Eigen::VectorXd w(groups);
      for (long k = 0; k < groups; ++k)
        w[k] = reader.as_double(tokens[static_cast<std::size_t>(k) + 1]);
      model.weights = std::move(w);
    }
  }

  const auto tree_count_tokens = reader.record("tree_count");
  if (tree_count_tokens.size() != 1) throw reader.error("'tree_count' expects 1 field");
  const long tree_count = reader.as_long(tree_count_tokens[0]);
  if (tree_count < 0) throw reader.error("negative tree count");

  forest.trees.reserve(static_cast<std::size_t>(tree_count));
  for (long q = 0; q < tree_count; ++q) {
    tree::SurvivalTree t;
    {
      const auto tokens = reader.record("tree");
      if (tokens.size() != 2) throw reader.error("'tree' expects an index and a seed");
      if (reader.as_long(tokens[0]) != q)
        throw reader.error("tree records out of order (found index " + tokens[0] + ")");
      t.seed = reader.as_u64(tokens[1]);
    }
    {
      const auto tokens = reader.record("tree_params");
      if (tokens.size() != 5) throw reader.error("'tree_params' expects 5 fields");
      t.params.rule = tree::split_rule_from_string(tokens[0]);
      t.params.min_unique_deaths = static_cast<int>(reader.as_long(tokens[1]));
      t.params.mtry = static_cast<int>(reader.as_long(tokens[2]));
      t.params.max_depth = static_cast<int>(reader.as_long(tokens[3]));
      t.n_features = static_cast<int>(reader.as_long(tokens[4]));
    }
    t.in_bag = read_index_list(reader, "in_bag");
    t.oob = read_index_list(reader, "oob");

    const auto node_tokens = reader.record("nodes");
    if (node_tokens.size() != 1) throw reader.error("'nodes' expects 1 field");
    const long node_count = reader.as_long(node_tokens[0]);
    t.nodes.reserve(static_cast<std::size_t>(node_count));
    for (long i = 0; i < node_count; ++i) {
      const std::string line = reader.next_line();
      std::istringstream ss(line);
      std::string f, thr, l, r, leaf;
      if (!(ss >> f >> thr >> l >> r >> leaf))
        throw reader.error("malformed node record '" + line + "'");
      tree::TreeNode node;
      node.feature = static_cast<int>(reader.as_long(f));
      node.threshold = reader.as_double(thr);
      node.left = static_cast<int>(reader.as_long(l));
      node.right = static_cast<int>(reader.as_long(r));
      node.leaf = static_cast<int>(reader.as_long(leaf));
      t.nodes.push_back(node);
    }

    const auto leaf_tokens = reader.record("leaves");
    if (leaf_tokens.size() != 1) throw reader.error("'leaves' expects 1 field");
    const long leaf_count = reader.as_long(leaf_tokens[0]);
    t.leaves.reserve(static_cast<std::size_t>(leaf_count));
    for (long i = 0; i < leaf_count; ++i) {
      if (!reader.record("leaf").empty()) throw reader.error("'leaf' takes no fields");
      tree::LeafEstimate leaf;
      leaf.chf.knots = read_double_vector(reader, "knots");
      leaf.chf.values = read_double_vector(reader, "values");
      leaf.death_times = read_double_vector(reader, "death_times");
      leaf.deaths = read_int_vector(reader, "deaths");
      leaf.at_risk = read_int_vector(reader, "at_risk");
      const auto u = reader.record("unique_deaths");
      if (u.size() != 1) throw reader.error("'unique_deaths' expects 1 field");
      leaf.unique_deaths = static_cast<int>(reader.as_long(u[0]));
      if (leaf.chf.knots.size() != leaf.chf.values.size())
        throw reader.error("leaf knots/values length mismatch");
      t.leaves.push_back(std::move(leaf));
    }
    forest.trees.push_back(std::move(t));
  }
  if (reader.next_line() != "end") throw reader.error("missing 'end' marker");

  if (model.weights.has_value() && forest.size() > 0 &&
      forest.size() % model.weight_groups != 0)
    throw reader.error("stored weight_groups does not divide the tree count");
  return model;
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
  return load_model(in, path);
}

}  // namespace wrsf::ensemble
