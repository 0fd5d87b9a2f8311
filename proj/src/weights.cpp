#include "wrsf/weights.hpp"

#include "wrsf/rng.hpp"
#include "wrsf/survival_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wrsf::weights {

WeightVector sanitize_weight_vector(WeightVector w) {
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    if (w[q] < 0.0) {
      if (w[q] < -1e-12)
        throw std::invalid_argument("weight vector has a negative entry beyond roundoff: " +
                                    std::to_string(w[q]));
      w[q] = 0.0;
    }
  }
  if (std::abs(w.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("weight vector sums to " + std::to_string(w.sum()) +
                                ", expected 1");
  return w;
}

PairDifferenceMatrix::PairDifferenceMatrix(Eigen::MatrixXd values,
                                           std::vector<std::pair<int, int>> pairs,
                                           TimePolicy policy) {
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= values.rows() || j >= values.rows())
      throw std::invalid_argument("PairDifferenceMatrix: pair index out of range");
  }
  if (!values.allFinite())
    throw std::invalid_argument("PairDifferenceMatrix: non-finite hazard value");
  factored_ = true;
  values_ = std::move(values);
  pairs_ = std::move(pairs);
  policy_ = std::move(policy);
}

PairDifferenceMatrix PairDifferenceMatrix::from_dense(Eigen::MatrixXd differences) {
  if (!differences.allFinite())
    throw std::invalid_argument("PairDifferenceMatrix: non-finite difference value");
  PairDifferenceMatrix d;
  d.factored_ = false;
  d.dense_ = std::move(differences);
  return d;
}

Eigen::Index PairDifferenceMatrix::rows() const {
  return factored_ ? static_cast<Eigen::Index>(pairs_.size()) : dense_.rows();
}

Eigen::Index PairDifferenceMatrix::cols() const {
  return factored_ ? values_.cols() : dense_.cols();
}

Eigen::VectorXd PairDifferenceMatrix::row(Eigen::Index r) const {
  if (r < 0 || r >= rows()) throw std::invalid_argument("PairDifferenceMatrix: row out of range");
  if (!factored_) return dense_.row(r);
  const auto& [i, j] = pairs_[static_cast<std::size_t>(r)];
  return values_.row(i) - values_.row(j);
}

Eigen::MatrixXd PairDifferenceMatrix::dense() const {
  if (!factored_) return dense_;
  Eigen::MatrixXd d(rows(), cols());
  for (Eigen::Index r = 0; r < rows(); ++r) d.row(r) = row(r);
  return d;
}

Eigen::VectorXd PairDifferenceMatrix::apply(const Eigen::VectorXd& w) const {
  if (w.size() != cols())
    throw std::invalid_argument("PairDifferenceMatrix::apply: weight length " +
                                std::to_string(w.size()) + " does not match source count " +
                                std::to_string(cols()));
  if (!factored_) return dense_ * w;
  const Eigen::VectorXd scores = values_ * w;
  Eigen::VectorXd z(rows());
  for (Eigen::Index r = 0; r < z.size(); ++r) {
    const auto& [i, j] = pairs_[static_cast<std::size_t>(r)];
    z[r] = scores[i] - scores[j];
  }
  return z;
}

Eigen::VectorXd PairDifferenceMatrix::active_row_sum(const Eigen::VectorXd& z) const {
  if (z.size() != rows())
    throw std::invalid_argument("PairDifferenceMatrix::active_row_sum: length mismatch");
  if (!factored_) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(cols());
    for (Eigen::Index r = 0; r < z.size(); ++r)
      if (z[r] > 0.0) g += dense_.row(r);
    return g;
  }
  // Scatter the pair activity onto samples, then one product with values.
  Eigen::VectorXd activity = Eigen::VectorXd::Zero(values_.rows());
  for (Eigen::Index r = 0; r < z.size(); ++r) {
    if (z[r] > 0.0) {
      const auto& [i, j] = pairs_[static_cast<std::size_t>(r)];
      activity[i] += 1.0;
      activity[j] -= 1.0;
    }
  }
  return values_.transpose() * activity;
}

bool PairDifferenceMatrix::is_zero() const {
  for (Eigen::Index r = 0; r < rows(); ++r) {
    if (factored_) {
      const auto& [i, j] = pairs_[static_cast<std::size_t>(r)];
      if (!(values_.row(i) - values_.row(j)).isZero(0.0)) return false;
    } else if (!dense_.row(r).isZero(0.0)) {
      return false;
    }
  }
  return true;
}

namespace {

// Per-sample per-source policy values; sources indexed by `source_chf`.
template <typename SourceChf>
Eigen::MatrixXd policy_value_matrix(const SurvivalDataset& ds, int n_sources,
                                    const TimePolicy& policy, SourceChf&& source_chf) {
  Eigen::MatrixXd values(ds.n(), n_sources);
  for (int i = 0; i < ds.n(); ++i) {
    const data::Sample& sample = ds.samples[static_cast<std::size_t>(i)];
    for (int s = 0; s < n_sources; ++s)
      values(i, s) = policy_value(source_chf(s, sample.features), sample.time, policy);
  }
  return values;
}

void check_pairs(const PairSet& pairs) {
  if (pairs.pairs.empty())
    throw std::invalid_argument("build_pair_differences: empty pair set, nothing to optimize");
}

}  // namespace

PairDifferenceMatrix build_pair_differences(const Forest& forest, const SurvivalDataset& ds,
                                            const PairSet& pairs, const TimePolicy& policy) {
  check_pairs(pairs);
  Eigen::MatrixXd values = policy_value_matrix(
      ds, forest.size(), policy,
      [&](int q, const Eigen::VectorXd& x) -> const StepFunction& {
        return predict_chf(forest.trees[static_cast<std::size_t>(q)], x);
      });
  return PairDifferenceMatrix(std::move(values), pairs.pairs, policy);
}

PairDifferenceMatrix build_pair_differences(const GroupedForest& grouped,
                                            const SurvivalDataset& ds, const PairSet& pairs,
                                            const TimePolicy& policy) {
  check_pairs(pairs);
  const Forest& forest = *grouped.parent;
  // A group's policy value is the mean of its members' values: evaluation at
  // fixed times commutes with averaging the curves.
  Eigen::MatrixXd tree_values = policy_value_matrix(
      ds, forest.size(), policy,
      [&](int q, const Eigen::VectorXd& x) -> const StepFunction& {
        return predict_chf(forest.trees[static_cast<std::size_t>(q)], x);
      });
  Eigen::MatrixXd group_values(ds.n(), grouped.groups);
  for (int k = 0; k < grouped.groups; ++k) {
    group_values.col(k) =
        tree_values.middleCols(k * grouped.group_size, grouped.group_size).rowwise().sum() /
        static_cast<double>(grouped.group_size);
  }
  return PairDifferenceMatrix(std::move(group_values), pairs.pairs, policy);
}

PairSet sample_constraints(const PairSet& pairs, long k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("sample_constraints: K must be >= 1");
  const long total = static_cast<long>(pairs.pairs.size());
  if (k >= total) return pairs;
  Rng rng(seed);
  std::vector<int> picks = rng.sample_without_replacement(static_cast<int>(total),
                                                          static_cast<int>(k));
  PairSet out;
  out.pairs.reserve(static_cast<std::size_t>(k));
  for (int p : picks) out.pairs.push_back(pairs.pairs[static_cast<std::size_t>(p)]);
  out.total = out.pairs.size();
  return out;
}

WeightVector project_simplex(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("project_simplex: empty vector");
  if (!v.allFinite()) throw std::invalid_argument("project_simplex: non-finite input");
  // Sort descending, find the last index where u_k - (cumsum - 1)/k stays
  // positive; that prefix supports the projection.
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  int support = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) {
      tau = candidate;
      support = static_cast<int>(k + 1);
    }
  }
  (void)support;
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

namespace {

double qp_objective(const PairDifferenceMatrix& d, double lambda, const Eigen::VectorXd& w,
                    Eigen::VectorXd* z_out = nullptr) {
  Eigen::VectorXd z = d.apply(w);
  const double hinge = z.cwiseMax(0.0).sum();
  if (z_out != nullptr) *z_out = std::move(z);
  return hinge + lambda * w.squaredNorm();
}

// On the region where the set of active hinges is fixed, the objective is the
// quadratic sum_{r in P} d_r . w + lambda |w|^2, whose simplex minimizer is
// proj(-sum_{r in P} d_r / (2 lambda)). Try the region of the current point
// (and its closure including boundary rows); accept only real improvements.
// This is an exact active-set subproblem and is what lets the solver land
// within oracle tolerance instead of stalling on small subgradient steps.
bool region_polish(const PairDifferenceMatrix& d, double lambda, Eigen::VectorXd& w,
                   double& objective) {
  bool improved_any = false;
  for (int round = 0; round < 50; ++round) {
    const Eigen::VectorXd z = d.apply(w);
    bool improved = false;
    for (const double boundary : {0.0, -1e-10}) {
      // active_row_sum uses a strict z > 0 test; shifting z widens the region
      // to also pull in rows sitting (numerically) on the kink itself.
      const Eigen::VectorXd direction = d.active_row_sum((z.array() - boundary).matrix());
      const Eigen::VectorXd candidate = project_simplex(-direction / (2.0 * lambda));
      const double candidate_objective = qp_objective(d, lambda, candidate);
      if (candidate_objective < objective - 1e-15) {
        w = candidate;
        objective = candidate_objective;
        improved = true;
        improved_any = true;
        break;
      }
    }
    if (!improved) break;
  }
  return improved_any;
}

}  // namespace

QPSolution optimize_weights_qp(const PairDifferenceMatrix& differences, double lambda,
                               const QPOptions& options) {
  if (!(lambda > 0.0)) throw std::invalid_argument("optimize_weights_qp: lambda must be positive");
  if (differences.rows() == 0)
    throw std::invalid_argument("optimize_weights_qp: empty difference matrix");

  const Eigen::Index n_sources = differences.cols();
  QPSolution solution;
  solution.lambda = lambda;

  auto finish = [&](Eigen::VectorXd w, long iterations, bool converged, std::string note) {
    Eigen::VectorXd z;
    solution.objective = qp_objective(differences, lambda, w, &z);
    solution.weights = sanitize_weight_vector(std::move(w));
    solution.xi = z.cwiseMax(0.0);
    solution.iterations = iterations;
    solution.converged = converged;
    solution.note = std::move(note);
    return solution;
  };

  if (n_sources == 1) return finish(Eigen::VectorXd::Ones(1), 0, true, "single source");
  if (differences.is_zero()) {
    // Only the ridge term is left; its simplex minimizer is the uniform vector.
    return finish(Eigen::VectorXd::Constant(n_sources, 1.0 / static_cast<double>(n_sources)), 0,
                  true, "degenerate all-zero differences; uniform weights minimize the ridge term");
  }

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_sources, 1.0 / static_cast<double>(n_sources));
  Eigen::VectorXd z;
  double best_objective = qp_objective(differences, lambda, w, &z);
  Eigen::VectorXd best_w = w;

  double step0 = options.initial_step;
  if (!(step0 > 0.0)) {
    const Eigen::VectorXd g0 = differences.active_row_sum(z) + 2.0 * lambda * w;
    step0 = std::sqrt(2.0) / std::max(g0.norm(), 1e-12);
  }

  long stalled = 0;
  long t = 0;
  bool converged = false;
  while (t < options.max_iterations) {
    ++t;
    const Eigen::VectorXd g = differences.active_row_sum(z) + 2.0 * lambda * w;
    w = project_simplex(w - (step0 / std::sqrt(static_cast<double>(t))) * g);
    const double objective = qp_objective(differences, lambda, w, &z);
    if (objective < best_objective - options.improvement_tolerance) {
      best_objective = objective;
      best_w = w;
      stalled = 0;
    } else if (++stalled >= options.stall_window) {
      if (region_polish(differences, lambda, best_w, best_objective)) {
        w = best_w;
        z = differences.apply(w);
        stalled = 0;
      } else {
        converged = true;
        break;
      }
    }
  }
  region_polish(differences, lambda, best_w, best_objective);
  return finish(std::move(best_w), t, converged,
                converged ? "" : "iteration budget exhausted before the stall criterion");
}

WeightVector optimize_weights_sigmoid(const PairDifferenceMatrix& differences,
                                      const SigmoidOptions& options) {
  if (differences.rows() == 0)
    throw std::invalid_argument("optimize_weights_sigmoid: empty difference matrix");
  const Eigen::Index n_sources = differences.cols();
  const double scale = 1.0 / static_cast<double>(differences.rows());

  // Surrogate concordance: mean of sigmoid(-d_r . w); larger is better.
  auto objective_of = [&](const Eigen::VectorXd& weights) {
    const Eigen::VectorXd z = differences.apply(weights);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < z.size(); ++r) sum += 1.0 / (1.0 + std::exp(z[r]));
    return sum * scale;
  };

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_sources, 1.0 / static_cast<double>(n_sources));
  double objective = objective_of(w);
  long flat_steps = 0;
  for (long t = 1; t <= options.iterations; ++t) {
    const Eigen::VectorXd z = differences.apply(w);
    // d/dw sigmoid(-d.w) = -sigmoid'(-d.w) * d; accumulate row by row.
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(n_sources);
    for (Eigen::Index r = 0; r < z.size(); ++r) {
      const double s = 1.0 / (1.0 + std::exp(z[r]));
      const double coeff = -s * (1.0 - s) * scale;
      gradient += coeff * differences.row(r);
    }
    double step = options.initial_step / std::sqrt(static_cast<double>(t));
    bool accepted = false;
    while (step > 1e-14) {
      const Eigen::VectorXd candidate = project_simplex(w + step * gradient);
      const double candidate_objective = objective_of(candidate);
      if (candidate_objective >= objective) {  // ascent never gives ground
        const bool strict = candidate_objective > objective;
        w = candidate;
        objective = candidate_objective;
        accepted = true;
        flat_steps = strict ? 0 : flat_steps + 1;
        break;
      }
      step /= 2.0;
    }
    if (!accepted || flat_steps >= 20) break;  // stationary (or cycling on a plateau)
  }
  return sanitize_weight_vector(std::move(w));
}

StepFunction weighted_chf(const Forest& forest, const WeightVector& w, const Eigen::VectorXd& x) {
  if (w.size() != forest.size())
    throw std::invalid_argument("weighted_chf: weight length " + std::to_string(w.size()) +
                                " does not match tree count " + std::to_string(forest.size()));
  std::vector<const StepFunction*> leaves;
  leaves.reserve(forest.trees.size());
  for (const tree::SurvivalTree& t : forest.trees) leaves.push_back(&predict_chf(t, x));
  return combine_step_functions(leaves, w);
}

StepFunction weighted_chf(const GroupedForest& grouped, const WeightVector& w,
                          const Eigen::VectorXd& x) {
  if (w.size() != grouped.groups)
    throw std::invalid_argument("weighted_chf: weight length " + std::to_string(w.size()) +
                                " does not match group count " + std::to_string(grouped.groups));
  const Forest& forest = *grouped.parent;
  // sum_k w_k * mean(group k) = sum_q (w_{group(q)} / g) * tree_q.
  Eigen::VectorXd coeffs(forest.size());
  for (int q = 0; q < forest.size(); ++q)
    coeffs[q] = w[q / grouped.group_size] / static_cast<double>(grouped.group_size);
  std::vector<const StepFunction*> leaves;
  leaves.reserve(forest.trees.size());
  for (const tree::SurvivalTree& t : forest.trees) leaves.push_back(&predict_chf(t, x));
  return combine_step_functions(leaves, coeffs);
}

}  // namespace wrsf::weights
