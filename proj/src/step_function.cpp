#include "wrsf/step_function.hpp"

#include <algorithm>
#include <stdexcept>

namespace wrsf {

double StepFunction::operator()(double t) const {
  const Eigen::Index n = knots.size();
  if (n == 0) return 0.0;
  // Index of the largest knot <= t.
  const double* begin = knots.data();
  const double* it = std::upper_bound(begin, begin + n, t);
  if (it == begin) return 0.0;  // t precedes every knot
  return values[static_cast<Eigen::Index>(it - begin) - 1];
}

StepFunction combine_step_functions(const std::vector<const StepFunction*>& sources,
                                    const Eigen::VectorXd& coeffs) {
  if (static_cast<Eigen::Index>(sources.size()) != coeffs.size())
    throw std::invalid_argument("combine_step_functions: one coefficient per source required");

  // Union of all knots. Knot times originate from shared observed times, so
  // exact equality is the right dedup notion.
  std::vector<double> knots;
  for (const StepFunction* f : sources) {
    if (f == nullptr) throw std::invalid_argument("combine_step_functions: null source");
    knots.insert(knots.end(), f->knots.data(), f->knots.data() + f->knots.size());
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  StepFunction out;
  const Eigen::Index k = static_cast<Eigen::Index>(knots.size());
  out.knots = Eigen::Map<const Eigen::VectorXd>(knots.data(), k);
  out.values = Eigen::VectorXd::Zero(k);

  // One cursor per source: index of the largest source knot <= current union
  // knot, or -1 while the union knot precedes the source's first knot.
  std::vector<Eigen::Index> cursor(sources.size(), -1);
  for (Eigen::Index u = 0; u < k; ++u) {
    const double t = knots[static_cast<std::size_t>(u)];
    double sum = 0.0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const StepFunction& f = *sources[s];
      Eigen::Index& c = cursor[s];
      while (c + 1 < f.knots.size() && f.knots[c + 1] <= t) ++c;
      if (c >= 0) sum += coeffs[static_cast<Eigen::Index>(s)] * f.values[c];
    }
    out.values[u] = sum;
  }
  return out;
}

}  // namespace wrsf
