#include "baybn/learner.hpp"

#include "baybn/datagen.hpp"
#include "baybn/errors.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace baybn {

Dag LearnResult::dag() const {
  std::vector<Edge> e;
  e.reserve(edges.size());
  for (const auto& se : edges) e.push_back(se.edge);
  return Dag(static_cast<int>(ordering.size()), e);
}

namespace {

LearnResult eliminate(const Matrix& sigma_hat, double n, const BagusConfig& config,
                      const LearnOptions& options, bool with_parents) {
  const auto p = static_cast<int>(sigma_hat.rows());
  if (p == 0) throw ConfigError("cannot learn a graph with zero variables");
  if (sigma_hat.cols() != p) throw ConfigError("sample covariance must be square");
  validate(config);

  LearnResult result;
  result.config = config;
  result.options = options;
  result.ordering.assign(static_cast<std::size_t>(p), -1);

  std::vector<int> remaining(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) remaining[v] = v;

  std::optional<Matrix> warm;
  for (int r = 1; r <= p - 1; ++r) {
    const Matrix sub = principal_submatrix(sigma_hat, remaining);
    PrecisionFit fit = fit_map(sub, n, config, warm);

    const auto m = static_cast<int>(remaining.size());
    int best = 0;  // `remaining` is ascending, so the first minimum is the lowest index
    for (int i = 1; i < m; ++i)
      if (fit.omega(i, i) < fit.omega(best, best)) best = i;
    double second = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
      if (i != best) second = std::min(second, fit.omega(i, i));

    StepDiagnostic step;
    step.chosen = remaining[best];
    step.remaining = remaining;
    step.diagonal.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) step.diagonal[i] = fit.omega(i, i);
    step.diagonal_gap = second - fit.omega(best, best);
    step.near_tie = step.diagonal_gap < options.gap_tolerance;
    step.converged = fit.converged;
    step.iters = fit.iters;
    step.warnings = fit.warnings;
    if (n < m) step.warnings.push_back("fewer samples than variables at this step");

    if (with_parents) {
      step.inclusion.resize(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        step.inclusion[i] = fit.inclusion(best, i);
        if (i != best && fit.inclusion(best, i) >= config.threshold) {
          step.parents.push_back(remaining[i]);
          result.edges.push_back({{remaining[i], step.chosen}, fit.inclusion(best, i)});
        }
      }
    }

    result.ordering[static_cast<std::size_t>(p - r)] = step.chosen;
    result.steps.push_back(std::move(step));

    if (options.warm_start) {
      std::vector<int> keep;
      for (int i = 0; i < m; ++i)
        if (i != best) keep.push_back(i);
      warm = principal_submatrix(fit.omega, keep);
    }
    remaining.erase(remaining.begin() + best);
  }
  result.ordering[0] = remaining.front();

  std::sort(result.edges.begin(), result.edges.end(),
            [](const ScoredEdge& a, const ScoredEdge& b) { return a.edge < b.edge; });
  return result;
}

}  // namespace

LearnResult learn_structure(const Matrix& sigma_hat, double n, const BagusConfig& config,
                            const LearnOptions& options) {
  return eliminate(sigma_hat, n, config, options, true);
}

LearnResult learn_structure(const Dataset& data, const BagusConfig& config,
                            const LearnOptions& options) {
  return learn_structure(sample_covariance(data), static_cast<double>(data.x.rows()), config,
                         options);
}

LearnResult learn_ordering_only(const Matrix& sigma_hat, double n, const BagusConfig& config,
                                const LearnOptions& options) {
  return eliminate(sigma_hat, n, config, options, false);
}

LearnResult learn_ordering_only(const Dataset& data, const BagusConfig& config,
                                const LearnOptions& options) {
  return learn_ordering_only(sample_covariance(data), static_cast<double>(data.x.rows()), config,
                             options);
}

}  // namespace baybn
