#pragma once

#include "baybn/bagus.hpp"
#include "baybn/model.hpp"

#include <string>
#include <vector>

namespace baybn {

struct Dataset;

struct LearnOptions {
  // Start each step from the previous fit's principal submatrix instead of
  // the diagonal initializer.
  bool warm_start = false;
  // Steps whose two smallest diagonal entries differ by less than this are
  // flagged as near ties.
  double gap_tolerance = 1e-6;
};

/// Per-step record of the backward elimination.
struct StepDiagnostic {
  int chosen = -1;                 // original column index
  std::vector<int> remaining;      // original indices fitted at this step
  std::vector<double> diagonal;    // fitted precision diagonal, aligned with `remaining`
  std::vector<double> inclusion;   // chosen row of the inclusion matrix, aligned with `remaining`
  std::vector<int> parents;        // original indices
  double diagonal_gap = 0.0;       // second smallest minus smallest diagonal
  bool near_tie = false;
  bool converged = true;
  int iters = 0;
  std::vector<std::string> warnings;
};

struct ScoredEdge {
  Edge edge;
  double inclusion = 1.0;
};

struct LearnResult {
  Ordering ordering;              // ordering[0] is the estimated source end
  std::vector<ScoredEdge> edges;  // sorted by (from, to)
  std::vector<StepDiagnostic> steps;
  BagusConfig config;
  LearnOptions options;

  Dag dag() const;
};

// Backward elimination: at each step fit the spike-and-slab MAP precision on
// the remaining variables, take the smallest diagonal entry (ties go to the
// lowest original index) as the next sink, and keep as its parents the
// remaining variables whose inclusion probability reaches the threshold.
// `n` is the sample count behind sigma_hat. Throws ConfigError for p = 0.
LearnResult learn_structure(const Matrix& sigma_hat, double n, const BagusConfig& config,
                            const LearnOptions& options = {});
LearnResult learn_structure(const Dataset& data, const BagusConfig& config,
                            const LearnOptions& options = {});

// Same elimination without parent bookkeeping; `edges` is left empty and the
// step parents/inclusion vectors are not filled.
LearnResult learn_ordering_only(const Matrix& sigma_hat, double n, const BagusConfig& config,
                                const LearnOptions& options = {});
LearnResult learn_ordering_only(const Dataset& data, const BagusConfig& config,
                                const LearnOptions& options = {});

}  // namespace baybn
