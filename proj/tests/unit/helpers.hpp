#pragma once

#include "baybn/datagen.hpp"
#include "baybn/model.hpp"
#include "baybn/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace testing {

using namespace baybn;

// Random model with p in [lo, hi], a moral degree cap in [1, 3] and random
// per-node variances in [0.5, 3] unless `equal` is set.
inline LinearSemModel random_model(std::uint64_t seed, int lo, int hi, bool equal = false) {
  Rng rng(seed);
  const int p = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  const int cap = 1 + static_cast<int>(rng.below(3));
  const Dag g = generate_dag(p, cap, rng.next());
  const Matrix w = assign_weights(g, 0.5, 1.0, rng.next());
  Vector s2(p);
  for (int j = 0; j < p; ++j) s2(j) = equal ? 1.0 : rng.uniform(0.5, 3.0);
  return LinearSemModel::gaussian(w, s2);
}

// (I - B)^{-1} as the finite Neumann series sum_k B^k (B is nilpotent).
inline Matrix neumann_inverse(const Matrix& b) {
  const auto p = b.rows();
  Matrix term = Matrix::Identity(p, p), sum = Matrix::Identity(p, p);
  for (Eigen::Index k = 1; k < p; ++k) {
    term = term * b;
    sum += term;
  }
  return sum;
}

inline Matrix covariance_oracle(const LinearSemModel& m) {
  const Matrix a = neumann_inverse(m.weights);
  return a * m.sigma2.asDiagonal() * a.transpose();
}

// Every permutation of 0..p-1 that is a topological order, by brute force.
inline std::vector<Ordering> brute_force_orderings(const Dag& g) {
  Ordering pi(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) pi[i] = i;
  std::vector<Ordering> out;
  do {
    bool ok = true;
    for (int a = 0; a < g.size() && ok; ++a)
      for (int b = a + 1; b < g.size() && ok; ++b)
        if (g.has_edge(pi[b], pi[a])) ok = false;
    if (ok) out.push_back(pi);
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

}  // namespace testing
