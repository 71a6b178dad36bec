#pragma once

#include "baybn/linalg.hpp"

#include <compare>
#include <cstddef>
#include <variant>
#include <vector>

namespace baybn {

/// Directed edge `from -> to` between 0-based node indices.
struct Edge {
  int from = 0;
  int to = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Directed acyclic graph over nodes 0..p-1.
///
/// The adjacency matrix is indexed (parent, child). Construction rejects
/// self-loops, out-of-range endpoints and cycles with ConfigError.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int p);
  Dag(int p, const std::vector<Edge>& edges);

  int size() const { return p_; }
  bool has_edge(int from, int to) const { return adj_[index(from, to)] != 0; }

  // Sorted by (from, to).
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;
  std::vector<int> parents(int node) const;
  std::vector<int> children(int node) const;

  // Lexicographically smallest topological order (Kahn with a min-heap).
  std::vector<int> topological_order() const;

  // Sub-graph induced on `nodes`, relabelled to 0..|nodes|-1 in the given order.
  Dag induced(const std::vector<int>& nodes) const;

  // Adds parent->child links; throws ConfigError if this would close a cycle.
  void add_edge(int from, int to);

  bool operator==(const Dag& other) const = default;

 private:
  std::size_t index(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(p_) +
           static_cast<std::size_t>(to);
  }
  bool reaches(int from, int to) const;

  int p_ = 0;
  std::vector<char> adj_;
};

/// Undirected moral graph adjacency: parents, children and co-parents.
std::vector<std::vector<int>> moral_neighbors(const Dag& dag);

/// Maximum degree of the moral graph.
int moral_degree(const Dag& dag);

struct GaussianLaw {
  double variance = 1.0;
};
struct UniformLaw {
  double half_width = 1.0;
};
// Normal(0, variance) conditioned on (-bound, bound).
struct TruncatedGaussianLaw {
  double variance = 1.0;
  double bound = 1.0;
};
struct StudentTLaw {
  double df = 10.0;
};

using ErrorLaw = std::variant<GaussianLaw, UniformLaw, TruncatedGaussianLaw, StudentTLaw>;

// Variance of a zero-mean error law, in closed form.
double law_variance(const ErrorLaw& law);

/// Linear structural equation model X = B X + eps.
///
/// `weights(j, k)` is the weight of edge k -> j, so the support of `weights`
/// is the transpose of the DAG adjacency. Each node carries its own error law;
/// `sigma2(j)` must equal the variance of `laws[j]`.
struct LinearSemModel {
  Matrix weights;
  Vector sigma2;
  std::vector<ErrorLaw> laws;

  int size() const { return static_cast<int>(sigma2.size()); }

  // Builds a model with Gaussian errors of the given variances.
  static LinearSemModel gaussian(Matrix weights, Vector sigma2);
  // Builds a model whose sigma2 is taken from the error laws.
  static LinearSemModel with_laws(Matrix weights, std::vector<ErrorLaw> laws);

  // Graph implied by the non-zero pattern of `weights`.
  Dag dag() const;
  // Edge weight of from -> to, i.e. weights(to, from).
  double beta(int from, int to) const { return weights(to, from); }
};

// Throws ConfigError when shapes disagree, variances are not positive, the
// error-law variance does not match sigma2, or the weight support is cyclic.
void validate(const LinearSemModel& model);

/// Omega = (I - B)^T diag(1/sigma2) (I - B).
Matrix precision_from_model(const LinearSemModel& model);

/// Sigma = (I - B)^{-1} diag(sigma2) (I - B)^{-T}.
Matrix covariance_from_model(const LinearSemModel& model);

/// Entry Omega(k, j), j != k, from edge weights and common children only.
double precision_offdiag(const LinearSemModel& model, int j, int k);

/// (Sigma_{S,S})^{-1}: the precision of the marginal on `subset`, which is not
/// the same as a submatrix of the full precision.
Matrix sub_precision(const Matrix& sigma, const std::vector<int>& subset);
Matrix sub_precision(const LinearSemModel& model, const std::vector<int>& subset);

// Entries of an analytic precision with |x| below this are structural zeros.
inline constexpr double kStructuralZero = 1e-12;

// Moral-graph pairs (j < k) whose analytic precision entry cancels to a
// structural zero despite the adjacency.
std::vector<Edge> cancelled_moral_pairs(const LinearSemModel& model);

/// Permutation of 0..p-1; position r holds the r-th node.
using Ordering = std::vector<int>;

bool is_permutation_of_range(const Ordering& pi, int p);

// True iff every edge points forward in `pi`.
bool is_valid_ordering(const Dag& dag, const Ordering& pi);

// All topological orderings in lexicographic order; refuses p > 12.
std::vector<Ordering> topological_orderings(const Dag& dag);

}  // namespace baybn
