#pragma once

#include "baybn/bagus.hpp"
#include "baybn/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace baybn {

/// Size of the symmetric difference of the directed edge sets.
/// Throws ConfigError when node counts differ.
int hamming_distance(const Dag& a, const Dag& b);

struct EdgeCounts {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
};
EdgeCounts edge_counts(const Dag& truth, const Dag& estimate);

// True iff peeling pi from the back always removes a sink of the remaining
// true graph, which is the same as pi being a topological order of dag.
bool ordering_correct(const Dag& dag, const Ordering& pi);

struct IdentifiabilityReport {
  Ordering ordering;  // true ordering the conditions were evaluated along
  bool forward_ok = true;
  bool backward_ok = true;
  // Minimum over steps and (ancestor | descendant) pairs; +inf when no pair exists.
  double forward_margin = 0.0;
  double backward_margin = 0.0;
  // Per-position minima (index r-1 for position r, +inf without pairs).
  std::vector<double> forward_step_margin;
  std::vector<double> backward_step_margin;
};

// Checks both selection conditions along `ordering` (default: the smallest
// topological order of the model's graph) using the exact covariance.
//  backward: [(Sigma_TT)^-1]_{l,l} - [(Sigma_TT)^-1]_{j,j} > 0 for every
//            position r, j = pi_r, T = {pi_1..pi_r}, l an ancestor of j;
//  forward:  condvar(k | S) - condvar(j | S) > 0 for every r, j = pi_r,
//            S = {pi_1..pi_{r-1}}, k a descendant of j.
IdentifiabilityReport check_identifiability(const LinearSemModel& model,
                                            std::optional<Ordering> ordering = std::nullopt);

/// Population quantities entering the consistency conditions.
struct TheoryReport {
  int p = 0;
  Ordering ordering;
  double k1 = 0.0;          // smallest eigenvalue of Sigma
  double k2 = 0.0;          // largest diagonal of Sigma
  double tau_min = 0.0;     // minimum backward gap
  double theta_min = 0.0;   // min |Omega^(r)_{jk}| over edges of each leading sub-graph; +inf without edges
  double M_Sigma = 0.0;     // ||Sigma||_inf
  double M_Gamma = 0.0;     // ||(Omega x Omega)_SS||_inf for the full precision
  double M_Gamma_max = 0.0; // max over r of the same norm for Omega^(r)
  double M_Gamma_min = 0.0; // min over r
  std::vector<double> M_Gamma_steps;  // r = 1..p-1
  int d = 0;                // max column non-zeros over all Omega^(r)
  int d_M = 0;              // max moral degree
  bool forward_ok = true;
  bool backward_ok = true;
  std::vector<Edge> cancelled_pairs;  // moral pairs with a structurally zero precision entry
};

inline constexpr int kTheoryMaxNodes = 60;

// Throws ConfigError for p > kTheoryMaxNodes.
TheoryReport theory_report(const LinearSemModel& model);

// ||(Omega x Omega)_{SS}||_inf with S the support of omega (|x| >= 1e-12),
// computed as max over (i,j) in S of (|Omega| 1_S |Omega|)_{ij}.
double restricted_kronecker_norm(const Matrix& omega);

// Max number of entries with |x| >= 1e-12 in any column.
int column_sparsity(const Matrix& omega);

enum class GraphKind { Chain, Star };
std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& name);

// Chain: X_{j+1} = beta X_j + eps;  star: X_{j+1} = beta X_1 + eps; equal variances.
LinearSemModel chain_model(int p, double beta, double sigma2);
LinearSemModel star_model(int p, double beta, double sigma2);
LinearSemModel reference_model(GraphKind kind, int p, double beta, double sigma2);

/// Closed-form values for the chain and star reference graphs.
struct ClosedForms {
  double M_Gamma_max = 0.0;
  double M_Gamma_min = 0.0;
  double M_Sigma = 0.0;
  std::optional<double> M_Sigma_upper;    // chain only, p-free bound
  std::optional<double> k1_bound;         // chain only
  std::optional<double> tau_min_bound;    // chain only
  std::optional<double> theta_min_bound;  // chain only
};

// Throws ConfigError for |beta| >= 1 on a chain or p < 2.
ClosedForms chain_star_closed_forms(GraphKind kind, int p, double beta, double sigma2);

struct Constraint {
  std::string name;
  bool satisfiable = false;
  std::string detail;
};

struct HyperparamRecommendation {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
  double epsilon1 = 0.0;
  BagusConfig config;  // nu0, nu1, eta, tau, threshold and spectral_bound filled in
  std::vector<Constraint> constraints;
  // Set when the values are formally admissible but unusable in practice:
  // 1 - T < 1e-3 or nu0 >= 1.
  std::vector<std::string> warnings;
  bool all_satisfiable() const;
};

// Builds C1 = C3/10, C2 = d theta_min / (2 M_Gamma_max), C3 from the six-way
// minimum, C4, then nu1 = p(1+eps1)/(n C3), nu0 = p/(n C4), tau = n C3/(2p),
// eta = nu1^2/(nu1^2 + nu0^2 eps1), T = nu0 eta/(nu1(1-eta) + nu0 eta), and
// reports per constraint whether it can be met. B0 is set to the midpoint of
// its admissible window when that window is non-empty.
HyperparamRecommendation recommend_hyperparams(const TheoryReport& report, double n,
                                               double epsilon1);

}  // namespace baybn
