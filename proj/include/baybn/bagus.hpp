#pragma once

// Spike-and-slab MAP estimation of a precision matrix.
//
// The prior on each off-diagonal entry is a two-component Laplace mixture
//   eta/(2 nu1) exp(-|x|/nu1) + (1-eta)/(2 nu0) exp(-|x|/nu0),   nu1 > nu0,
// and each diagonal entry has an exponential prior with rate tau. fit_map
// minimizes the negative log posterior
//   (n/2)[tr(S Omega) - log det Omega] + sum_{j<k} pen(Omega_jk) + tau tr(Omega)
// by EM: the E-step turns the mixture into per-entry l1 weights from the
// current inclusion probabilities, the M-step runs one pass of column-wise
// block coordinate descent on the weighted-l1 surrogate. The surrogate
// majorizes the objective (pen is concave in |x|), so accepted iterates never
// increase it.

#include "baybn/linalg.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace baybn {

struct BagusConfig {
  double nu0 = 0.01;
  double nu1 = 1.0;
  double eta = 0.5;
  double tau = 1e-4;
  double threshold = 0.5;
  // Upper bound B0 on the spectral norm; only monitored.
  std::optional<double> spectral_bound;
  int max_outer_iters = 100;
  double tol = 1e-4;
  int inner_max_iters = 200;
  double inner_tol = 1e-6;

  // nu0 = sqrt(1/(100 n)), nu1 = 1, tau = 1e-4, T = 0.5, eta = 0.5.
  static BagusConfig defaults_for(long n);
};

// Throws ConfigError unless nu1 > nu0 > 0, 0 < eta < 1, 0 < T < 1, tau > 0,
// tolerances > 0 and iteration limits >= 1.
void validate(const BagusConfig& config);

/// Result of fit_map.
struct PrecisionFit {
  Matrix omega;
  Matrix inclusion;  // diagonal set to 1
  std::vector<double> objective_trace;  // initial value, then one per outer iteration
  bool converged = false;
  int iters = 0;
  double spectral_norm = 0.0;
  std::vector<std::string> warnings;
};

// -log of the mixture prior density of one off-diagonal entry.
double spike_slab_penalty(double theta, const BagusConfig& config);

// d pen / d|theta|: the E-step weight p/nu1 + (1-p)/nu0.
double spike_slab_weight(double theta, const BagusConfig& config);

double inclusion_probability(double theta, const BagusConfig& config);

// Throws NumericError if omega is not SPD.
double negative_log_posterior(const Matrix& omega, const Matrix& sigma_hat, double n,
                              const BagusConfig& config);

// Largest violation of the first-order conditions of the objective at omega,
// with the penalty multiplied by `penalty_scale`. Zero entries use the
// subgradient interval of the l1 kink.
double stationarity_residual(const Matrix& omega, const Matrix& sigma_hat, double n,
                             const BagusConfig& config, double penalty_scale = 1.0);

// `initial` must be SPD when given; otherwise diag(1/(S_jj + eps)) is used.
PrecisionFit fit_map(const Matrix& sigma_hat, double n, const BagusConfig& config,
                     const std::optional<Matrix>& initial = std::nullopt);

/// Unordered pairs (j < k) with inclusion probability >= threshold.
std::vector<std::pair<int, int>> threshold_support(const PrecisionFit& fit, double threshold);

}  // namespace baybn
