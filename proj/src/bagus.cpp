#include "baybn/bagus.hpp"

#include "baybn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace baybn {

BagusConfig BagusConfig::defaults_for(long n) {
  if (n < 1) throw ConfigError("sample count must be positive");
  BagusConfig c;
  c.nu0 = std::sqrt(1.0 / (100.0 * static_cast<double>(n)));
  c.nu1 = 1.0;
  c.tau = 1e-4;
  c.threshold = 0.5;
  c.eta = 0.5;
  return c;
}

void validate(const BagusConfig& c) {
  if (!(c.nu0 > 0.0)) throw ConfigError("nu0 must be positive");
  if (!(c.nu1 > c.nu0)) throw ConfigError("nu1 must exceed nu0");
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (!(c.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(c.tol > 0.0) || !(c.inner_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (c.max_outer_iters < 1 || c.inner_max_iters < 1) {
    throw ConfigError("iteration limits must be at least 1");
  }
  if (c.spectral_bound && !(*c.spectral_bound > 0.0)) {
    throw ConfigError("spectral bound must be positive");
  }
}

namespace {

// log of the slab and spike component densities at |theta|.
std::pair<double, double> log_components(double theta, const BagusConfig& c) {
  const double a = std::abs(theta);
  return {std::log(c.eta / (2.0 * c.nu1)) - a / c.nu1,
          std::log((1.0 - c.eta) / (2.0 * c.nu0)) - a / c.nu0};
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double spike_slab_penalty(double theta, const BagusConfig& c) {
  auto [slab, spike] = log_components(theta, c);
  const double m = std::max(slab, spike);
  return -(m + std::log(std::exp(slab - m) + std::exp(spike - m)));
}

double inclusion_probability(double theta, const BagusConfig& c) {
  auto [slab, spike] = log_components(theta, c);
  return logistic(slab - spike);
}

double spike_slab_weight(double theta, const BagusConfig& c) {
  const double p = inclusion_probability(theta, c);
  return p / c.nu1 + (1.0 - p) / c.nu0;
}

double negative_log_posterior(const Matrix& omega, const Matrix& sigma_hat, double n,
                              const BagusConfig& c) {
  const double log_det = spd_log_det(omega);
  const double trace = (sigma_hat.cwiseProduct(omega)).sum();
  double pen = 0.0;
  for (Eigen::Index k = 1; k < omega.cols(); ++k)
    for (Eigen::Index j = 0; j < k; ++j) pen += spike_slab_penalty(omega(j, k), c);
  return 0.5 * n * (trace - log_det) + pen + c.tau * omega.trace();
}

double stationarity_residual(const Matrix& omega, const Matrix& sigma_hat, double n,
                             const BagusConfig& c, double penalty_scale) {
  const Matrix w = spd_inverse(omega);
  const auto p = omega.rows();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    worst = std::max(worst, std::abs(0.5 * n * (sigma_hat(j, j) - w(j, j)) + c.tau));
    for (Eigen::Index k = j + 1; k < p; ++k) {
      const double g = n * 0.5 * ((sigma_hat(j, k) - w(j, k)) + (sigma_hat(k, j) - w(k, j)));
      const double x = 0.5 * (omega(j, k) + omega(k, j));
      const double slope = penalty_scale * spike_slab_weight(x, c);
      const double v = (x != 0.0) ? std::abs(g + slope * (x > 0.0 ? 1.0 : -1.0))
                                  : std::max(0.0, std::abs(g) - slope);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Weighted lasso 0.5 b'Hb + g'b + sum_i w_i |b_i| by cyclic coordinate descent,
// starting from (and overwriting) b.
int weighted_lasso(const Matrix& h, const Vector& g, const Vector& w, Vector& b, int max_sweeps,
                   double tol) {
  Vector hb = h * b;
  int sweeps = 0;
  for (; sweeps < max_sweeps; ++sweeps) {
    double biggest = 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double hii = h(i, i);
      const double r = g(i) + hb(i) - hii * b(i);
      const double next = -soft_threshold(r, w(i)) / hii;
      const double delta = next - b(i);
      if (delta != 0.0) {
        hb.noalias() += h.col(i) * delta;
        b(i) = next;
        biggest = std::max(biggest, std::abs(delta));
      }
    }
    if (biggest < tol) {
      ++sweeps;
      break;
    }
  }
  return sweeps;
}

Matrix initial_precision(const Matrix& s) {
  const auto p = s.rows();
  double eps = 1e-4 * s.diagonal().mean();
  if (!(eps > 0.0)) eps = 1e-4;
  Matrix omega = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) omega(j, j) = 1.0 / (s(j, j) + eps);
  return omega;
}

Matrix inclusion_matrix(const Matrix& omega, const BagusConfig& c) {
  const auto p = omega.rows();
  Matrix inc = Matrix::Identity(p, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j + 1; k < p; ++k) inc(j, k) = inc(k, j) = inclusion_probability(omega(j, k), c);
  return inc;
}

void finish(PrecisionFit& fit, const BagusConfig& c) {
  fit.inclusion = inclusion_matrix(fit.omega, c);
  fit.spectral_norm = symmetric_spectral_norm(fit.omega);
  if (c.spectral_bound && fit.spectral_norm > *c.spectral_bound) {
    std::ostringstream os;
    os << "spectral norm " << fit.spectral_norm << " exceeds bound " << *c.spectral_bound;
    fit.warnings.push_back(os.str());
  }
}

}  // namespace

PrecisionFit fit_map(const Matrix& sigma_hat, double n, const BagusConfig& c,
                     const std::optional<Matrix>& initial) {
  validate(c);
  const auto p = sigma_hat.rows();
  if (p < 1 || sigma_hat.cols() != p) throw ConfigError("sample covariance must be square, p >= 1");
  if (!(n >= 1.0)) throw ConfigError("sample count must be at least 1");
  if (!sigma_hat.allFinite()) throw DataError("sample covariance has non-finite entries");
  if (max_abs(sigma_hat - sigma_hat.transpose()) > 1e-10 * std::max(1.0, max_abs(sigma_hat))) {
    throw DataError("sample covariance is not symmetric");
  }
  const Matrix s = 0.5 * (sigma_hat + sigma_hat.transpose());

  PrecisionFit fit;
  if (p == 1) {
    // Stationary point of (n/2)(s w - log w) + tau w.
    fit.omega = Matrix::Constant(1, 1, n / (n * s(0, 0) + 2.0 * c.tau));
    fit.objective_trace.push_back(negative_log_posterior(fit.omega, s, n, c));
    fit.converged = true;
    finish(fit, c);
    return fit;
  }

  Matrix omega;
  if (initial) {
    if (initial->rows() != p || initial->cols() != p || !is_spd(*initial)) {
      throw ConfigError("initial precision must be a p x p SPD matrix");
    }
    omega = 0.5 * (*initial + initial->transpose());
  } else {
    omega = initial_precision(s);
  }
  Matrix w = spd_inverse(omega);
  double objective = negative_log_posterior(omega, s, n, c);
  fit.objective_trace.push_back(objective);

  std::vector<int> others(static_cast<std::size_t>(p - 1));
  Vector weights(p - 1), b(p - 1), g(p - 1);

  for (int it = 1; it <= c.max_outer_iters; ++it) {
    // E-step: l1 weights from the current iterate.
    Matrix pen_weight(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = j + 1; k < p; ++k)
        pen_weight(j, k) = pen_weight(k, j) = spike_slab_weight(omega(j, k), c);

    const Matrix previous = omega;
    const Matrix previous_w = w;

    // M-step: one sweep of exact block updates, one column/row at a time.
    for (Eigen::Index j = 0; j < p; ++j) {
      std::size_t idx = 0;
      for (Eigen::Index i = 0; i < p; ++i)
        if (i != j) others[idx++] = static_cast<int>(i);

      const Matrix w11 = w(others, others);
      const Vector w12 = w(others, j);
      const double w22 = w(j, j);
      const Matrix q = w11 - (w12 * w12.transpose()) / w22;  // inverse of Omega_11

      const double a = s(j, j) + 2.0 * c.tau / n;
      for (Eigen::Index i = 0; i < p - 1; ++i) {
        b(i) = omega(others[i], j);
        g(i) = n * s(others[i], j);
        weights(i) = pen_weight(others[i], j);
      }
      weighted_lasso(n * a * q, g, weights, b, c.inner_max_iters, c.inner_tol);

      // Optimal Schur complement for the column is 1/a, independent of b.
      const Vector qb = q * b;
      const double gamma = 1.0 / a;
      for (Eigen::Index i = 0; i < p - 1; ++i) omega(others[i], j) = omega(j, others[i]) = b(i);
      omega(j, j) = gamma + b.dot(qb);

      const Matrix w11_new = q + (qb * qb.transpose()) / gamma;
      for (Eigen::Index r = 0; r < p - 1; ++r) {
        for (Eigen::Index t = 0; t < p - 1; ++t) w(others[r], others[t]) = w11_new(r, t);
        w(others[r], j) = w(j, others[r]) = -qb(r) / gamma;
      }
      w(j, j) = 1.0 / gamma;
    }

    if (!is_spd(omega)) {
      omega = previous;
      w = previous_w;
      fit.warnings.push_back("iteration " + std::to_string(it) +
                             " produced a non-SPD iterate; step rejected");
      fit.iters = it;
      break;
    }
    w = spd_inverse(omega);  // resync the running inverse

    const double next_objective = negative_log_posterior(omega, s, n, c);
    if (next_objective > objective + 1e-8) {
      std::ostringstream os;
      os << "objective increased by " << (next_objective - objective) << " at iteration " << it;
      fit.warnings.push_back(os.str());
    }
    objective = next_objective;
    fit.objective_trace.push_back(objective);
    fit.iters = it;

    if (max_abs(omega - previous) < c.tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) {
    fit.warnings.push_back("did not converge within " + std::to_string(c.max_outer_iters) +
                           " outer iterations");
  }
  fit.omega = omega;
  finish(fit, c);
  return fit;
}

std::vector<std::pair<int, int>> threshold_support(const PrecisionFit& fit, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  std::vector<std::pair<int, int>> out;
  const auto p = fit.inclusion.rows();
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j + 1; k < p; ++k)
      if (fit.inclusion(j, k) >= threshold) out.emplace_back(static_cast<int>(j), static_cast<int>(k));
  return out;
}

}  // namespace baybn
