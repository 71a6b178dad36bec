#include "baybn/eval.hpp"

#include "baybn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace baybn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// ancestors[v] = set of strict ancestors of v.
std::vector<std::vector<char>> ancestor_table(const Dag& g) {
  const int p = g.size();
  std::vector<std::vector<char>> anc(static_cast<std::size_t>(p),
                                     std::vector<char>(static_cast<std::size_t>(p), 0));
  for (int v : g.topological_order())
    for (int u : g.parents(v)) {
      anc[v][u] = 1;
      for (int w = 0; w < p; ++w)
        if (anc[u][w]) anc[v][w] = 1;
    }
  return anc;
}
}  // namespace

int hamming_distance(const Dag& a, const Dag& b) {
  if (a.size() != b.size()) throw ConfigError("graphs must have the same number of nodes");
  int d = 0;
  for (int j = 0; j < a.size(); ++j)
    for (int k = 0; k < a.size(); ++k)
      if (a.has_edge(j, k) != b.has_edge(j, k)) ++d;
  return d;
}

EdgeCounts edge_counts(const Dag& truth, const Dag& estimate) {
  if (truth.size() != estimate.size()) throw ConfigError("graphs must have the same number of nodes");
  EdgeCounts c;
  for (int j = 0; j < truth.size(); ++j)
    for (int k = 0; k < truth.size(); ++k) {
      const bool t = truth.has_edge(j, k), e = estimate.has_edge(j, k);
      if (t && e) ++c.true_positives;
      if (!t && e) ++c.false_positives;
      if (t && !e) ++c.false_negatives;
    }
  return c;
}

bool ordering_correct(const Dag& dag, const Ordering& pi) {
  if (!is_permutation_of_range(pi, dag.size())) return false;
  std::vector<char> removed(static_cast<std::size_t>(dag.size()), 0);
  for (auto it = pi.rbegin(); it != pi.rend(); ++it) {
    for (int c : dag.children(*it))
      if (!removed[c]) return false;  // not a sink of what is left
    removed[*it] = 1;
  }
  return true;
}

IdentifiabilityReport check_identifiability(const LinearSemModel& model,
                                            std::optional<Ordering> ordering) {
  validate(model);
  const Dag g = model.dag();
  const int p = g.size();
  IdentifiabilityReport rep;
  rep.ordering = ordering ? *ordering : g.topological_order();
  if (!is_valid_ordering(g, rep.ordering)) {
    throw ConfigError("ordering is not a topological order of the model graph");
  }
  const Matrix sigma = covariance_from_model(model);
  const auto anc = ancestor_table(g);
  const auto& pi = rep.ordering;

  rep.forward_margin = rep.backward_margin = kInf;
  rep.forward_step_margin.assign(static_cast<std::size_t>(p), kInf);
  rep.backward_step_margin.assign(static_cast<std::size_t>(p), kInf);

  for (int r = 0; r < p; ++r) {
    const int j = pi[r];
    // Backward: precision of the leading set T = pi[0..r].
    std::vector<int> lead(pi.begin(), pi.begin() + r + 1);
    const Matrix omega_t = sub_precision(sigma, lead);
    const int jj = r;
    for (int a = 0; a < r; ++a) {
      if (!anc[j][lead[a]]) continue;
      const double m = omega_t(a, a) - omega_t(jj, jj);
      rep.backward_step_margin[r] = std::min(rep.backward_step_margin[r], m);
    }
    // Forward: conditional variances given S = pi[0..r-1].
    std::vector<int> s(pi.begin(), pi.begin() + r);
    auto condvar = [&](int v) {
      auto set = s;
      set.push_back(v);
      const Matrix om = sub_precision(sigma, set);
      return 1.0 / om(r, r);
    };
    const double vj = condvar(j);
    for (int later = r + 1; later < p; ++later) {
      const int k = pi[later];
      if (!anc[k][j]) continue;
      rep.forward_step_margin[r] = std::min(rep.forward_step_margin[r], condvar(k) - vj);
    }
    rep.backward_margin = std::min(rep.backward_margin, rep.backward_step_margin[r]);
    rep.forward_margin = std::min(rep.forward_margin, rep.forward_step_margin[r]);
  }
  rep.backward_ok = rep.backward_margin > 0.0;
  rep.forward_ok = rep.forward_margin > 0.0;
  return rep;
}

double restricted_kronecker_norm(const Matrix& omega) {
  const Matrix a = omega.cwiseAbs();
  const Matrix support = (a.array() >= kStructuralZero).cast<double>().matrix();
  const Matrix rows = a * support * a;
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (support(i, j) != 0.0) best = std::max(best, rows(i, j));
  return best;
}

int column_sparsity(const Matrix& omega) {
  int d = 0;
  for (Eigen::Index j = 0; j < omega.cols(); ++j)
    d = std::max(d, static_cast<int>((omega.col(j).array().abs() >= kStructuralZero).count()));
  return d;
}

TheoryReport theory_report(const LinearSemModel& model) {
  validate(model);
  const int p = model.size();
  if (p > kTheoryMaxNodes) {
    throw ConfigError("theory report is limited to p <= " + std::to_string(kTheoryMaxNodes));
  }
  const Dag g = model.dag();
  const Matrix sigma = covariance_from_model(model);

  TheoryReport t;
  t.p = p;
  const auto ident = check_identifiability(model);
  t.ordering = ident.ordering;
  t.forward_ok = ident.forward_ok;
  t.backward_ok = ident.backward_ok;
  t.tau_min = ident.backward_margin;
  t.k1 = min_eigenvalue(sigma);
  t.k2 = sigma.diagonal().maxCoeff();
  t.M_Sigma = linf_operator_norm(sigma);
  t.d_M = moral_degree(g);
  t.cancelled_pairs = cancelled_moral_pairs(model);

  const Matrix omega = precision_from_model(model);
  t.M_Gamma = restricted_kronecker_norm(omega);
  t.d = column_sparsity(omega);
  t.theta_min = kInf;

  const int steps = std::max(1, p - 1);
  for (int r = 1; r <= steps; ++r) {
    const int m = p + 1 - r;
    std::vector<int> lead(t.ordering.begin(), t.ordering.begin() + std::min(m, p));
    const Matrix om = sub_precision(sigma, lead);
    t.M_Gamma_steps.push_back(restricted_kronecker_norm(om));
    t.d = std::max(t.d, column_sparsity(om));
    const Dag sub = g.induced(lead);
    for (const auto& e : sub.edges()) t.theta_min = std::min(t.theta_min, std::abs(om(e.to, e.from)));
  }
  t.M_Gamma_max = *std::max_element(t.M_Gamma_steps.begin(), t.M_Gamma_steps.end());
  t.M_Gamma_min = *std::min_element(t.M_Gamma_steps.begin(), t.M_Gamma_steps.end());
  return t;
}

std::string to_string(GraphKind kind) { return kind == GraphKind::Chain ? "chain" : "star"; }

GraphKind graph_kind_from_string(const std::string& name) {
  if (name == "chain") return GraphKind::Chain;
  if (name == "star") return GraphKind::Star;
  throw ConfigError("unknown graph kind '" + name + "' (expected chain or star)");
}

LinearSemModel chain_model(int p, double beta, double sigma2) {
  if (p < 1) throw ConfigError("p must be at least 1");
  Matrix b = Matrix::Zero(p, p);
  for (int j = 1; j < p; ++j) b(j, j - 1) = beta;
  return LinearSemModel::gaussian(b, Vector::Constant(p, sigma2));
}

LinearSemModel star_model(int p, double beta, double sigma2) {
  if (p < 1) throw ConfigError("p must be at least 1");
  Matrix b = Matrix::Zero(p, p);
  for (int j = 1; j < p; ++j) b(j, 0) = beta;
  return LinearSemModel::gaussian(b, Vector::Constant(p, sigma2));
}

LinearSemModel reference_model(GraphKind kind, int p, double beta, double sigma2) {
  return kind == GraphKind::Chain ? chain_model(p, beta, sigma2) : star_model(p, beta, sigma2);
}

ClosedForms chain_star_closed_forms(GraphKind kind, int p, double beta, double sigma2) {
  if (p < 2) throw ConfigError("closed forms need p >= 2");
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
  const double b = std::abs(beta);
  const double s4 = sigma2 * sigma2;
  ClosedForms f;
  if (kind == GraphKind::Chain) {
    if (b >= 1.0) throw ConfigError("chain closed forms need |beta| < 1");
    f.M_Gamma_max = (std::pow(b, 4) + 2 * std::pow(b, 3) + 4 * b * b + 2 * b + 1) / s4;
    f.M_Gamma_min = (std::pow(b, 4) + 2 * std::pow(b, 3) + 3 * b * b + 2 * b + 1) / s4;
    f.M_Sigma = (1 - std::pow(b, p)) * (1 - std::pow(b, p + 1)) / ((1 - b) * (1 - b * b)) * sigma2;
    f.M_Sigma_upper = sigma2 / ((1 - b) * (1 - b * b));
    f.k1_bound = sigma2 / ((1 + b) * (1 + b));
    f.tau_min_bound = b * b / sigma2;
    f.theta_min_bound = b / sigma2;
  } else {
    const double q = p - 1;
    f.M_Gamma_max =
        (2 * q * q * std::pow(b, 4) + 2 * q * q * std::pow(b, 3) + 3 * q * b * b + 2 * q * b + 1) / s4;
    f.M_Gamma_min = (2 * std::pow(b, 4) + 2 * std::pow(b, 3) + 3 * b * b + 2 * b + 1) / s4;
    f.M_Sigma = std::max(q * b + 1, q * b * b + b + 1) * sigma2;
  }
  return f;
}

bool HyperparamRecommendation::all_satisfiable() const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.satisfiable; });
}

HyperparamRecommendation recommend_hyperparams(const TheoryReport& t, double n, double eps1) {
  if (!(eps1 > 0.0)) throw ConfigError("epsilon1 must be positive");
  if (!(n > 0.0)) throw ConfigError("n must be positive");
  const double p = t.p;
  const double mg = t.M_Gamma_max, ms = t.M_Sigma;
  // Without edges theta_min is unbounded; the terms it enters drop out.
  const double dtheta = std::isfinite(t.theta_min) ? t.d * t.theta_min : kInf;

  HyperparamRecommendation h;
  h.epsilon1 = eps1;
  h.C3 = 0.5 * std::min({1.0 / (6 * mg * ms), 1.0 / (6 * mg * mg * std::pow(ms, 3)),
                         t.k1 * t.k1 / (4 * mg), t.tau_min / (4 * mg), dtheta / (2 * mg),
                         t.k1 * t.k1 * p / (2 * eps1)});
  h.C1 = h.C3 / 10.0;
  h.C2 = dtheta / (2 * mg);
  const double c13 = h.C1 + h.C3;
  h.C4 = h.C1 + ms * ms * 2 * c13 * mg + 6 * c13 * c13 * mg * mg * std::pow(ms, 3);

  auto& c = h.config;
  c.nu1 = p * (1 + eps1) / (n * h.C3);
  c.nu0 = p / (n * h.C4);
  c.tau = n * h.C3 / (2 * p);
  c.eta = c.nu1 * c.nu1 / (c.nu1 * c.nu1 + c.nu0 * c.nu0 * eps1);
  c.threshold = c.nu0 * c.eta / (c.nu1 * (1 - c.eta) + c.nu0 * c.eta);

  constexpr double rel = 1e-12;
  auto add = [&](std::string name, bool ok, std::string detail) {
    h.constraints.push_back({std::move(name), ok, std::move(detail)});
  };

  add("C3*eps1 <= k1^2 p / 2", h.C3 * eps1 <= t.k1 * t.k1 * p / 2 * (1 + rel),
      fmt(h.C3 * eps1) + " <= " + fmt(t.k1 * t.k1 * p / 2));
  {
    const double rhs = std::min({t.tau_min, 2 * dtheta, t.k1 * t.k1, 2 / (3 * ms),
                                 2 / (3 * mg * std::pow(ms, 3))}) /
                       (4 * mg);
    add("C1+C3 < min{...}/(4 M_Gamma_max)", c13 < rhs, fmt(c13) + " < " + fmt(rhs));
  }
  add("C2 > C3", h.C2 > h.C3, fmt(h.C2) + " > " + fmt(h.C3));
  {
    const double lhs = 1 / c.nu1, rhs = h.C3 / (1 + eps1) * n / p;
    add("1/nu1 = C3 n / ((1+eps1) p)", std::abs(lhs - rhs) <= rel * rhs, fmt(lhs) + " = " + fmt(rhs));
  }
  {
    // Attained with equality; any smaller nu0 meets the strict bound.
    const double lhs = 1 / c.nu0, rhs = h.C4 * n / p;
    add("1/nu0 > C4 n / p", lhs >= rhs * (1 - rel), fmt(lhs) + " vs " + fmt(rhs));
  }
  {
    const double lhs = c.nu1 * c.nu1 * (1 - c.eta) / (c.nu0 * c.nu0 * c.eta);
    const double rhs = eps1 * std::exp(2 * (h.C2 - h.C3) * t.M_Gamma_min * (h.C4 - h.C3) * n / (p * p));
    add("nu1^2(1-eta)/(nu0^2 eta) <= eps1 exp{...}", lhs <= rhs * (1 + rel), fmt(lhs) + " <= " + fmt(rhs));
  }
  {
    const double rhs = h.C3 * n / (2 * p);
    add("tau <= C3 n / (2p)", c.tau <= rhs * (1 + rel), fmt(c.tau) + " <= " + fmt(rhs));
  }
  {
    const double d = std::max(1, t.d);
    const double theta = std::isfinite(t.theta_min) ? t.theta_min : 0.0;
    const double width = (theta - 2 * c13 * t.M_Gamma / d) * (1 / c.nu0 - 1 / c.nu1);
    const double base = std::log(c.nu0 * c.eta / (c.nu1 * (1 - c.eta)));
    const double logit_t = std::log(c.threshold / (1 - c.threshold));
    add("log(T/(1-T)) interval non-empty", width > 0.0,
        "width " + fmt(width) + ", T offset " + fmt(logit_t - base));
  }
  {
    const double lo = 1 / t.k1 + 2 * c13 * mg, hi = std::sqrt(2 * n * c.nu0);
    const bool ok = lo < hi;
    if (ok) c.spectral_bound = 0.5 * (lo + hi);
    add("1/k1 + 2(C1+C3)M_Gamma_max < B0 < sqrt(2 n nu0)", ok, fmt(lo) + " < " + fmt(hi));
  }
  add("nu1 > nu0 and 0 < T < 1",
      c.nu1 > c.nu0 && c.threshold > 0 && c.threshold < 1 && c.eta > 0 && c.eta < 1,
      "nu0 " + fmt(c.nu0) + ", nu1 " + fmt(c.nu1) + ", T " + fmt(c.threshold));
  if (1.0 - c.threshold < 1e-3) {
    h.warnings.push_back("threshold T = " + fmt(c.threshold) + " is within 1e-3 of 1");
  }
  if (c.nu0 >= 1.0) h.warnings.push_back("spike scale nu0 = " + fmt(c.nu0) + " is not small");
  return h;
}

}  // namespace baybn
