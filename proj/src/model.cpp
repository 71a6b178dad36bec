#include "baybn/model.hpp"

#include "baybn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>
#include <string>

namespace baybn {

Dag::Dag(int p) : p_(p) {
  if (p < 0) throw ConfigError("node count must be non-negative");
  adj_.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0);
}

Dag::Dag(int p, const std::vector<Edge>& edges) : Dag(p) {
  for (const auto& e : edges) add_edge(e.from, e.to);
}

void Dag::add_edge(int from, int to) {
  if (from < 0 || to < 0 || from >= p_ || to >= p_) {
    throw ConfigError("edge endpoint out of range: " + std::to_string(from) + "->" +
                      std::to_string(to));
  }
  if (from == to) throw ConfigError("self-loop on node " + std::to_string(from));
  if (has_edge(from, to)) return;
  if (reaches(to, from)) {
    throw ConfigError("edge " + std::to_string(from) + "->" + std::to_string(to) +
                      " would create a directed cycle");
  }
  adj_[index(from, to)] = 1;
}

bool Dag::reaches(int from, int to) const {
  std::vector<char> seen(static_cast<std::size_t>(p_), 0);
  std::vector<int> stack{from};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (seen[v]) continue;
    seen[v] = 1;
    for (int c = 0; c < p_; ++c)
      if (has_edge(v, c) && !seen[c]) stack.push_back(c);
  }
  return false;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (int j = 0; j < p_; ++j)
    for (int k = 0; k < p_; ++k)
      if (has_edge(j, k)) out.push_back({j, k});
  return out;
}

std::size_t Dag::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), char{1}));
}

std::vector<int> Dag::parents(int node) const {
  std::vector<int> out;
  for (int j = 0; j < p_; ++j)
    if (has_edge(j, node)) out.push_back(j);
  return out;
}

std::vector<int> Dag::children(int node) const {
  std::vector<int> out;
  for (int k = 0; k < p_; ++k)
    if (has_edge(node, k)) out.push_back(k);
  return out;
}

std::vector<int> Dag::topological_order() const {
  std::vector<int> indeg(static_cast<std::size_t>(p_), 0);
  for (const auto& e : edges()) ++indeg[e.to];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < p_; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(p_));
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children(v))
      if (--indeg[c] == 0) ready.push(c);
  }
  return order;
}

Dag Dag::induced(const std::vector<int>& nodes) const {
  Dag sub(static_cast<int>(nodes.size()));
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (has_edge(nodes[a], nodes[b]))
        sub.adj_[sub.index(static_cast<int>(a), static_cast<int>(b))] = 1;
  return sub;
}

std::vector<std::vector<int>> moral_neighbors(const Dag& dag) {
  const int p = dag.size();
  std::vector<std::set<int>> nb(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) {
    auto pa = dag.parents(v);
    for (int u : pa) {
      nb[u].insert(v);
      nb[v].insert(u);
    }
    for (std::size_t a = 0; a < pa.size(); ++a)
      for (std::size_t b = a + 1; b < pa.size(); ++b) {
        nb[pa[a]].insert(pa[b]);
        nb[pa[b]].insert(pa[a]);
      }
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) out[v].assign(nb[v].begin(), nb[v].end());
  return out;
}

int moral_degree(const Dag& dag) {
  int d = 0;
  for (const auto& nb : moral_neighbors(dag)) d = std::max(d, static_cast<int>(nb.size()));
  return d;
}

double law_variance(const ErrorLaw& law) {
  struct Visitor {
    double operator()(const GaussianLaw& g) const { return g.variance; }
    double operator()(const UniformLaw& u) const { return u.half_width * u.half_width / 3.0; }
    double operator()(const TruncatedGaussianLaw& t) const {
      const double s = std::sqrt(t.variance);
      const double a = t.bound / s;
      const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
      const double mass = std::erf(a / std::numbers::sqrt2);  // P(|Z| < a)
      return t.variance * (1.0 - 2.0 * a * phi / mass);
    }
    double operator()(const StudentTLaw& t) const {
      if (t.df <= 2.0) throw ConfigError("Student t error law needs df > 2 for finite variance");
      return t.df / (t.df - 2.0);
    }
  };
  return std::visit(Visitor{}, law);
}

LinearSemModel LinearSemModel::gaussian(Matrix weights, Vector sigma2) {
  LinearSemModel m;
  m.weights = std::move(weights);
  m.sigma2 = std::move(sigma2);
  m.laws.reserve(static_cast<std::size_t>(m.sigma2.size()));
  for (Eigen::Index j = 0; j < m.sigma2.size(); ++j) m.laws.push_back(GaussianLaw{m.sigma2(j)});
  return m;
}

LinearSemModel LinearSemModel::with_laws(Matrix weights, std::vector<ErrorLaw> laws) {
  LinearSemModel m;
  m.weights = std::move(weights);
  m.sigma2.resize(static_cast<Eigen::Index>(laws.size()));
  for (std::size_t j = 0; j < laws.size(); ++j)
    m.sigma2(static_cast<Eigen::Index>(j)) = law_variance(laws[j]);
  m.laws = std::move(laws);
  return m;
}

Dag LinearSemModel::dag() const {
  const int p = size();
  Dag g(p);
  for (int child = 0; child < p; ++child)
    for (int parent = 0; parent < p; ++parent)
      if (parent != child && weights(child, parent) != 0.0) g.add_edge(parent, child);
  return g;
}

void validate(const LinearSemModel& model) {
  const auto p = model.sigma2.size();
  if (model.weights.rows() != p || model.weights.cols() != p) {
    throw ConfigError("weight matrix must be p x p with p = number of variances");
  }
  if (static_cast<Eigen::Index>(model.laws.size()) != p) {
    throw ConfigError("one error law per node is required");
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(model.sigma2(j) > 0.0) || !std::isfinite(model.sigma2(j))) {
      throw ConfigError("error variance of node " + std::to_string(j) + " must be positive");
    }
    if (model.weights(j, j) != 0.0) {
      throw ConfigError("self-loop weight on node " + std::to_string(j));
    }
    const double lv = law_variance(model.laws[static_cast<std::size_t>(j)]);
    if (std::abs(lv - model.sigma2(j)) > 1e-10 * std::max(1.0, model.sigma2(j))) {
      std::ostringstream os;
      os << "error law variance " << lv << " of node " << j << " does not match sigma2 "
         << model.sigma2(j);
      throw ConfigError(os.str());
    }
  }
  if (!model.weights.allFinite()) throw ConfigError("edge weights must be finite");
  (void)model.dag();  // throws on cycles
}

Matrix precision_from_model(const LinearSemModel& model) {
  validate(model);
  const auto p = model.sigma2.size();
  Matrix a = Matrix::Identity(p, p) - model.weights;
  Matrix omega = a.transpose() * model.sigma2.cwiseInverse().asDiagonal() * a;
  return 0.5 * (omega + omega.transpose());
}

Matrix covariance_from_model(const LinearSemModel& model) {
  validate(model);
  const auto p = model.sigma2.size();
  Matrix a = Matrix::Identity(p, p) - model.weights;
  // I - B is unit-triangular after a topological permutation, so LU is exact
  // up to rounding.
  Matrix a_inv = a.partialPivLu().inverse();
  Matrix sigma = a_inv * model.sigma2.asDiagonal() * a_inv.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

double precision_offdiag(const LinearSemModel& model, int j, int k) {
  validate(model);
  const int p = model.size();
  if (j == k) throw ConfigError("precision_offdiag requires j != k");
  if (j < 0 || k < 0 || j >= p || k >= p) throw ConfigError("node index out of range");
  double v = -model.beta(k, j) / model.sigma2(j) - model.beta(j, k) / model.sigma2(k);
  for (int l = 0; l < p; ++l) {
    if (l == j || l == k) continue;
    const double bk = model.beta(k, l);
    const double bj = model.beta(j, l);
    if (bk != 0.0 && bj != 0.0) v += bk * bj / model.sigma2(l);
  }
  return v;
}

std::vector<Edge> cancelled_moral_pairs(const LinearSemModel& model) {
  const Matrix omega = precision_from_model(model);
  const auto nb = moral_neighbors(model.dag());
  std::vector<Edge> out;
  for (int j = 0; j < model.size(); ++j)
    for (int k : nb[j])
      if (j < k && std::abs(omega(j, k)) < kStructuralZero) out.push_back({j, k});
  return out;
}

Matrix sub_precision(const Matrix& sigma, const std::vector<int>& subset) {
  if (subset.empty()) throw ConfigError("subset must be non-empty");
  for (int v : subset)
    if (v < 0 || v >= sigma.rows()) throw ConfigError("subset index out of range");
  return spd_inverse(principal_submatrix(sigma, subset));
}

Matrix sub_precision(const LinearSemModel& model, const std::vector<int>& subset) {
  return sub_precision(covariance_from_model(model), subset);
}

bool is_permutation_of_range(const Ordering& pi, int p) {
  if (static_cast<int>(pi.size()) != p) return false;
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  for (int v : pi) {
    if (v < 0 || v >= p || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

bool is_valid_ordering(const Dag& dag, const Ordering& pi) {
  const int p = dag.size();
  if (!is_permutation_of_range(pi, p)) return false;
  std::vector<int> pos(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) pos[pi[r]] = r;
  for (const auto& e : dag.edges())
    if (pos[e.from] >= pos[e.to]) return false;
  return true;
}

std::vector<Ordering> topological_orderings(const Dag& dag) {
  const int p = dag.size();
  if (p > 12) throw ConfigError("topological ordering enumeration is limited to p <= 12");
  std::vector<int> indeg(static_cast<std::size_t>(p), 0);
  for (const auto& e : dag.edges()) ++indeg[e.to];
  std::vector<Ordering> out;
  Ordering cur;
  std::vector<char> used(static_cast<std::size_t>(p), 0);
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == p) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v < p; ++v) {
      if (used[v] || indeg[v] != 0) continue;
      used[v] = 1;
      cur.push_back(v);
      for (int c : dag.children(v)) --indeg[c];
      rec();
      for (int c : dag.children(v)) ++indeg[c];
      cur.pop_back();
      used[v] = 0;
    }
  };
  rec();
  return out;
}

}  // namespace baybn
