#include "baybn/datagen.hpp"

#include "baybn/errors.hpp"
#include "baybn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace baybn {

std::string to_string(ErrorSpec spec) {
  switch (spec) {
    case ErrorSpec::GaussianEqualVar: return "gaussian";
    case ErrorSpec::SubGaussianMix: return "subgaussian_mix";
    case ErrorSpec::StudentT: return "student_t";
  }
  return "unknown";
}

ErrorSpec error_spec_from_string(const std::string& name) {
  if (name == "gaussian") return ErrorSpec::GaussianEqualVar;
  if (name == "subgaussian_mix") return ErrorSpec::SubGaussianMix;
  if (name == "student_t") return ErrorSpec::StudentT;
  throw ConfigError("unknown error spec '" + name +
                    "' (expected gaussian, subgaussian_mix or student_t)");
}

void validate(const ScenarioSpec& s) {
  if (s.p < 1) throw ConfigError("p must be at least 1");
  if (s.moral_degree_cap < 1) throw ConfigError("moral degree cap must be at least 1");
  if (!(s.weight_min > 0.0) || !(s.weight_min < s.weight_max)) {
    throw ConfigError("weight range must satisfy 0 < min < max");
  }
  if (s.n < 1) throw ConfigError("n must be at least 1");
}

std::vector<std::string> default_names(int p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int j = 1; j <= p; ++j) names.push_back("X" + std::to_string(j));
  return names;
}

Dag generate_dag(int p, int cap, std::uint64_t seed) {
  if (p < 1) throw ConfigError("p must be at least 1");
  if (cap < 1) throw ConfigError("moral degree cap must be at least 1");
  Rng rng(seed);
  double q = std::min(1.0, 3.0 * cap / p);
  std::vector<int> order(static_cast<std::size_t>(p));
  for (;;) {
    for (int v = 0; v < p; ++v) order[v] = v;
    for (int i = p - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    Dag g(p);
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b)
        if (rng.uniform() < q) g.add_edge(order[a], order[b]);
    if (moral_degree(g) <= cap) return g;
    q = std::max(0.0, q - 0.001);
  }
}

Matrix assign_weights(const Dag& dag, double weight_min, double weight_max, std::uint64_t seed) {
  if (!(weight_min > 0.0) || !(weight_min < weight_max)) {
    throw ConfigError("weight range must satisfy 0 < min < max");
  }
  Rng rng(seed);
  const int p = dag.size();
  Matrix b = Matrix::Zero(p, p);
  for (const auto& e : dag.edges()) {
    const double magnitude = rng.uniform(weight_min, weight_max);
    b(e.to, e.from) = rng.coin() ? magnitude : -magnitude;
  }
  return b;
}

std::vector<ErrorLaw> error_laws(ErrorSpec spec, int p) {
  std::vector<ErrorLaw> laws;
  laws.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    switch (spec) {
      case ErrorSpec::GaussianEqualVar:
        laws.emplace_back(GaussianLaw{2.0});
        break;
      case ErrorSpec::SubGaussianMix:
        switch (j % 3) {
          case 0: laws.emplace_back(UniformLaw{2.5}); break;
          case 1: laws.emplace_back(GaussianLaw{2.0}); break;
          default: laws.emplace_back(TruncatedGaussianLaw{10.0, 2.5}); break;
        }
        break;
      case ErrorSpec::StudentT:
        laws.emplace_back(StudentTLaw{10.0});
        break;
    }
  }
  return laws;
}

namespace {

double draw(const ErrorLaw& law, Rng& rng) {
  struct Visitor {
    Rng& rng;
    double operator()(const GaussianLaw& g) const { return std::sqrt(g.variance) * rng.normal(); }
    double operator()(const UniformLaw& u) const { return rng.uniform(-u.half_width, u.half_width); }
    double operator()(const TruncatedGaussianLaw& t) const {
      const double s = std::sqrt(t.variance);
      for (;;) {
        const double x = s * rng.normal();
        if (std::abs(x) < t.bound) return x;
      }
    }
    double operator()(const StudentTLaw& t) const {
      const int df = static_cast<int>(t.df);
      if (df != t.df) throw ConfigError("Student t sampling needs integer degrees of freedom");
      return rng.student_t(df);
    }
  };
  return std::visit(Visitor{rng}, law);
}

}  // namespace

Dataset sample(const LinearSemModel& model, long n, std::uint64_t seed) {
  validate(model);
  if (n < 1) throw ConfigError("n must be at least 1");
  const int p = model.size();
  const Dag g = model.dag();
  const auto order = g.topological_order();
  std::vector<std::vector<int>> parents(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) parents[v] = g.parents(v);

  Rng rng(seed);
  Dataset d;
  d.x.resize(n, p);
  d.names = default_names(p);
  for (long i = 0; i < n; ++i) {
    for (int v : order) {
      double x = draw(model.laws[static_cast<std::size_t>(v)], rng);
      for (int u : parents[v]) x += model.weights(v, u) * d.x(i, u);
      d.x(i, v) = x;
    }
  }
  return d;
}

Matrix sample_covariance(const Matrix& x) {
  const auto n = x.rows();
  if (n < 2) throw DataError("sample covariance needs at least 2 observations");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centred = x.rowwise() - mean;
  Matrix s = (centred.transpose() * centred) / static_cast<double>(n);
  return 0.5 * (s + s.transpose());
}

Matrix sample_covariance(const Dataset& data) { return sample_covariance(data.x); }

Simulation simulate(const ScenarioSpec& spec) {
  validate(spec);
  Simulation sim;
  sim.spec = spec;
  sim.dag = generate_dag(spec.p, spec.moral_degree_cap, derive_seed(spec.seed, {1}));
  Matrix b = assign_weights(sim.dag, spec.weight_min, spec.weight_max, derive_seed(spec.seed, {2}));
  sim.model = LinearSemModel::with_laws(std::move(b), error_laws(spec.errors, spec.p));
  sim.data = sample(sim.model, spec.n, derive_seed(spec.seed, {3}));
  sim.data.scenario = spec;
  return sim;
}

}  // namespace baybn
