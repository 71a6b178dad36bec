#include "baybn/errors.hpp"
#include "baybn/eval.hpp"
#include "baybn/linalg.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

using namespace baybn;

namespace {

LinearSemModel chain2(double beta, double s1, double s2) {
  Matrix b = Matrix::Zero(2, 2);
  b(1, 0) = beta;
  Vector v(2);
  v << s1, s2;
  return LinearSemModel::gaussian(b, v);
}

// Materializes the p^2 x p^2 Kronecker product and takes the max absolute
// row sum over the rows and columns indexed by the support.
double kronecker_brute(const Matrix& o) {
  const auto p = o.rows();
  Matrix k(p * p, p * p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) k.block(a * p, b * p, p, p) = o(a, b) * o;
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (std::abs(o(i, j)) >= 1e-12) s.push_back(i * p + j);
  double best = 0.0;
  for (auto r : s) {
    double sum = 0.0;
    for (auto c : s) sum += std::abs(k(r, c));
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

TEST_CASE("hamming distance examples") {
  const Dag a(3, {{0, 1}, {1, 2}});
  CHECK(hamming_distance(a, a) == 0);
  CHECK(hamming_distance(a, Dag(3)) == 2);
  CHECK(hamming_distance(a, Dag(3, {{1, 0}, {1, 2}})) == 2);  // a reversal counts twice
  CHECK(hamming_distance(a, Dag(3, {{0, 1}, {1, 2}, {0, 2}})) == 1);
  CHECK_THROWS_AS(hamming_distance(a, Dag(4)), ConfigError);
  const auto c = edge_counts(a, Dag(3, {{0, 1}, {0, 2}}));
  CHECK(c.true_positives == 1);
  CHECK(c.false_positives == 1);
  CHECK(c.false_negatives == 1);
}

TEST_CASE("hamming distance is a metric") {
  std::vector<Dag> gs;
  for (std::uint64_t s = 0; s < 12; ++s) gs.push_back(generate_dag(7, 1 + static_cast<int>(s % 3), s));
  for (const auto& a : gs)
    for (const auto& b : gs) {
      CHECK(hamming_distance(a, b) == hamming_distance(b, a));
      CHECK((hamming_distance(a, b) == 0) == (a == b));
      const auto c = edge_counts(a, b);
      CHECK(c.false_positives + c.false_negatives == hamming_distance(a, b));
      for (const auto& m : gs) CHECK(hamming_distance(a, b) <= hamming_distance(a, m) + hamming_distance(m, b));
    }
}

TEST_CASE("ordering correctness") {
  const Dag v(3, {{0, 2}, {1, 2}});
  CHECK(ordering_correct(v, {1, 0, 2}));
  CHECK(ordering_correct(v, {0, 1, 2}));
  CHECK_FALSE(ordering_correct(v, {0, 2, 1}));
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Dag g = testing::random_model(500 + s, 2, 6).dag();
    const auto valid = topological_orderings(g);
    Ordering pi(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) pi[i] = i;
    do {
      const bool expected = std::find(valid.begin(), valid.end(), pi) != valid.end();
      CHECK(ordering_correct(g, pi) == expected);
    } while (std::next_permutation(pi.begin(), pi.end()));
  }
}

TEST_CASE("identifiability margins on a 2-node chain") {
  const auto eq = check_identifiability(chain2(0.5, 1, 1));
  CHECK(eq.backward_ok);
  CHECK(eq.forward_ok);
  CHECK(eq.backward_margin == doctest::Approx(0.25));
  CHECK(eq.forward_margin == doctest::Approx(0.25));

  const auto bad = check_identifiability(chain2(0.5, 5, 1));
  CHECK_FALSE(bad.backward_ok);
  CHECK_FALSE(bad.forward_ok);
  CHECK(bad.backward_margin == doctest::Approx(-0.55));
  CHECK(bad.forward_margin == doctest::Approx(-2.75));

  const auto up = check_identifiability(chain2(0.5, 1, 5));
  CHECK(up.backward_ok);
  CHECK(up.forward_ok);
  CHECK(up.backward_margin == doctest::Approx(0.85));
  CHECK(up.forward_margin == doctest::Approx(4.25));
}

TEST_CASE("equal variances satisfy both conditions with the edge-weight margin") {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto m = testing::random_model(600 + s, 2, 10, true);
    const auto rep = check_identifiability(m);
    CHECK(rep.forward_ok);
    CHECK(rep.backward_ok);
    const Dag g = m.dag();
    const auto& pi = rep.ordering;
    REQUIRE(is_valid_ordering(g, pi));
    // Along an ancestral prefix T ending in j: Omega_T(l,l) - Omega_T(j,j) is
    // the sum of beta^2 over children of l inside T.
    for (std::size_t r = 0; r < pi.size(); ++r) {
      std::vector<bool> in_t(pi.size(), false);
      for (std::size_t i = 0; i <= r; ++i) in_t[pi[i]] = true;
      std::vector<bool> anc(pi.size(), false);
      std::vector<int> stack{pi[r]};
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u : g.parents(v))
          if (!anc[u]) {
            anc[u] = true;
            stack.push_back(u);
          }
      }
      double expected = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < pi.size(); ++l) {
        if (!anc[l]) continue;
        double gap = 0.0;
        for (int c : g.children(static_cast<int>(l)))
          if (in_t[c]) gap += m.beta(static_cast<int>(l), c) * m.beta(static_cast<int>(l), c);
        expected = std::min(expected, gap);
      }
      if (std::isinf(expected))
        CHECK(std::isinf(rep.backward_step_margin[r]));
      else
        CHECK(std::abs(rep.backward_step_margin[r] - expected) < 1e-10);
    }
  }
}

TEST_CASE("restricted Kronecker norm against the materialized product") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto m = testing::random_model(700 + s, 2, 7);
    const Matrix o = precision_from_model(m);
    CHECK(std::abs(restricted_kronecker_norm(o) - kronecker_brute(o)) < 1e-10 * kronecker_brute(o));
  }
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 3;
  CHECK(restricted_kronecker_norm(d) == doctest::Approx(9.0));
  CHECK(column_sparsity(d) == 1);
}

TEST_CASE("theory report against direct computations") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto m = testing::random_model(800 + s, 2, 9);
    const auto t = theory_report(m);
    const Matrix sigma = covariance_from_model(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    CHECK(std::abs(t.k1 - es.eigenvalues().minCoeff()) < 1e-10);
    CHECK(t.k2 == doctest::Approx(sigma.diagonal().maxCoeff()));
    CHECK(t.M_Sigma == doctest::Approx(sigma.cwiseAbs().rowwise().sum().maxCoeff()));
    CHECK(t.M_Gamma == doctest::Approx(kronecker_brute(precision_from_model(m))));
    CHECK(t.d <= t.d_M + 1);
    CHECK(t.d_M == moral_degree(m.dag()));
    const int p = m.size();
    REQUIRE(t.M_Gamma_steps.size() == static_cast<std::size_t>(p - 1));
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (int r = 1; r < p; ++r) {
      const std::vector<int> lead(t.ordering.begin(), t.ordering.begin() + (p + 1 - r));
      const double v = kronecker_brute(spd_inverse(principal_submatrix(sigma, lead)));
      CHECK(t.M_Gamma_steps[r - 1] == doctest::Approx(v).epsilon(1e-9));
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    CHECK(t.M_Gamma_max == doctest::Approx(hi).epsilon(1e-9));
    CHECK(t.M_Gamma_min == doctest::Approx(lo).epsilon(1e-9));
    CHECK(t.tau_min == doctest::Approx(check_identifiability(m).backward_margin));
  }
  CHECK_THROWS_AS(theory_report(chain_model(kTheoryMaxNodes + 1, 0.5, 1.0)), ConfigError);
}

TEST_CASE("chain and star reference values") {
  // 2-node chain, beta = 0.5: Sigma = [[1, .5], [.5, 1.25]].
  const auto t2 = theory_report(chain_model(2, 0.5, 1.0));
  CHECK(t2.M_Sigma == doctest::Approx(1.75));
  CHECK(chain_star_closed_forms(GraphKind::Chain, 2, 0.5, 1.0).M_Sigma == doctest::Approx(1.75));
  CHECK(t2.theta_min == doctest::Approx(0.5));
  CHECK(t2.tau_min == doctest::Approx(0.25));

  for (int p = 3; p <= 8; ++p) {
    const auto t = theory_report(chain_model(p, 0.5, 1.0));
    CHECK(t.M_Gamma_max == doctest::Approx(4.5625));
    CHECK(t.M_Gamma_min == doctest::Approx(3.0625));
    CHECK(std::abs(t.M_Gamma_min - chain_star_closed_forms(GraphKind::Chain, p, 0.5, 1.0).M_Gamma_min) < 1e-8);
    for (double beta : {-0.3, 0.3, 0.5})
      for (double s2 : {1.0, 2.0}) {
        const auto ts = theory_report(star_model(p, beta, s2));
        CHECK(std::abs(ts.M_Sigma - chain_star_closed_forms(GraphKind::Star, p, beta, s2).M_Sigma) < 1e-8);
      }
  }
  const auto star3 = theory_report(star_model(3, 0.5, 1.0));
  CHECK(star3.M_Sigma == doctest::Approx(2.0));
  CHECK(star3.M_Gamma_max == doctest::Approx(5.75));
  CHECK(star3.M_Gamma_min == doctest::Approx(3.0625));
  const auto chain3 = theory_report(chain_model(3, 0.5, 1.0));
  CHECK(chain3.M_Sigma == doctest::Approx(2.375));
}

TEST_CASE("closed forms collapse at beta = 0") {
  for (auto kind : {GraphKind::Chain, GraphKind::Star}) {
    const auto f = chain_star_closed_forms(kind, 5, 0.0, 2.0);
    CHECK(f.M_Gamma_max == doctest::Approx(0.25));
    CHECK(f.M_Gamma_min == doctest::Approx(0.25));
    CHECK(f.M_Sigma == doctest::Approx(2.0));
    const auto t = theory_report(reference_model(kind, 5, 0.0, 2.0));
    CHECK(t.M_Gamma_max == doctest::Approx(0.25));
    CHECK(t.M_Sigma == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(chain_star_closed_forms(GraphKind::Chain, 4, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(chain_star_closed_forms(GraphKind::Star, 1, 0.5, 1.0), ConfigError);
  CHECK(graph_kind_from_string(to_string(GraphKind::Star)) == GraphKind::Star);
  CHECK_THROWS_AS(graph_kind_from_string("tree"), ConfigError);
}

TEST_CASE("hyper-parameter recommendation for a chain") {
  const auto t = theory_report(chain_model(10, 0.5, 1.0));
  const auto h = recommend_hyperparams(t, 1e4, 1.0);
  CHECK(h.all_satisfiable());
  CHECK(h.warnings.empty());
  const double mg = t.M_Gamma_max, ms = t.M_Sigma, p = 10;
  const double c3 = 0.5 * std::min({1 / (6 * mg * ms), 1 / (6 * mg * mg * ms * ms * ms), t.k1 * t.k1 / (4 * mg),
                                    t.tau_min / (4 * mg), t.d * t.theta_min / (2 * mg), t.k1 * t.k1 * p / 2});
  CHECK(h.C3 == doctest::Approx(c3));
  CHECK(h.C1 == doctest::Approx(c3 / 10));
  CHECK(h.config.nu1 == doctest::Approx(2 * p / (1e4 * c3)));
  CHECK(h.config.tau * h.config.nu1 == doctest::Approx(1.0));  // (1 + eps1) / 2
  CHECK(h.config.nu1 > h.config.nu0);
  // T is the inclusion probability of a zero entry.
  CHECK(h.config.threshold == doctest::Approx(inclusion_probability(0.0, h.config)));
  CHECK(h.config.spectral_bound.has_value());

  const auto h2 = recommend_hyperparams(t, 2e4, 1.0);
  CHECK(h2.config.nu1 == doctest::Approx(h.config.nu1 / 2));
  CHECK(h2.config.nu0 == doctest::Approx(h.config.nu0 / 2));
  CHECK(h2.config.tau == doctest::Approx(h.config.tau * 2));

  CHECK_THROWS_AS(recommend_hyperparams(t, 1e4, 0.0), ConfigError);
  CHECK_THROWS_AS(recommend_hyperparams(t, -1, 1.0), ConfigError);
}

TEST_CASE("stars degrade the recommendation as p grows") {
  const auto small = recommend_hyperparams(theory_report(star_model(5, 0.5, 1.0)), 1e4, 1.0);
  const auto big = recommend_hyperparams(theory_report(star_model(20, 0.5, 1.0)), 1e4, 1.0);
  CHECK(big.config.nu1 > 10 * small.config.nu1);
  CHECK_FALSE(big.warnings.empty());
  CHECK(1 - big.config.threshold < 1e-3);
}

TEST_CASE("edgeless models have an unbounded theta_min") {
  const auto t = theory_report(chain_model(4, 0.0, 1.0));
  CHECK(std::isinf(t.theta_min));
  const auto h = recommend_hyperparams(t, 1e4, 1.0);
  CHECK(std::isfinite(h.C3));
}
