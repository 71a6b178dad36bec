#include "baybn/errors.hpp"
#include "baybn/eval.hpp"
#include "baybn/learner.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <set>

using namespace baybn;

namespace {

constexpr double kPopulationN = 1e6;

LinearSemModel chain(int p, double beta) {
  Matrix b = Matrix::Zero(p, p);
  for (int j = 1; j < p; ++j) b(j, j - 1) = beta;
  return LinearSemModel::gaussian(b, Vector::Ones(p));
}

void check_invariants(const LearnResult& r, double threshold) {
  const int p = static_cast<int>(r.ordering.size());
  CHECK(is_permutation_of_range(r.ordering, p));
  std::vector<int> pos(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) pos[r.ordering[i]] = i;
  for (const auto& e : r.edges) {
    CHECK(pos[e.edge.from] < pos[e.edge.to]);
    CHECK(e.inclusion >= threshold);
  }
  CHECK(r.steps.size() == static_cast<std::size_t>(std::max(0, p - 1)));
  for (std::size_t i = 0; i < r.steps.size(); ++i)
    CHECK(r.steps[i].chosen == r.ordering[static_cast<std::size_t>(p) - 1 - i]);
}

}  // namespace

TEST_CASE("p = 1 gives an empty edge set") {
  const auto r = learn_structure(Matrix::Constant(1, 1, 2.0), 10, BagusConfig::defaults_for(10));
  CHECK(r.ordering == Ordering{0});
  CHECK(r.edges.empty());
  CHECK(r.steps.empty());
}

TEST_CASE("p = 0 is rejected") {
  CHECK_THROWS_AS(learn_structure(Matrix(0, 0), 10, BagusConfig::defaults_for(10)), ConfigError);
}

TEST_CASE("population 3-node chain is recovered exactly") {
  const auto m = chain(3, 0.8);
  const auto r = learn_structure(covariance_from_model(m), kPopulationN,
                                 BagusConfig::defaults_for(static_cast<long>(kPopulationN)));
  CHECK(r.ordering == Ordering{0, 1, 2});
  CHECK(r.dag() == m.dag());
  check_invariants(r, 0.5);
  // First step removes node 3, whose diagonal is 1.0.
  CHECK(r.steps[0].chosen == 2);
  CHECK(r.steps[0].diagonal[2] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.steps[0].diagonal[0] == doctest::Approx(1.64).epsilon(1e-4));
}

TEST_CASE("ordering only: 2-node chain removes node 2 first") {
  const auto m = chain(2, 0.5);
  const auto r = learn_ordering_only(covariance_from_model(m), kPopulationN,
                                     BagusConfig::defaults_for(static_cast<long>(kPopulationN)));
  CHECK(r.ordering == Ordering{0, 1});
  CHECK(r.edges.empty());
  CHECK(r.steps[0].diagonal[0] == doctest::Approx(1.25).epsilon(1e-4));
  CHECK(r.steps[0].diagonal[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.steps[0].parents.empty());
}

TEST_CASE("exchangeable nodes tie and are flagged") {
  const auto r = learn_ordering_only(Matrix::Identity(4, 4), 1000, BagusConfig::defaults_for(1000));
  // Ties go to the lowest index, so node 0 is removed first.
  CHECK(r.ordering == Ordering{3, 2, 1, 0});
  for (const auto& s : r.steps) {
    CHECK(s.near_tie);
    CHECK(s.diagonal_gap < 1e-6);
  }
}

TEST_CASE("v-structure from samples in at least 19 of 20 seeds") {
  Matrix b = Matrix::Zero(3, 3);
  b(2, 0) = b(2, 1) = 0.8;
  const auto m = LinearSemModel::gaussian(b, Vector::Ones(3));
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = learn_structure(sample(m, 10000, seed), BagusConfig::defaults_for(10000));
    check_invariants(r, 0.5);
    if (r.dag() == m.dag() && r.ordering[2] == 2) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("population recovery over random equal-variance models") {
  int exact = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto m = testing::random_model(7000 + s, 2, 8, true);
    const auto r = learn_structure(covariance_from_model(m), kPopulationN,
                                   BagusConfig::defaults_for(static_cast<long>(kPopulationN)));
    check_invariants(r, 0.5);
    CHECK(ordering_correct(m.dag(), r.ordering));
    if (r.dag() == m.dag()) ++exact;
  }
  CHECK(exact >= 28);
}

TEST_CASE("relabelling the columns relabels the estimate") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto m = testing::random_model(8000 + s, 4, 7);
    const Dataset d = sample(m, 2000, s);
    const int p = m.size();
    std::vector<int> perm(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) perm[i] = (i * 3 + 1) % p;
    if (std::set<int>(perm.begin(), perm.end()).size() != perm.size()) continue;
    Dataset shuffled = d;
    for (int i = 0; i < p; ++i) shuffled.x.col(i) = d.x.col(perm[i]);  // new column i = old perm[i]
    const auto cfg = BagusConfig::defaults_for(2000);
    const auto a = learn_structure(d, cfg);
    const auto b = learn_structure(shuffled, cfg);
    bool tie = false;
    for (const auto& st : a.steps) tie = tie || st.near_tie;
    if (tie) continue;
    std::set<Edge> mapped;
    for (const auto& e : b.edges) mapped.insert({perm[e.edge.from], perm[e.edge.to]});
    std::set<Edge> original;
    for (const auto& e : a.edges) original.insert(e.edge);
    CHECK(mapped == original);
  }
}

TEST_CASE("warm start and cold start agree on a population chain") {
  const auto m = chain(5, 0.7);
  LearnOptions warm;
  warm.warm_start = true;
  const auto cfg = BagusConfig::defaults_for(static_cast<long>(kPopulationN));
  const auto a = learn_structure(covariance_from_model(m), kPopulationN, cfg);
  const auto b = learn_structure(covariance_from_model(m), kPopulationN, cfg, warm);
  CHECK(a.ordering == b.ordering);
  CHECK(a.dag() == b.dag());
  CHECK(b.options.warm_start);
}

TEST_CASE("fewer samples than variables is a warning, not an error") {
  const auto m = testing::random_model(9, 12, 12);
  const auto r = learn_structure(sample(m, 8, 1), BagusConfig::defaults_for(8));
  check_invariants(r, 0.5);
  CHECK_FALSE(r.steps[0].warnings.empty());
}

TEST_CASE("ordering-only and full learning pick the same ordering") {
  const auto m = testing::random_model(77, 6, 6);
  const Dataset d = sample(m, 500, 3);
  const auto cfg = BagusConfig::defaults_for(500);
  CHECK(learn_structure(d, cfg).ordering == learn_ordering_only(d, cfg).ordering);
}
