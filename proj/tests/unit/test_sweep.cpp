#include "baybn/errors.hpp"
#include "baybn/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>

using namespace baybn;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.ps = {6};
  s.dms = {2};
  s.ns = {100, 300};
  s.replications = 3;
  s.master_seed = 11;
  return s;
}

SweepRow row(long n, int rep, int hamming, bool ok, bool failed = false) {
  SweepRow r;
  r.p = 10;
  r.d_M = 3;
  r.n = n;
  r.rep = rep;
  r.hamming = hamming;
  r.ordering_ok = ok;
  r.failed = failed;
  return r;
}

}  // namespace

TEST_CASE("sweeps are identical across thread counts") {
  auto spec = small_spec();
  const auto a = run_sweep(spec);
  spec.threads = 2;
  const auto b = run_sweep(spec);
  REQUIRE(a.rows.size() == 6);
  REQUIRE(b.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].n == b.rows[i].n);
    CHECK(a.rows[i].rep == b.rows[i].rep);
    CHECK(a.rows[i].seed == b.rows[i].seed);
    CHECK(a.rows[i].hamming == b.rows[i].hamming);
    CHECK(a.rows[i].ordering_ok == b.rows[i].ordering_ok);
    CHECK_FALSE(a.rows[i].failed);
  }
  REQUIRE(a.cells.size() == 2);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].mean_hamming == b.cells[i].mean_hamming);
    CHECK(a.cells[i].sd_hamming == b.cells[i].sd_hamming);
  }
}

TEST_CASE("rows are in grid order and share graphs across n") {
  const auto res = run_sweep(small_spec());
  CHECK(res.rows[0].n == 100);
  CHECK(res.rows[2].rep == 2);
  CHECK(res.rows[3].n == 300);
  for (int rep = 0; rep < 3; ++rep) CHECK(res.rows[rep].seed == res.rows[3 + rep].seed);
  CHECK(sweep_graph_seed(11, 6, 2, 0) != sweep_graph_seed(11, 6, 2, 1));
  CHECK(sweep_sample_seed(5, 100, ErrorSpec::StudentT) != sweep_sample_seed(5, 300, ErrorSpec::StudentT));
  CHECK(sweep_sample_seed(5, 100, ErrorSpec::StudentT) != sweep_sample_seed(5, 100, ErrorSpec::SubGaussianMix));
}

TEST_CASE("a single replication matches the sweep row") {
  const auto spec = small_spec();
  const auto res = run_sweep(spec);
  const auto r = run_replication(spec, 6, 2, 300, ErrorSpec::GaussianEqualVar, 1);
  CHECK(r.hamming == res.rows[4].hamming);
  CHECK(r.seed == res.rows[4].seed);
}

TEST_CASE("aggregation against a hand computation") {
  // Hamming 1, 2, 6: mean 3, sd sqrt(((-2)^2 + (-1)^2 + 3^2) / 2) = sqrt(7).
  const std::vector<SweepRow> rows{row(50, 0, 1, true), row(50, 1, 2, false), row(50, 2, 6, true),
                                   row(50, 3, 100, false, true), row(80, 0, 4, true)};
  const auto cells = aggregate(rows, 4);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].n == 50);
  CHECK(cells[0].completed == 3);
  CHECK(cells[0].failures == 1);
  CHECK(cells[0].replications == 4);
  CHECK(cells[0].mean_hamming == doctest::Approx(3.0));
  CHECK(cells[0].sd_hamming == doctest::Approx(std::sqrt(7.0)));
  CHECK(cells[0].ordering_rate == doctest::Approx(2.0 / 3.0));
  CHECK(cells[0].C == doctest::Approx(50 / std::log(10.0)));
  CHECK(cells[1].sd_hamming == 0.0);
  const auto empty = aggregate({row(50, 0, 0, false, true)}, 1);
  CHECK(std::isnan(empty[0].mean_hamming));
  CHECK(empty[0].failures == 1);
}

TEST_CASE("sweep validation") {
  auto bad = [](auto edit) {
    auto s = small_spec();
    edit(s);
    CHECK_THROWS_AS(validate(s), ConfigError);
  };
  bad([](SweepSpec& s) { s.ps.clear(); });
  bad([](SweepSpec& s) { s.ps = {1}; });
  bad([](SweepSpec& s) { s.dms = {0}; });
  bad([](SweepSpec& s) { s.ns = {1}; });
  bad([](SweepSpec& s) { s.replications = 0; });
  bad([](SweepSpec& s) { s.weight_min = s.weight_max; });
  bad([](SweepSpec& s) { s.threads = 0; });
  CHECK_NOTHROW(validate(small_spec()));
}

TEST_CASE("thread count from the environment") {
  ::setenv("BAYBN_THREADS", "3", 1);
  CHECK(default_thread_count() == 3);
  ::setenv("BAYBN_THREADS", "zero", 1);
  CHECK(default_thread_count() >= 1);
  ::unsetenv("BAYBN_THREADS");
}
