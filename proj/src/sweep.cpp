#include "baybn/sweep.hpp"

#include "baybn/errors.hpp"
#include "baybn/eval.hpp"
#include "baybn/learner.hpp"
#include "baybn/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>
#include <tuple>

namespace baybn {

void validate(const SweepSpec& s) {
  if (s.ps.empty() || s.dms.empty() || s.ns.empty() || s.errors.empty()) {
    throw ConfigError("sweep grid must be non-empty in every dimension");
  }
  if (s.replications < 1) throw ConfigError("replications must be at least 1");
  if (s.threads < 1) throw ConfigError("threads must be at least 1");
  for (int p : s.ps)
    if (p < 2) throw ConfigError("sweep p values must be at least 2");
  for (int d : s.dms)
    if (d < 1) throw ConfigError("sweep d_M values must be at least 1");
  for (long n : s.ns)
    if (n < 2) throw ConfigError("sweep n values must be at least 2");
  if (!(s.weight_min > 0.0 && s.weight_max > s.weight_min)) {
    throw ConfigError("weight range must satisfy 0 < min < max");
  }
  if (s.config) validate(*s.config);
  for (const auto& [n, c] : s.configs) validate(c);
}

std::uint64_t sweep_graph_seed(std::uint64_t master, int p, int d_M, int rep) {
  return derive_seed(master, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(d_M),
                              static_cast<std::uint64_t>(rep)});
}

std::uint64_t sweep_sample_seed(std::uint64_t graph_seed, long n, ErrorSpec errors) {
  return derive_seed(graph_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(errors)});
}

SweepRow run_replication(const SweepSpec& spec, int p, int d_M, long n, ErrorSpec errors, int rep) {
  SweepRow row;
  row.p = p;
  row.d_M = d_M;
  row.n = n;
  row.errors = errors;
  row.rep = rep;
  row.seed = sweep_graph_seed(spec.master_seed, p, d_M, rep);
  const auto start = std::chrono::steady_clock::now();
  try {
    const Dag dag = generate_dag(p, d_M, derive_seed(row.seed, {1}));
    const Matrix w = assign_weights(dag, spec.weight_min, spec.weight_max, derive_seed(row.seed, {2}));
    const auto model = LinearSemModel::with_laws(w, error_laws(errors, p));
    const Dataset data = sample(model, n, sweep_sample_seed(row.seed, n, errors));
    const auto it = spec.configs.find(n);
    const BagusConfig cfg = it != spec.configs.end() ? it->second
                            : spec.config            ? *spec.config
                                                     : BagusConfig::defaults_for(n);
    const LearnResult fit = learn_structure(data, cfg);
    row.hamming = hamming_distance(dag, fit.dag());
    row.ordering_ok = ordering_correct(dag, fit.ordering);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<SweepCell> aggregate(const std::vector<SweepRow>& rows, int replications) {
  using Key = std::tuple<int, int, long, int>;
  std::map<Key, std::size_t> index;
  std::vector<SweepCell> cells;
  std::vector<std::vector<double>> values;
  std::vector<int> ordered;
  for (const auto& r : rows) {
    const Key k{r.p, r.d_M, r.n, static_cast<int>(r.errors)};
    auto [it, fresh] = index.try_emplace(k, cells.size());
    if (fresh) {
      SweepCell c;
      c.p = r.p;
      c.d_M = r.d_M;
      c.n = r.n;
      c.errors = r.errors;
      c.replications = replications;
      c.C = static_cast<double>(r.n) / std::log(static_cast<double>(r.p));
      cells.push_back(c);
      values.emplace_back();
      ordered.push_back(0);
    }
    const std::size_t i = it->second;
    if (r.failed) {
      ++cells[i].failures;
      continue;
    }
    values[i].push_back(r.hamming);
    if (r.ordering_ok) ++ordered[i];
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    const auto& v = values[i];
    c.completed = static_cast<int>(v.size());
    if (v.empty()) {
      c.mean_hamming = c.sd_hamming = c.ordering_rate = std::nan("");
      continue;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    c.mean_hamming = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - c.mean_hamming) * (x - c.mean_hamming);
    c.sd_hamming = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    c.ordering_rate = static_cast<double>(ordered[i]) / static_cast<double>(v.size());
  }
  return cells;
}

SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec);
  struct Task {
    int p, d_M;
    long n;
    ErrorSpec errors;
    int rep;
  };
  std::vector<Task> tasks;
  for (int p : spec.ps)
    for (int d : spec.dms)
      for (long n : spec.ns)
        for (ErrorSpec e : spec.errors)
          for (int rep = 0; rep < spec.replications; ++rep) tasks.push_back({p, d, n, e, rep});

  SweepResult result;
  result.spec = spec;
  result.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const Task& t = tasks[i];
      result.rows[i] = run_replication(spec, t.p, t.d_M, t.n, t.errors, t.rep);
    }
  };
  const int threads = std::min<int>(spec.threads, static_cast<int>(tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.cells = aggregate(result.rows, spec.replications);
  return result;
}

int default_thread_count() {
  if (const char* env = std::getenv("BAYBN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace baybn
