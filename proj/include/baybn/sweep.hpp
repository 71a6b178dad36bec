#pragma once

#include "baybn/bagus.hpp"
#include "baybn/datagen.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace baybn {

struct SweepSpec {
  std::vector<int> ps{25};
  std::vector<int> dms{3};
  std::vector<long> ns{100, 400, 800};
  std::vector<ErrorSpec> errors{ErrorSpec::GaussianEqualVar};
  int replications = 30;
  std::uint64_t master_seed = 0;
  double weight_min = 0.5;
  double weight_max = 1.0;
  // Hyper-parameters per sample size; sizes not listed use `config`, or
  // BagusConfig::defaults_for(n) when that is unset.
  std::map<long, BagusConfig> configs;
  std::optional<BagusConfig> config;
  int threads = 1;
};

// Throws ConfigError for an empty grid or invalid entries.
void validate(const SweepSpec& spec);

/// One replication. The graph and weights depend on (p, d_M, rep) only, so
/// all sample sizes and error laws of a replication share a graph.
struct SweepRow {
  int p = 0;
  int d_M = 0;
  long n = 0;
  ErrorSpec errors = ErrorSpec::GaussianEqualVar;
  int rep = 0;
  std::uint64_t seed = 0;  // graph seed; the sample seed is derived from it and n
  int hamming = 0;
  bool ordering_ok = false;
  double runtime_ms = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepCell {
  int p = 0;
  int d_M = 0;
  long n = 0;
  ErrorSpec errors = ErrorSpec::GaussianEqualVar;
  int replications = 0;  // requested
  int completed = 0;
  int failures = 0;
  double mean_hamming = 0.0;
  double sd_hamming = 0.0;  // n-1 divisor; 0 for one replication
  double ordering_rate = 0.0;
  double C = 0.0;  // n / log p
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;  // grid order: p, d_M, n, errors, rep
  std::vector<SweepCell> cells;
};

std::uint64_t sweep_graph_seed(std::uint64_t master, int p, int d_M, int rep);
std::uint64_t sweep_sample_seed(std::uint64_t graph_seed, long n, ErrorSpec errors);

// Runs a single replication; failures are caught and recorded in the row.
SweepRow run_replication(const SweepSpec& spec, int p, int d_M, long n, ErrorSpec errors, int rep);

// Cells in first-appearance order of the rows. Failed rows are excluded from
// the statistics and counted.
std::vector<SweepCell> aggregate(const std::vector<SweepRow>& rows, int replications);

SweepResult run_sweep(const SweepSpec& spec);

// BAYBN_THREADS when set to a positive integer, else the hardware concurrency.
int default_thread_count();

}  // namespace baybn
