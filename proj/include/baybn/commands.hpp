#pragma once

#include "baybn/bagus.hpp"
#include "baybn/datagen.hpp"
#include "baybn/io.hpp"
#include "baybn/learner.hpp"
#include "baybn/sweep.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace baybn {

struct LearnBlock {
  std::string data;  // CSV path
  bool warm_start = false;
  double gap_tolerance = 1e-6;
};

struct EvalBlock {
  std::string truth;
  std::string estimate;
};

struct SweepBlock {
  std::vector<int> ps{25};
  std::vector<int> dms{3};
  std::vector<long> ns{100, 400, 800};
  std::vector<ErrorSpec> errors{ErrorSpec::GaussianEqualVar};
  int replications = 30;
};

struct TheoryBlock {
  std::string model;          // ground-truth JSON path; empty to use kind
  std::string kind = "chain"; // chain or star
  int p = 10;
  double beta = 0.5;
  double sigma2 = 1.0;
  std::optional<double> n;
  std::optional<double> epsilon1;
};

/// Everything a command needs, loadable from and echoed as one JSON document.
struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = ".";
  ScenarioSpec scenario;
  // "auto", or an object whose keys override the defaults for the sample
  // size at hand.
  Json bagus = "auto";
  LearnBlock learn;
  EvalBlock eval;
  SweepBlock sweep;
  TheoryBlock theory;
};

// Unknown keys at any level raise ConfigError. The "bagus" block is either
// the string "auto" or an object overriding the defaults for the sample size.
RunConfig run_config_from_json(const Json& j);

// Hyper-parameters used for n samples.
BagusConfig resolve_bagus(const RunConfig& c, long n);

// Fully resolved config for `command`; `n` resolves the bagus block.
Json resolved_config(const RunConfig& c, const std::string& command, std::optional<long> n = {});

// Each command writes its outputs under c.out and returns the paths written.
std::vector<std::string> cmd_simulate(const RunConfig& c);
std::vector<std::string> cmd_learn(const RunConfig& c);
std::vector<std::string> cmd_eval(const RunConfig& c);
std::vector<std::string> cmd_sweep(const RunConfig& c);
std::vector<std::string> cmd_theory(const RunConfig& c);

}  // namespace baybn
