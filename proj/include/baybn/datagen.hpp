#pragma once

#include "baybn/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace baybn {

enum class ErrorSpec {
  // Normal(0, 2) on every node.
  GaussianEqualVar,
  // Node j cycles through Uniform(-2.5, 2.5), Normal(0, 2) and Normal(0, 10)
  // truncated to (-2.5, 2.5), by j mod 3.
  SubGaussianMix,
  // Student t with 10 degrees of freedom.
  StudentT,
};

std::string to_string(ErrorSpec spec);
// Accepts "gaussian", "subgaussian_mix", "student_t"; throws ConfigError otherwise.
ErrorSpec error_spec_from_string(const std::string& name);

struct ScenarioSpec {
  int p = 25;
  int moral_degree_cap = 3;
  double weight_min = 0.5;
  double weight_max = 1.0;
  ErrorSpec errors = ErrorSpec::GaussianEqualVar;
  std::uint64_t seed = 0;
  long n = 100;
};

void validate(const ScenarioSpec& spec);

/// n x p observations with column names; `scenario` is empty for external data.
struct Dataset {
  Matrix x;
  std::vector<std::string> names;
  std::optional<ScenarioSpec> scenario;
};

// Default names X1..Xp.
std::vector<std::string> default_names(int p);

// Erdos-Renyi DAG along a random causal order with edge probability
// q = min(1, 3 cap / p), redrawn with q reduced by 0.001 until the moral
// graph has maximum degree <= cap.
Dag generate_dag(int p, int moral_degree_cap, std::uint64_t seed);

// Edge weights with magnitude uniform in (weight_min, weight_max) and a fair
// random sign; returns the weight matrix indexed (child, parent).
Matrix assign_weights(const Dag& dag, double weight_min, double weight_max, std::uint64_t seed);

std::vector<ErrorLaw> error_laws(ErrorSpec spec, int p);

// Draws n observations; errors follow each node's law and variables are
// generated along a topological order.
Dataset sample(const LinearSemModel& model, long n, std::uint64_t seed);

/// Mean-centred sample covariance with the 1/n convention; needs n >= 2.
Matrix sample_covariance(const Dataset& data);
Matrix sample_covariance(const Matrix& x);

struct Simulation {
  ScenarioSpec spec;
  Dag dag;
  LinearSemModel model;
  Dataset data;
};

// Graph, weights and samples from independent streams derived from spec.seed.
Simulation simulate(const ScenarioSpec& spec);

}  // namespace baybn
