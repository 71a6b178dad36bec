#include "baybn/commands.hpp"

#include "baybn/errors.hpp"
#include "baybn/eval.hpp"

#include <filesystem>
#include <initializer_list>

namespace baybn {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void maybe(const Json& j, const char* key, T& target, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::string path_in(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out) / name).string();
}

Json scenario_json(const RunConfig& c) {
  Json s = to_json(c.scenario);
  s.erase("seed");
  return s;
}

std::vector<std::string> error_names(const std::vector<ErrorSpec>& errors) {
  std::vector<std::string> out;
  for (auto e : errors) out.push_back(to_string(e));
  return out;
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  check_keys(j, {"seed", "threads", "out", "scenario", "bagus", "learn", "eval", "sweep", "theory",
                 "bagus_by_n"},
             "config");
  RunConfig c;
  maybe(j, "seed", c.seed, "config");
  maybe(j, "threads", c.threads, "config");
  maybe(j, "out", c.out, "config");
  if (c.threads < 1) throw ConfigError("config.threads must be at least 1");

  if (j.contains("scenario")) {
    if (j["scenario"].contains("seed")) {
      throw ConfigError("scenario.seed is not accepted; use the top-level seed");
    }
    c.scenario = scenario_from_json(j["scenario"], c.scenario);
  }
  c.scenario.seed = c.seed;

  if (j.contains("bagus")) {
    const Json& b = j["bagus"];
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") throw ConfigError("bagus must be \"auto\" or an object");
    } else {
      bagus_config_from_json(b, BagusConfig::defaults_for(c.scenario.n));  // key and type check
    }
    c.bagus = b;
  }

  if (j.contains("learn")) {
    const Json& l = j["learn"];
    check_keys(l, {"data", "warm_start", "gap_tolerance"}, "learn");
    maybe(l, "data", c.learn.data, "learn");
    maybe(l, "warm_start", c.learn.warm_start, "learn");
    maybe(l, "gap_tolerance", c.learn.gap_tolerance, "learn");
    if (!(c.learn.gap_tolerance >= 0.0)) throw ConfigError("learn.gap_tolerance must be >= 0");
  }

  if (j.contains("eval")) {
    const Json& e = j["eval"];
    check_keys(e, {"truth", "estimate"}, "eval");
    maybe(e, "truth", c.eval.truth, "eval");
    maybe(e, "estimate", c.eval.estimate, "eval");
  }

  if (j.contains("sweep")) {
    const Json& s = j["sweep"];
    check_keys(s, {"ps", "dms", "ns", "errors", "replications"}, "sweep");
    maybe(s, "ps", c.sweep.ps, "sweep");
    maybe(s, "dms", c.sweep.dms, "sweep");
    maybe(s, "ns", c.sweep.ns, "sweep");
    maybe(s, "replications", c.sweep.replications, "sweep");
    if (s.contains("errors")) {
      std::vector<std::string> names;
      maybe(s, "errors", names, "sweep");
      c.sweep.errors.clear();
      for (const auto& n : names) c.sweep.errors.push_back(error_spec_from_string(n));
    }
  }

  if (j.contains("theory")) {
    const Json& t = j["theory"];
    check_keys(t, {"model", "kind", "p", "beta", "sigma2", "n", "epsilon1"}, "theory");
    maybe(t, "model", c.theory.model, "theory");
    maybe(t, "kind", c.theory.kind, "theory");
    maybe(t, "p", c.theory.p, "theory");
    maybe(t, "beta", c.theory.beta, "theory");
    maybe(t, "sigma2", c.theory.sigma2, "theory");
    if (t.contains("n") && !t["n"].is_null()) {
      double v = 0;
      maybe(t, "n", v, "theory");
      c.theory.n = v;
    }
    if (t.contains("epsilon1") && !t["epsilon1"].is_null()) {
      double v = 0;
      maybe(t, "epsilon1", v, "theory");
      c.theory.epsilon1 = v;
    }
    graph_kind_from_string(c.theory.kind);
  }
  return c;
}

BagusConfig resolve_bagus(const RunConfig& c, long n) {
  const BagusConfig base = BagusConfig::defaults_for(n);
  return c.bagus.is_object() ? bagus_config_from_json(c.bagus, base) : base;
}

Json resolved_config(const RunConfig& c, const std::string& command, std::optional<long> n) {
  Json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  auto bagus = [&]() -> Json {
    if (n) return to_json(resolve_bagus(c, *n));
    return c.bagus;
  };
  if (command == "simulate") {
    j["scenario"] = scenario_json(c);
  } else if (command == "learn") {
    j["bagus"] = bagus();
    j["learn"] = {{"data", c.learn.data},
                  {"warm_start", c.learn.warm_start},
                  {"gap_tolerance", c.learn.gap_tolerance}};
  } else if (command == "eval") {
    j["eval"] = {{"truth", c.eval.truth}, {"estimate", c.eval.estimate}};
  } else if (command == "sweep") {
    j["scenario"] = {{"weight_min", c.scenario.weight_min}, {"weight_max", c.scenario.weight_max}};
    j["bagus"] = bagus();
    Json by_n;
    for (long v : c.sweep.ns) by_n[std::to_string(v)] = to_json(resolve_bagus(c, v));
    j["bagus_by_n"] = by_n;
    j["sweep"] = {{"ps", c.sweep.ps},
                  {"dms", c.sweep.dms},
                  {"ns", c.sweep.ns},
                  {"errors", error_names(c.sweep.errors)},
                  {"replications", c.sweep.replications}};
  } else if (command == "theory") {
    Json t;
    if (!c.theory.model.empty()) {
      t["model"] = c.theory.model;
    } else {
      t["kind"] = c.theory.kind;
      t["p"] = c.theory.p;
      t["beta"] = c.theory.beta;
      t["sigma2"] = c.theory.sigma2;
    }
    t["n"] = c.theory.n ? Json(*c.theory.n) : Json(nullptr);
    t["epsilon1"] = c.theory.epsilon1 ? Json(*c.theory.epsilon1) : Json(nullptr);
    j["theory"] = t;
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return j;
}

std::vector<std::string> cmd_simulate(const RunConfig& c) {
  validate(c.scenario);
  const Simulation sim = simulate(c.scenario);
  const std::vector<std::string> out = {path_in(c, "data.csv"), path_in(c, "truth.json"),
                                        path_in(c, "resolved_config.json")};
  write_file_atomic(out[0], dataset_to_csv(sim.data));
  write_file_atomic(out[1], model_to_json(sim.model, sim.data.names, sim.spec).dump(2) + "\n");
  write_file_atomic(out[2], resolved_config(c, "simulate").dump(2) + "\n");
  return out;
}

std::vector<std::string> cmd_learn(const RunConfig& c) {
  if (c.learn.data.empty()) throw ConfigError("learn needs a data path");
  const Dataset data = dataset_from_csv(read_file(c.learn.data));
  if (data.x.cols() < 1) throw DataError("'" + c.learn.data + "' has no columns");
  const long n = static_cast<long>(data.x.rows());
  if (n < 2) throw DataError("'" + c.learn.data + "' needs at least two rows");
  const BagusConfig cfg = resolve_bagus(c, n);
  LearnOptions opts;
  opts.warm_start = c.learn.warm_start;
  opts.gap_tolerance = c.learn.gap_tolerance;
  const LearnResult r = learn_structure(data, cfg, opts);

  const std::vector<std::string> out = {path_in(c, "learn_result.json"), path_in(c, "edges.csv"),
                                        path_in(c, "resolved_config.json")};
  write_file_atomic(out[0], to_json(r, data.names).dump(2) + "\n");
  write_file_atomic(out[1], edges_to_csv(r, data.names));
  write_file_atomic(out[2], resolved_config(c, "learn", n).dump(2) + "\n");
  return out;
}

std::vector<std::string> cmd_eval(const RunConfig& c) {
  if (c.eval.truth.empty() || c.eval.estimate.empty()) {
    throw ConfigError("eval needs truth and estimate paths");
  }
  const GraphFile truth = graph_from_json(parse_json(read_file(c.eval.truth), c.eval.truth));
  const GraphFile est = graph_from_json(parse_json(read_file(c.eval.estimate), c.eval.estimate));
  if (truth.dag.size() != est.dag.size()) {
    throw DataError("truth has " + std::to_string(truth.dag.size()) + " nodes, estimate has " +
                    std::to_string(est.dag.size()));
  }
  const EdgeCounts counts = edge_counts(truth.dag, est.dag);
  Json m;
  m["hamming"] = hamming_distance(truth.dag, est.dag);
  m["ordering_ok"] = est.ordering ? Json(ordering_correct(truth.dag, *est.ordering)) : Json(nullptr);
  m["true_positives"] = counts.true_positives;
  m["false_positives"] = counts.false_positives;
  m["false_negatives"] = counts.false_negatives;
  m["truth_edges"] = truth.dag.edge_count();
  m["estimate_edges"] = est.dag.edge_count();

  const std::vector<std::string> out = {path_in(c, "metrics.json"), path_in(c, "resolved_config.json")};
  write_file_atomic(out[0], m.dump(2) + "\n");
  write_file_atomic(out[1], resolved_config(c, "eval").dump(2) + "\n");
  return out;
}

std::vector<std::string> cmd_sweep(const RunConfig& c) {
  SweepSpec spec;
  spec.ps = c.sweep.ps;
  spec.dms = c.sweep.dms;
  spec.ns = c.sweep.ns;
  spec.errors = c.sweep.errors;
  spec.replications = c.sweep.replications;
  spec.master_seed = c.seed;
  spec.weight_min = c.scenario.weight_min;
  spec.weight_max = c.scenario.weight_max;
  for (long n : spec.ns) spec.configs[n] = resolve_bagus(c, n);
  spec.threads = c.threads;
  const SweepResult r = run_sweep(spec);

  const std::vector<std::string> out = {path_in(c, "sweep_raw.csv"), path_in(c, "sweep_summary.csv"),
                                        path_in(c, "sweep_runtime.csv"),
                                        path_in(c, "resolved_config.json")};
  write_file_atomic(out[0], sweep_rows_csv(r));
  write_file_atomic(out[1], sweep_cells_csv(r));
  write_file_atomic(out[2], sweep_runtime_csv(r));
  write_file_atomic(out[3], resolved_config(c, "sweep").dump(2) + "\n");
  return out;
}

std::vector<std::string> cmd_theory(const RunConfig& c) {
  if (!c.theory.n) throw ConfigError("theory needs n (sample size for the recommendation)");
  if (!c.theory.epsilon1) throw ConfigError("theory needs epsilon1");
  Json doc;
  LinearSemModel model;
  if (!c.theory.model.empty()) {
    model = model_from_json(parse_json(read_file(c.theory.model), c.theory.model));
    doc["source"] = {{"model", c.theory.model}};
  } else {
    const GraphKind kind = graph_kind_from_string(c.theory.kind);
    model = reference_model(kind, c.theory.p, c.theory.beta, c.theory.sigma2);
    doc["source"] = {{"kind", c.theory.kind},
                     {"p", c.theory.p},
                     {"beta", c.theory.beta},
                     {"sigma2", c.theory.sigma2}};
  }
  const TheoryReport report = theory_report(model);
  doc["report"] = to_json(report);
  if (c.theory.model.empty() && c.theory.p >= 2 &&
      !(c.theory.kind == "chain" && std::abs(c.theory.beta) >= 1.0)) {
    doc["closed_forms"] =
        to_json(chain_star_closed_forms(graph_kind_from_string(c.theory.kind), c.theory.p,
                                        c.theory.beta, c.theory.sigma2));
  }
  const HyperparamRecommendation rec = recommend_hyperparams(report, *c.theory.n, *c.theory.epsilon1);
  doc["recommendation"] = to_json(rec);

  const std::vector<std::string> out = {path_in(c, "theory_report.json"), path_in(c, "admissibility.txt"),
                                        path_in(c, "resolved_config.json")};
  write_file_atomic(out[0], doc.dump(2) + "\n");
  write_file_atomic(out[1], admissibility_table(rec));
  write_file_atomic(out[2], resolved_config(c, "theory").dump(2) + "\n");
  return out;
}

}  // namespace baybn
