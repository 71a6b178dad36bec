#include "baybn/commands.hpp"
#include "baybn/errors.hpp"
#include "baybn/io.hpp"
#include "baybn/sweep.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

using namespace baybn;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Flags shared by every subcommand and the per-command overrides, gathered as
// a JSON patch over the config file.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  Json patch = Json::object();
  std::vector<std::function<void()>> apply;
};

template <class T>
void add_override(CLI::App* app, Overrides& o, const std::string& flag, std::vector<std::string> path,
                  const std::string& help) {
  auto value = std::make_shared<std::optional<T>>();
  auto* opt = app->add_option(flag, *value, help);
  o.apply.push_back([&o, value, path, opt] {
    if (!opt->count()) return;
    Json* node = &o.patch;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!node->contains(path[i]) || !(*node)[path[i]].is_object()) (*node)[path[i]] = Json::object();
      node = &(*node)[path[i]];
    }
    (*node)[path.back()] = **value;
  });
}

void common_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--threads", o.threads, "worker threads (sweep only)");
}

void bagus_flags(CLI::App* app, Overrides& o) {
  add_override<double>(app, o, "--nu0", {"bagus", "nu0"}, "spike scale");
  add_override<double>(app, o, "--nu1", {"bagus", "nu1"}, "slab scale");
  add_override<double>(app, o, "--eta", {"bagus", "eta"}, "prior slab weight");
  add_override<double>(app, o, "--tau", {"bagus", "tau"}, "diagonal prior rate");
  add_override<double>(app, o, "--threshold", {"bagus", "threshold"}, "inclusion threshold T");
}

void merge(Json& base, const Json& patch) {
  for (const auto& item : patch.items()) {
    if (item.value().is_object() && base.contains(item.key()) && base[item.key()].is_object()) {
      merge(base[item.key()], item.value());
    } else {
      base[item.key()] = item.value();
    }
  }
}

RunConfig load(const std::string& command, Overrides& o, bool bagus_auto_flag) {
  Json j = Json::object();
  if (!o.config.empty()) j = parse_json(read_file(o.config), o.config);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (auto& f : o.apply) f();
  if (o.patch.contains("bagus") && j.contains("bagus") && j["bagus"].is_string()) j.erase("bagus");
  merge(j, o.patch);
  if (bagus_auto_flag) j["bagus"] = "auto";
  if (o.seed) j["seed"] = *o.seed;
  if (o.threads) j["threads"] = *o.threads;
  if (o.out) j["out"] = *o.out;
  if (command == "sweep" && !j.contains("threads")) j["threads"] = default_thread_count();
  return run_config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear Bayesian network structure learning"};
  app.require_subcommand(1);

  std::map<std::string, Overrides> ov;
  std::map<std::string, CLI::App*> subs;
  bool learn_auto = false, sweep_auto = false;

  auto* sim = subs["simulate"] = app.add_subcommand("simulate", "generate a random DAG, model and dataset");
  common_flags(sim, ov["simulate"]);
  add_override<int>(sim, ov["simulate"], "--p", {"scenario", "p"}, "number of variables");
  add_override<int>(sim, ov["simulate"], "--dm", {"scenario", "moral_degree_cap"}, "moral degree cap");
  add_override<long>(sim, ov["simulate"], "--n", {"scenario", "n"}, "sample size");
  add_override<std::string>(sim, ov["simulate"], "--errors", {"scenario", "errors"},
                            "gaussian | subgaussian_mix | student_t");
  add_override<double>(sim, ov["simulate"], "--weight-min", {"scenario", "weight_min"}, "");
  add_override<double>(sim, ov["simulate"], "--weight-max", {"scenario", "weight_max"}, "");

  auto* learn = subs["learn"] = app.add_subcommand("learn", "learn ordering and edges from a CSV file");
  common_flags(learn, ov["learn"]);
  add_override<std::string>(learn, ov["learn"], "--data", {"learn", "data"}, "CSV with a header row");
  add_override<bool>(learn, ov["learn"], "--warm-start", {"learn", "warm_start"}, "true | false");
  add_override<double>(learn, ov["learn"], "--gap-tolerance", {"learn", "gap_tolerance"}, "");
  bagus_flags(learn, ov["learn"]);
  learn->add_flag("--auto", learn_auto, "use the default hyper-parameters for n");

  auto* ev = subs["eval"] = app.add_subcommand("eval", "compare an estimate against the truth");
  common_flags(ev, ov["eval"]);
  add_override<std::string>(ev, ov["eval"], "--truth", {"eval", "truth"}, "truth JSON");
  add_override<std::string>(ev, ov["eval"], "--estimate", {"eval", "estimate"}, "estimate JSON");

  auto* sw = subs["sweep"] = app.add_subcommand("sweep", "replicated simulation study");
  common_flags(sw, ov["sweep"]);
  add_override<std::vector<int>>(sw, ov["sweep"], "--ps", {"sweep", "ps"}, "");
  add_override<std::vector<int>>(sw, ov["sweep"], "--dms", {"sweep", "dms"}, "");
  add_override<std::vector<long>>(sw, ov["sweep"], "--ns", {"sweep", "ns"}, "");
  add_override<std::vector<std::string>>(sw, ov["sweep"], "--errors", {"sweep", "errors"}, "");
  add_override<int>(sw, ov["sweep"], "--reps", {"sweep", "replications"}, "");
  bagus_flags(sw, ov["sweep"]);
  sw->add_flag("--auto", sweep_auto, "use the default hyper-parameters per n");

  auto* th = subs["theory"] = app.add_subcommand("theory", "theory quantities and hyper-parameter admissibility");
  common_flags(th, ov["theory"]);
  add_override<std::string>(th, ov["theory"], "--model", {"theory", "model"}, "model JSON");
  add_override<std::string>(th, ov["theory"], "--kind", {"theory", "kind"}, "chain | star");
  add_override<int>(th, ov["theory"], "--p", {"theory", "p"}, "");
  add_override<double>(th, ov["theory"], "--beta", {"theory", "beta"}, "");
  add_override<double>(th, ov["theory"], "--sigma2", {"theory", "sigma2"}, "");
  add_override<double>(th, ov["theory"], "--n", {"theory", "n"}, "sample size");
  add_override<double>(th, ov["theory"], "--epsilon1", {"theory", "epsilon1"}, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    const auto start = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    const bool use_auto = (command == "learn" && learn_auto) || (command == "sweep" && sweep_auto);
    const RunConfig cfg = load(command, ov[command], use_auto);

    std::vector<std::string> outputs;
    if (command == "simulate") outputs = cmd_simulate(cfg);
    if (command == "learn") outputs = cmd_learn(cfg);
    if (command == "eval") outputs = cmd_eval(cfg);
    if (command == "sweep") outputs = cmd_sweep(cfg);
    if (command == "theory") outputs = cmd_theory(cfg);

    Json meta;
    meta["command"] = command;
    meta["started_utc"] = started;
    meta["finished_utc"] = utc_now();
    meta["elapsed_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    meta["outputs"] = outputs;
    const auto meta_path = (std::filesystem::path(cfg.out) / "run_metadata.json").string();
    write_file_atomic(meta_path, meta.dump(2) + "\n");
    for (const auto& p : outputs) std::cout << p << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
