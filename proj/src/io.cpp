#include "baybn/io.hpp"

#include "baybn/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <sstream>

namespace baybn {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  int line = 1, record_line = 1;

  auto end_record = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty() && table.rows.empty()) {
        table.header = record;
      } else {
        if (record.size() != table.header.size()) {
          throw DataError("line " + std::to_string(record_line) + ": expected " +
                          std::to_string(table.header.size()) + " fields, found " +
                          std::to_string(record.size()));
        }
        table.rows.push_back(record);
        table.row_lines.push_back(record_line);
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) {
          throw DataError("line " + std::to_string(line) + ": stray quote inside a field");
        }
        quoted = field_started = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (quoted) throw DataError("line " + std::to_string(record_line) + ": unterminated quoted field");
  if (!field.empty() || !record.empty() || field_started) end_record();
  if (table.header.empty()) throw DataError("CSV input has no header row");
  return table;
}

namespace {

bool parse_number(const std::string& raw, double& out) {
  std::size_t b = 0, e = raw.size();
  while (b < e && (raw[b] == ' ' || raw[b] == '\t')) ++b;
  while (e > b && (raw[e - 1] == ' ' || raw[e - 1] == '\t')) --e;
  if (b < e && raw[b] == '+') ++b;
  if (b == e) return false;
  auto res = std::from_chars(raw.data() + b, raw.data() + e, out);
  return res.ec == std::errc() && res.ptr == raw.data() + e && std::isfinite(out);
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void maybe(const Json& j, const char* key, T& target, const std::string& where) {
  if (j.contains(key)) target = get<T>(j, key, where);
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Dataset dataset_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  Dataset d;
  d.names = t.header;
  const auto p = static_cast<Eigen::Index>(t.header.size());
  d.x.resize(static_cast<Eigen::Index>(t.rows.size()), p);
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (Eigen::Index c = 0; c < p; ++c) {
      double v = 0.0;
      const auto& cell = t.rows[r][static_cast<std::size_t>(c)];
      if (!parse_number(cell, v)) {
        throw DataError("line " + std::to_string(t.row_lines[r]) + ", column " +
                        std::to_string(c + 1) + " ('" + t.header[static_cast<std::size_t>(c)] +
                        "'): not a finite number: '" + cell + "'");
      }
      d.x(static_cast<Eigen::Index>(r), c) = v;
    }
  return d;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out = csv_line(data.names);
  std::vector<std::string> fields(static_cast<std::size_t>(data.x.cols()));
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) fields[c] = format_double(data.x(r, c));
    out += csv_line(fields);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw DataError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw DataError("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

Json to_json(const BagusConfig& c) {
  Json j;
  j["nu0"] = c.nu0;
  j["nu1"] = c.nu1;
  j["eta"] = c.eta;
  j["tau"] = c.tau;
  j["threshold"] = c.threshold;
  j["spectral_bound"] = c.spectral_bound ? Json(*c.spectral_bound) : Json(nullptr);
  j["max_outer_iters"] = c.max_outer_iters;
  j["tol"] = c.tol;
  j["inner_max_iters"] = c.inner_max_iters;
  j["inner_tol"] = c.inner_tol;
  return j;
}

BagusConfig bagus_config_from_json(const Json& j, const BagusConfig& base) {
  const std::string w = "bagus";
  check_keys(j, {"nu0", "nu1", "eta", "tau", "threshold", "spectral_bound", "max_outer_iters", "tol",
                 "inner_max_iters", "inner_tol"},
             w);
  BagusConfig c = base;
  maybe(j, "nu0", c.nu0, w);
  maybe(j, "nu1", c.nu1, w);
  maybe(j, "eta", c.eta, w);
  maybe(j, "tau", c.tau, w);
  maybe(j, "threshold", c.threshold, w);
  if (j.contains("spectral_bound")) {
    if (j["spectral_bound"].is_null()) {
      c.spectral_bound.reset();
    } else {
      c.spectral_bound = get<double>(j, "spectral_bound", w);
    }
  }
  maybe(j, "max_outer_iters", c.max_outer_iters, w);
  maybe(j, "tol", c.tol, w);
  maybe(j, "inner_max_iters", c.inner_max_iters, w);
  maybe(j, "inner_tol", c.inner_tol, w);
  validate(c);
  return c;
}

Json to_json(const ScenarioSpec& s) {
  Json j;
  j["p"] = s.p;
  j["moral_degree_cap"] = s.moral_degree_cap;
  j["weight_min"] = s.weight_min;
  j["weight_max"] = s.weight_max;
  j["errors"] = to_string(s.errors);
  j["seed"] = s.seed;
  j["n"] = s.n;
  return j;
}

ScenarioSpec scenario_from_json(const Json& j, const ScenarioSpec& base) {
  const std::string w = "scenario";
  check_keys(j, {"p", "moral_degree_cap", "weight_min", "weight_max", "errors", "seed", "n"}, w);
  ScenarioSpec s = base;
  maybe(j, "p", s.p, w);
  maybe(j, "moral_degree_cap", s.moral_degree_cap, w);
  maybe(j, "weight_min", s.weight_min, w);
  maybe(j, "weight_max", s.weight_max, w);
  if (j.contains("errors")) s.errors = error_spec_from_string(get<std::string>(j, "errors", w));
  maybe(j, "seed", s.seed, w);
  maybe(j, "n", s.n, w);
  validate(s);
  return s;
}

Json to_json(const ErrorLaw& law) {
  struct Visitor {
    Json operator()(const GaussianLaw& g) const { return {{"type", "gaussian"}, {"variance", g.variance}}; }
    Json operator()(const UniformLaw& u) const { return {{"type", "uniform"}, {"half_width", u.half_width}}; }
    Json operator()(const TruncatedGaussianLaw& t) const {
      return {{"type", "truncated_gaussian"}, {"variance", t.variance}, {"bound", t.bound}};
    }
    Json operator()(const StudentTLaw& t) const { return {{"type", "student_t"}, {"df", t.df}}; }
  };
  return std::visit(Visitor{}, law);
}

ErrorLaw error_law_from_json(const Json& j) {
  const std::string w = "error law";
  const auto type = get<std::string>(j, "type", w);
  if (type == "gaussian") {
    check_keys(j, {"type", "variance"}, w);
    return GaussianLaw{get<double>(j, "variance", w)};
  }
  if (type == "uniform") {
    check_keys(j, {"type", "half_width"}, w);
    return UniformLaw{get<double>(j, "half_width", w)};
  }
  if (type == "truncated_gaussian") {
    check_keys(j, {"type", "variance", "bound"}, w);
    return TruncatedGaussianLaw{get<double>(j, "variance", w), get<double>(j, "bound", w)};
  }
  if (type == "student_t") {
    check_keys(j, {"type", "df"}, w);
    return StudentTLaw{get<double>(j, "df", w)};
  }
  throw ConfigError("unknown error law type '" + type + "'");
}

Json model_to_json(const LinearSemModel& model, const std::vector<std::string>& names,
                   const std::optional<ScenarioSpec>& scenario) {
  const int p = model.size();
  Json j;
  j["p"] = p;
  j["names"] = names.empty() ? default_names(p) : names;
  Json weights = Json::array();
  for (int r = 0; r < p; ++r) {
    Json row = Json::array();
    for (int c = 0; c < p; ++c) row.push_back(model.weights(r, c));
    weights.push_back(row);
  }
  j["weights"] = weights;
  Json s2 = Json::array();
  for (int v = 0; v < p; ++v) s2.push_back(model.sigma2(v));
  j["sigma2"] = s2;
  Json laws = Json::array();
  for (const auto& law : model.laws) laws.push_back(to_json(law));
  j["error_laws"] = laws;
  Json edges = Json::array();
  for (const auto& e : model.dag().edges())
    edges.push_back({{"parent", e.from}, {"child", e.to}, {"weight", model.beta(e.from, e.to)}});
  j["edges"] = edges;
  j["scenario"] = scenario ? to_json(*scenario) : Json(nullptr);
  return j;
}

LinearSemModel model_from_json(const Json& j) {
  const std::string w = "model";
  check_keys(j, {"p", "names", "weights", "sigma2", "error_laws", "edges", "scenario"}, w);
  const int p = get<int>(j, "p", w);
  if (p < 1) throw ConfigError("model.p must be positive");
  const auto rows = get<std::vector<std::vector<double>>>(j, "weights", w);
  if (static_cast<int>(rows.size()) != p) throw ConfigError("model.weights must have p rows");
  Matrix b(p, p);
  for (int r = 0; r < p; ++r) {
    if (static_cast<int>(rows[r].size()) != p) throw ConfigError("model.weights must be p x p");
    for (int c = 0; c < p; ++c) b(r, c) = rows[r][c];
  }
  LinearSemModel m;
  if (j.contains("error_laws") && !j["error_laws"].is_null()) {
    std::vector<ErrorLaw> laws;
    for (const auto& l : j["error_laws"]) laws.push_back(error_law_from_json(l));
    m = LinearSemModel::with_laws(b, laws);
    if (j.contains("sigma2")) {
      const auto s2 = get<std::vector<double>>(j, "sigma2", w);
      if (static_cast<int>(s2.size()) != p) throw ConfigError("model.sigma2 must have p entries");
      for (int v = 0; v < p; ++v)
        if (std::abs(s2[v] - m.sigma2(v)) > 1e-9 * std::max(1.0, s2[v])) {
          throw ConfigError("model.sigma2 disagrees with the error law of node " + std::to_string(v));
        }
    }
  } else {
    const auto s2 = get<std::vector<double>>(j, "sigma2", w);
    if (static_cast<int>(s2.size()) != p) throw ConfigError("model.sigma2 must have p entries");
    m = LinearSemModel::gaussian(b, Eigen::Map<const Vector>(s2.data(), p));
  }
  validate(m);
  if (j.contains("edges")) {
    const Dag listed = graph_from_json(Json{{"p", p}, {"edges", j["edges"]}}).dag;
    if (!(listed == m.dag())) throw ConfigError("model.edges disagree with the weight matrix");
  }
  return m;
}

Json to_json(const LearnResult& r, const std::vector<std::string>& names) {
  const int p = static_cast<int>(r.ordering.size());
  const auto nm = names.empty() ? default_names(p) : names;
  Json j;
  j["p"] = p;
  j["names"] = nm;
  j["ordering"] = r.ordering;
  Json on = Json::array();
  for (int v : r.ordering) on.push_back(nm[v]);
  j["ordering_names"] = on;
  Json edges = Json::array();
  for (const auto& e : r.edges)
    edges.push_back({{"parent", e.edge.from},
                     {"child", e.edge.to},
                     {"parent_name", nm[e.edge.from]},
                     {"child_name", nm[e.edge.to]},
                     {"inclusion_probability", e.inclusion}});
  j["edges"] = edges;
  j["config"] = to_json(r.config);
  j["options"] = {{"warm_start", r.options.warm_start}, {"gap_tolerance", r.options.gap_tolerance}};
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"chosen", s.chosen},
                     {"remaining", s.remaining},
                     {"diagonal", s.diagonal},
                     {"inclusion", s.inclusion},
                     {"parents", s.parents},
                     {"diagonal_gap", number_or_null(s.diagonal_gap)},
                     {"near_tie", s.near_tie},
                     {"converged", s.converged},
                     {"iters", s.iters},
                     {"warnings", s.warnings}});
  }
  j["steps"] = steps;
  return j;
}

std::string edges_to_csv(const LearnResult& r, const std::vector<std::string>& names) {
  const auto nm = names.empty() ? default_names(static_cast<int>(r.ordering.size())) : names;
  std::string out = csv_line({"parent", "child", "inclusion_probability"});
  for (const auto& e : r.edges) out += csv_line({nm[e.edge.from], nm[e.edge.to], format_double(e.inclusion)});
  return out;
}

GraphFile graph_from_json(const Json& j) {
  const std::string w = "graph";
  if (!j.is_object()) throw ConfigError("graph file must hold a JSON object");
  GraphFile g;
  if (j.contains("weights")) {
    g.dag = model_from_json(j).dag();
  } else {
    const int p = get<int>(j, "p", w);
    if (p < 1) throw ConfigError("graph.p must be positive");
    g.dag = Dag(p);
    if (j.contains("edges")) {
      for (const auto& e : j["edges"]) {
        int from = 0, to = 0;
        if (e.is_array() && e.size() == 2) {
          from = e[0].get<int>();
          to = e[1].get<int>();
        } else if (e.is_object()) {
          from = get<int>(e, "parent", "graph.edges");
          to = get<int>(e, "child", "graph.edges");
        } else {
          throw ConfigError("graph.edges entries must be [parent, child] or {parent, child}");
        }
        if (from < 0 || from >= p || to < 0 || to >= p) {
          throw ConfigError("graph edge endpoint out of range");
        }
        if (!g.dag.has_edge(from, to)) g.dag.add_edge(from, to);
      }
    }
  }
  if (j.contains("ordering") && !j["ordering"].is_null()) {
    g.ordering = get<Ordering>(j, "ordering", w);
    if (!is_permutation_of_range(*g.ordering, g.dag.size())) {
      throw ConfigError("graph.ordering is not a permutation of 0..p-1");
    }
  }
  return g;
}

Json to_json(const TheoryReport& t) {
  Json j;
  j["p"] = t.p;
  j["ordering"] = t.ordering;
  j["k1"] = t.k1;
  j["k2"] = t.k2;
  j["tau_min"] = number_or_null(t.tau_min);
  j["theta_min"] = number_or_null(t.theta_min);
  j["M_Sigma"] = t.M_Sigma;
  j["M_Gamma"] = t.M_Gamma;
  j["M_Gamma_max"] = t.M_Gamma_max;
  j["M_Gamma_min"] = t.M_Gamma_min;
  j["M_Gamma_steps"] = t.M_Gamma_steps;
  j["d"] = t.d;
  j["d_M"] = t.d_M;
  j["forward_ok"] = t.forward_ok;
  j["backward_ok"] = t.backward_ok;
  Json cp = Json::array();
  for (const auto& e : t.cancelled_pairs) cp.push_back({e.from, e.to});
  j["cancelled_pairs"] = cp;
  return j;
}

Json to_json(const ClosedForms& f) {
  auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  Json j;
  j["M_Gamma_max"] = f.M_Gamma_max;
  j["M_Gamma_min"] = f.M_Gamma_min;
  j["M_Sigma"] = f.M_Sigma;
  j["M_Sigma_upper"] = opt(f.M_Sigma_upper);
  j["k1_bound"] = opt(f.k1_bound);
  j["tau_min_bound"] = opt(f.tau_min_bound);
  j["theta_min_bound"] = opt(f.theta_min_bound);
  return j;
}

Json to_json(const HyperparamRecommendation& h) {
  Json j;
  j["epsilon1"] = h.epsilon1;
  j["C1"] = number_or_null(h.C1);
  j["C2"] = number_or_null(h.C2);
  j["C3"] = number_or_null(h.C3);
  j["C4"] = number_or_null(h.C4);
  const auto& c = h.config;
  j["config"] = {{"nu0", number_or_null(c.nu0)},
                 {"nu1", number_or_null(c.nu1)},
                 {"eta", number_or_null(c.eta)},
                 {"tau", number_or_null(c.tau)},
                 {"threshold", number_or_null(c.threshold)},
                 {"spectral_bound", c.spectral_bound ? Json(*c.spectral_bound) : Json(nullptr)}};
  Json cs = Json::array();
  for (const auto& k : h.constraints)
    cs.push_back({{"name", k.name}, {"satisfiable", k.satisfiable}, {"detail", k.detail}});
  j["constraints"] = cs;
  j["all_satisfiable"] = h.all_satisfiable();
  j["warnings"] = h.warnings;
  return j;
}

std::string admissibility_table(const HyperparamRecommendation& h) {
  std::size_t width = 10;
  for (const auto& c : h.constraints) width = std::max(width, c.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "constraint" << "  ok   detail\n";
  for (const auto& c : h.constraints)
    os << std::left << std::setw(static_cast<int>(width)) << c.name << "  "
       << (c.satisfiable ? "yes  " : "no   ") << c.detail << '\n';
  for (const auto& w : h.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string sweep_rows_csv(const SweepResult& r) {
  std::string out = csv_line(
      {"p", "d_M", "n", "error_spec", "rep", "seed", "hamming", "ordering_ok", "failed", "error"});
  for (const auto& row : r.rows)
    out += csv_line({std::to_string(row.p), std::to_string(row.d_M), std::to_string(row.n),
                     to_string(row.errors), std::to_string(row.rep), std::to_string(row.seed),
                     row.failed ? "" : std::to_string(row.hamming),
                     row.failed ? "" : (row.ordering_ok ? "1" : "0"), row.failed ? "1" : "0",
                     row.error});
  return out;
}

std::string sweep_cells_csv(const SweepResult& r) {
  std::string out = csv_line({"p", "d_M", "n", "error_spec", "replications", "completed", "failures",
                              "mean_hamming", "sd_hamming", "ordering_rate", "C"});
  for (const auto& c : r.cells)
    out += csv_line({std::to_string(c.p), std::to_string(c.d_M), std::to_string(c.n),
                     to_string(c.errors), std::to_string(c.replications),
                     std::to_string(c.completed), std::to_string(c.failures),
                     format_double(c.mean_hamming), format_double(c.sd_hamming),
                     format_double(c.ordering_rate), format_double(c.C)});
  return out;
}

std::string sweep_runtime_csv(const SweepResult& r) {
  std::string out = csv_line({"p", "d_M", "n", "error_spec", "rep", "runtime_ms"});
  for (const auto& row : r.rows)
    out += csv_line({std::to_string(row.p), std::to_string(row.d_M), std::to_string(row.n),
                     to_string(row.errors), std::to_string(row.rep), format_double(row.runtime_ms)});
  return out;
}

}  // namespace baybn
