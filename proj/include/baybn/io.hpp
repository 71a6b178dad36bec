#pragma once

#include "baybn/datagen.hpp"
#include "baybn/eval.hpp"
#include "baybn/learner.hpp"
#include "baybn/sweep.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace baybn {

using Json = nlohmann::ordered_json;

// 17 significant digits with a '.' decimal separator.
std::string format_double(double x);

// RFC 4180 quoting when the field contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;  // 1-based source line of each row
};

// Throws DataError with the line number on unbalanced quotes or ragged rows.
CsvTable parse_csv(const std::string& text);

// Header row gives the names; every other cell must be a finite number.
Dataset dataset_from_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& data);

std::string read_file(const std::string& path);
// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

Json to_json(const BagusConfig& c);
// Missing keys keep the values of `base`; unknown keys raise ConfigError.
BagusConfig bagus_config_from_json(const Json& j, const BagusConfig& base);

Json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const Json& j, const ScenarioSpec& base);

Json to_json(const ErrorLaw& law);
ErrorLaw error_law_from_json(const Json& j);

/// Ground truth: weights (child, parent), sigma2, error laws, edges, names
/// and the generating scenario when there is one.
Json model_to_json(const LinearSemModel& model, const std::vector<std::string>& names,
                   const std::optional<ScenarioSpec>& scenario = std::nullopt);
LinearSemModel model_from_json(const Json& j);

Json to_json(const LearnResult& r, const std::vector<std::string>& names);
std::string edges_to_csv(const LearnResult& r, const std::vector<std::string>& names);

/// Graph and optional ordering read from either a model or a learn result.
struct GraphFile {
  Dag dag;
  std::optional<Ordering> ordering;
};
GraphFile graph_from_json(const Json& j);

Json to_json(const TheoryReport& t);
Json to_json(const ClosedForms& f);
Json to_json(const HyperparamRecommendation& h);
// Fixed-width text table: constraint, satisfiable, detail.
std::string admissibility_table(const HyperparamRecommendation& h);

std::string sweep_rows_csv(const SweepResult& r);
std::string sweep_cells_csv(const SweepResult& r);
// Wall-clock runtimes, kept apart so the files above are reproducible.
std::string sweep_runtime_csv(const SweepResult& r);

Json parse_json(const std::string& text, const std::string& what);

}  // namespace baybn
