#pragma once

#include <string>

#include "json.hpp"
#include "mccp/experiment.hpp"

namespace mccp {

// JSON forms of the experiment schema. Parsing validates every field and
// reports problems as ConfigError with the field's path.
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json report_to_json(const EvalReport& report);

// Full results document: artifact version, the complete config echo, and
// one entry per trial. Serialization is key-sorted and therefore
// byte-deterministic for identical runs.
nlohmann::json results_to_json(const ExperimentConfig& config,
                               const ExperimentResult& result);

// results.json writer plus the mean +/- stddev method table. The CSV files
// carry the config echo in a leading '#' comment line so every result file
// is self-describing.
void write_results_json(const std::string& path,
                        const ExperimentConfig& config,
                        const ExperimentResult& result);
void write_table_csv(const std::string& path, const ExperimentConfig& config,
                     const ExperimentResult& result);
void write_sensitivity_csv(const std::string& path,
                           const ExperimentConfig& config,
                           const std::vector<SensitivityCell>& cells);
void write_trace_csv(const std::string& path, const ExperimentConfig& config,
                     const std::vector<SampleTraceRow>& rows);
void write_plotdata_csv(const std::string& path,
                        const ExperimentConfig& config,
                        const PlotdataTable& table);

}  // namespace mccp
