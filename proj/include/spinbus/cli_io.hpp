#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinbus::cli {

/// One machine-readable output table (one per figure panel).  Column
/// names carry their unit in brackets, e.g. "f_x[Phi0]".
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Everything one run produces: tables, provenance notes and the exact
/// configuration that generated them.
struct ResultBundle {
  std::string experiment;
  nlohmann::json config;  // validated, canonical (sorted keys)
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<Table> tables;
  std::map<std::string, std::string> provenance;  // table -> note
};

inline const std::vector<std::string> experiment_names = {
    "spectrum",       "coupler-character", "flux-propagation",
    "susceptibility", "jeff-compare",      "noise",
    "hierarchy-bench"};

/// Reads and schema-validates a configuration file.  Unknown keys are
/// rejected; `experiment` must match the subcommand when present.
nlohmann::json load_config(const std::string& path,
                           const std::string& experiment);
nlohmann::json validate_config(nlohmann::json config,
                               const std::string& experiment);

/// FNV-1a hash of the canonical (sorted-key, whitespace-free) dump.
std::string config_hash(const nlohmann::json& config);

/// Executes one experiment.  `seed_override` < 0 keeps the config seed.
ResultBundle run_experiment(const std::string& experiment,
                            const nlohmann::json& config,
                            long long seed_override = -1);

/// Writes one .tsv file per table plus metadata.json into out_dir;
/// returns the file paths.  Numbers carry 12 significant digits and the
/// bytes depend only on config + seed.
std::vector<std::string> serialize_bundle(const ResultBundle& bundle,
                                          const std::string& out_dir);

/// Reads a table written by serialize_bundle back into memory.
Table parse_table(const std::string& path);

/// 12-significant-digit formatting used for all table numbers.
std::string format_number(double x);

/// Marks a failed run: error report written as <out_dir>/FAILED.json.
void write_failure_marker(const std::string& out_dir,
                          const std::string& experiment,
                          const std::string& message, int exit_code);

}  // namespace spinbus::cli
