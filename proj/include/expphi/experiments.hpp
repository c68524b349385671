#pragma once

#include <map>
#include <string>
#include <vector>

#include "expphi/config.hpp"
#include "expphi/spectral_field.hpp"
#include "json.hpp"

namespace expphi {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

enum ExitStatus { kExitPass = 0, kExitCriterion = 2, kExitConfig = 3, kExitNumeric = 4 };

/// Rows of strings with a fixed column order; doubles are written with %.17g.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string render() const;
};

std::string csv_number(double v);

/// report is the deterministic body written to report.json; wall-clock time
/// goes to timing.json so that identical inputs give byte-identical reports.
struct ExperimentOutput {
  nlohmann::json report;
  std::map<std::string, CsvTable> tables;
  std::map<std::string, std::vector<SpectralField>> dumps;
  double wall_seconds = 0.0;

  bool passed() const;
};

ExperimentOutput cmd_wick_converge(Config& config, int threads);
ExperimentOutput cmd_sqe(Config& config, int threads);
ExperimentOutput cmd_invariance(Config& config, int threads);
ExperimentOutput cmd_norms_bench(Config& config, int threads);
ExperimentOutput cmd_sample_gff(Config& config, int threads);

std::vector<std::string> command_names();

// Dispatches by subcommand name and records wall-clock time.
ExperimentOutput run_command(const std::string& name, Config& config, int threads);

void write_outputs(const ExperimentOutput& out, const std::string& dir);

}  // namespace expphi
