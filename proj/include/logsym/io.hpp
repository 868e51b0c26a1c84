#pragma once

// CSV ingestion, the mortality case-study design, and the flat run
// configuration shared by the CLI subcommands.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logsym/diagnostics.hpp"
#include "logsym/estimation.hpp"
#include "logsym/simulation.hpp"

namespace logsym {

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x columns; empty cells are NaN

  Eigen::Index column(const std::string& name) const;  // throws ConfigError if absent
};

/// Reads a header row followed by numeric rows ('.' decimal separator).
/// Row numbers in error messages count data rows from 1.
CsvTable read_csv(const std::filesystem::path& path);

/// Which CSV columns form the response and the two design matrices.
struct ColumnMapping {
  std::string response;
  std::vector<std::string> median_covariates;
  std::vector<std::string> dispersion_covariates;
  bool median_intercept = true;
  bool dispersion_intercept = true;

  Eigen::Index n_beta() const;
  Eigen::Index n_tau() const;
};

TimeSeriesData to_series(const CsvTable& table, const ColumnMapping& mapping);
TimeSeriesData load_csv(const std::filesystem::path& path, const ColumnMapping& mapping);

struct MortalityDataset {
  Eigen::VectorXd time;
  Eigen::VectorXd cmort;
  Eigen::VectorXd tempr;
  Eigen::VectorXd part;
};

/// Loads time,cmort,tempr,part and checks n = 508 and the summary statistics
/// of cmort (min 68.11, median 87.33, mean 88.699, max 132.04).
MortalityDataset load_mortality(const std::filesystem::path& path);

enum class TrendScale { CalendarYears, WeekIndex };

struct MortalityDesignOptions {
  bool centered = true;  // temperature minus its sample mean
  TrendScale trend = TrendScale::CalendarYears;
};

/// X = [1, trend, temp, temp^2, part], W = [1], y = cmort.
TimeSeriesData build_mortality_design(const MortalityDataset& raw,
                                      const MortalityDesignOptions& options = {});

/// Path of the bundled mortality series, or nullopt when it cannot be found.
std::optional<std::filesystem::path> bundled_mortality_path();

enum class DataSource { Csv, Mortality };

/// Flat key-value run configuration read from a JSON object. Unknown keys
/// are rejected.
struct RunConfig {
  std::string command;
  KernelFamily family;
  std::vector<double> vartheta_grid;  // non-empty: profile the shape over it
  int p = 0;
  int q = 0;

  DataSource source = DataSource::Csv;
  std::filesystem::path data;
  ColumnMapping columns;
  MortalityDesignOptions mortality;

  std::filesystem::path output;
  std::uint64_t seed = 0;
  FitOptions fit;
  ReportOptions report;

  // simulate / mc
  Eigen::Index n = 500;
  Eigen::Index burnin = 200;
  CovariateRule covariate_rule = CovariateRule::IidStandardNormal;
  std::filesystem::path covariates;
  ParamVector theta;  // beta, tau, kappa, zeta for simulation
  std::vector<Eigen::Index> n_grid{100, 300, 500};
  std::vector<double> phi_grid{0.5, 1.0, 2.0};
  int replicates = 500;
  bool common_random_numbers = true;
  double max_failure_rate = 0.05;

  ModelSpec spec() const;
};

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads the data described by the config (CSV mapping or mortality design).
TimeSeriesData load_config_data(const RunConfig& config);

/// Reads a covariate CSV (header row required); every column is used, in order.
Eigen::MatrixXd load_covariate_matrix(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace logsym
