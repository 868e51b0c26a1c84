#pragma once

// Series generation and the Monte Carlo harness for bias / MSE of the
// conditional maximum likelihood estimators.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "logsym/estimation.hpp"

namespace logsym {

enum class CovariateRule { IidStandardNormal, IidUniform01, FromFile };

std::string_view covariate_rule_name(CovariateRule rule);
CovariateRule parse_covariate_rule(std::string_view name);

/// Simulates a series with the given design rows, starting from a zero state.
TimeSeriesData simulate_series(const ModelSpec& spec, const ParamVector& theta,
                               const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                               std::mt19937_64& rng);

/// Draws covariates by `rule`, simulates burnin + n steps and keeps the last
/// n. For FromFile, `covariates` supplies the non-intercept X columns followed
/// by the non-intercept W columns, with at least burnin + n rows.
TimeSeriesData generate_dataset(const ModelSpec& spec, const ParamVector& theta, Eigen::Index n,
                                CovariateRule rule, Eigen::Index burnin, std::uint64_t seed,
                                const Eigen::MatrixXd& covariates = {});

struct McConfig {
  KernelFamily family;
  std::vector<Eigen::Index> n_grid{100, 300, 500};
  std::vector<double> phi_grid{0.5, 1.0, 2.0};
  ParamVector true_theta;  // tau is replaced by log(phi) in each cell
  int replicates = 500;
  Eigen::Index burnin = 200;
  CovariateRule covariate_rule = CovariateRule::IidStandardNormal;
  Eigen::MatrixXd covariates;
  std::uint64_t seed = 2024;
  bool common_random_numbers = true;
  double max_failure_rate = 0.05;
  FitOptions fit;

  ModelSpec spec() const;
  void validate() const;
};

/// Bias and MSE of one estimator in one (n, phi) cell. MC standard errors are
/// the sample standard deviations of the error and squared error over sqrt(R).
struct McParamStat {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double bias_se = 0.0;
  double mse_se = 0.0;
};

struct McCell {
  Eigen::Index n = 0;
  double phi = 0.0;
  int used = 0;
  int failures = 0;
  bool failed = false;
  std::vector<McParamStat> stats;  // phi, beta.., kappa.., zeta..
  Eigen::MatrixXd estimates;       // replicates x parameters, NaN rows for failures
};

struct McResultTable {
  McConfig config;
  std::vector<std::string> parameters;
  std::vector<McCell> cells;  // n-major, phi-minor

  const McCell& cell(Eigen::Index n, double phi) const;
};

McResultTable run_monte_carlo(const McConfig& config);

/// Estimator labels reported by the harness: phi first, then beta, kappa, zeta.
std::vector<std::string> mc_parameter_names(const ModelSpec& spec);

}  // namespace logsym
