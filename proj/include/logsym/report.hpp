#pragma once

// Report emission: fit results as schema-versioned JSON and as a text table,
// Monte Carlo tables, theory summaries and residual diagnostics. All output is
// deterministic given its inputs (fixed key order, no timestamps).

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logsym/diagnostics.hpp"
#include "logsym/estimation.hpp"
#include "logsym/simulation.hpp"
#include "logsym/theory.hpp"

namespace logsym {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that reads back to the same double; "NA" if not finite.
std::string format_double(double x);

/// Where the fitted data came from, echoed into the fit report.
struct DataLabel {
  std::string source;  // "csv", "mortality" or "simulated"
  std::string path;
  std::string response;
  std::vector<std::string> median_columns;
  std::vector<std::string> dispersion_columns;
  bool median_intercept = true;
  bool dispersion_intercept = true;
  bool centered = true;        // mortality design only
  std::string trend = "years"; // mortality design only
};

struct FitReport {
  FitResult fit;
  DataLabel data;
};

std::string fit_to_json(const FitResult& fit, const DataLabel& data = {});
FitReport fit_from_json(const std::string& text);

/// Estimates with SE in parentheses and Wald p-values, then RMSE / AIC / BIC.
std::string fit_to_text(const FitResult& fit);

/// One row per parameter per n; bias and MSE column pairs per phi.
std::string mc_to_csv(const McResultTable& table);
std::string mc_to_json(const McResultTable& table);

struct TheoryReport {
  ArmaPolynomials poly;
  KernelFamily family;
  double phi = 1.0;
  Eigen::Index lags = 10;
  StationarityReport stationarity;
  MarginalMoments moments;
};

TheoryReport make_theory_report(const ArmaPolynomials& poly, double phi, const KernelFamily& k,
                                Eigen::Index lags);
std::string theory_to_json(const TheoryReport& report);
/// lag, psi, autocovariance, autocorrelation for lags 0..L.
std::string theory_to_csv(const TheoryReport& report);

std::string diagnostics_to_json(const ResidualReport& report);
/// index, rq, sorted rq, normal quantile, envelope lower / median / upper.
std::string qq_to_csv(const ResidualReport& report);
/// lag, acf, pacf.
std::string acf_to_csv(const ResidualReport& report);

}  // namespace logsym
