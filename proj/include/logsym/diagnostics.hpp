#pragma once

// Residual diagnostics: quantile residuals, sample ACF / PACF, portmanteau
// and Kolmogorov-Smirnov statistics, and simulated QQ envelopes.

#include <cstdint>

#include <Eigen/Dense>

#include "logsym/estimation.hpp"

namespace logsym {

enum class Orientation { Cdf, Survival };

/// Phi^{-1}(F(z)) for one standardized residual, with F clamped to
/// [1e-12, 1 - 1e-12]. Survival orientation uses 1 - F instead.
double quantile_residual(double z, const KernelFamily& k, Orientation o = Orientation::Cdf);

/// Quantile residuals for t = m+1..n at the given parameters.
Eigen::VectorXd quantile_residuals(const ModelSpec& spec, const ParamVector& theta,
                                   const TimeSeriesData& data, Orientation o = Orientation::Cdf);

Eigen::VectorXd quantile_residuals(const FitResult& fit, const TimeSeriesData& data,
                                   Orientation o = Orientation::Cdf);

/// rho_1..rho_L around the sample mean. Throws DomainError for a constant series.
Eigen::VectorXd sample_acf(const Eigen::VectorXd& x, Eigen::Index max_lag);

struct LevinsonResult {
  Eigen::VectorXd coefficients;  // AR(L) coefficients phi_{L,1..L}
  Eigen::VectorXd pacf;          // phi_{k,k} for k = 1..L
  double innovation_ratio = 1.0; // prediction error variance / lag-0 variance
};

/// Durbin-Levinson recursion on autocorrelations rho_1..rho_L.
LevinsonResult durbin_levinson(const Eigen::VectorXd& rho);

Eigen::VectorXd sample_pacf(const Eigen::VectorXd& x, Eigen::Index max_lag);

/// Yule-Walker AR(p) coefficients of x.
Eigen::VectorXd yule_walker(const Eigen::VectorXd& x, int p);

struct PortmanteauTest {
  double statistic = 0.0;
  double p_value = 1.0;
  Eigen::Index lag = 0;
  Eigen::Index dof = 0;
};

/// Ljung-Box Q(L) = n (n + 2) sum rho_k^2 / (n - k), chi-squared with L - fitdf dof.
PortmanteauTest ljung_box(const Eigen::VectorXd& x, Eigen::Index lag, Eigen::Index fitdf = 0);

/// sup |F_n - Phi| of the empirical CDF of x against N(0, 1).
double ks_statistic_normal(const Eigen::VectorXd& x);

struct Envelope {
  Eigen::VectorXd lower;
  Eigen::VectorXd median;
  Eigen::VectorXd upper;
};

struct EnvelopeOptions {
  int replicates = 100;
  double level = 0.95;
  std::uint64_t seed = 1;
  bool refit = false;
  FitOptions fit;
};

/// Pointwise order-statistic bands of the sorted quantile residuals of
/// replicated series simulated from the fitted model with the observed
/// covariates.
Envelope simulated_envelope(const FitResult& fit, const TimeSeriesData& data,
                            const EnvelopeOptions& options = {});

struct ResidualReport {
  Eigen::VectorXd rq;
  Eigen::VectorXd acf;
  Eigen::VectorXd pacf;
  Envelope envelope;
  double ks_stat = 0.0;
  PortmanteauTest ljung_box;
};

struct ReportOptions {
  Eigen::Index max_lag = 20;
  Eigen::Index ljung_box_lag = 20;
  EnvelopeOptions envelope;
};

ResidualReport residual_report(const FitResult& fit, const TimeSeriesData& data,
                               const ReportOptions& options = {});

}  // namespace logsym
