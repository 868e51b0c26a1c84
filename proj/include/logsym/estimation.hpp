#pragma once

// Conditional maximum likelihood for the log-symmetric ARMAX model: analytic
// score, observed information, BFGS fitting, Wald tests and a profile search
// over the kernel shape parameter.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logsym/model.hpp"

namespace logsym {

/// Gradient of conditional_loglik with respect to the flat parameter vector.
Eigen::VectorXd score(const ModelSpec& spec, const ParamVector& theta, const TimeSeriesData& data);

struct ObservedInformation {
  Eigen::MatrixXd matrix;         // -H, symmetrized
  Eigen::MatrixXd unsymmetrized;  // -H before averaging with its transpose
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
};

/// Negative Hessian of the log-likelihood by central differences of the
/// analytic score, step h_i = max(1e-5, 1e-5 |theta_i|).
ObservedInformation observed_information(const ModelSpec& spec, const ParamVector& theta,
                                         const TimeSeriesData& data);

/// Starting values: OLS for beta, log residual variance for tau_0, Yule-Walker
/// on the OLS residuals for kappa, zero for zeta.
ParamVector initialize(const ModelSpec& spec, const TimeSeriesData& data);

enum class InitStrategy { Moments, Given };

struct FitOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;
  InitStrategy init_strategy = InitStrategy::Moments;
  std::optional<ParamVector> start;
  // Seeds the jittered restarts tried when the first run does not converge.
  std::uint64_t seed = 0;
  int restarts = 2;
};

struct FitResult {
  ModelSpec spec;
  ParamVector theta_hat;
  Eigen::VectorXd se;        // NaN where unavailable
  Eigen::VectorXd p_values;  // beta entries only; NaN elsewhere
  double loglik_full = 0.0;
  double loglik_kernel = 0.0;     // -1/2 sum log phi_t + sum log g(z_t^2)
  double loglik_log_scale = 0.0;  // log density of v_{m+1..n}, i.e. without the -v_t Jacobian
  double aic = 0.0;
  double bic = 0.0;
  double rmse = 0.0;
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd r_hat;
  Eigen::VectorXd z_hat;
  Eigen::VectorXd phi_hat;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  bool converged = false;
  bool information_ok = false;
  int iterations = 0;
  Eigen::Index n_obs = 0;
  std::vector<double> trace;  // log-likelihood at each accepted iterate
  std::string message;

  Eigen::Index n_used() const { return n_obs - spec.m(); }
};

FitResult fit(const ModelSpec& spec, const TimeSeriesData& data, const FitOptions& options = {});

/// Two-sided normal p-value for estimate / se; NaN when se is missing.
double wald_p_value(double estimate, double se);

/// p-values for the beta block (NaN for tau, kappa, zeta).
Eigen::VectorXd wald_tests(const FitResult& fit);

struct ProfileRow {
  double theta = 0.0;
  double loglik_full = 0.0;
  bool ok = false;
  std::string error;
};

struct ProfileResult {
  double best_theta = 0.0;
  std::vector<ProfileRow> rows;  // sorted by theta
};

/// Fits at each shape value of `grid` and returns the maximizer of the full
/// log-likelihood; ties go to the smaller shape.
ProfileResult profile_theta(const ModelSpec& spec, const TimeSeriesData& data,
                            std::vector<double> grid, const FitOptions& options = {});

/// Parameter labels in flat layout order: beta0.., tau0.., kappa1.., zeta1..
std::vector<std::string> parameter_names(const ModelSpec& spec);

}  // namespace logsym
