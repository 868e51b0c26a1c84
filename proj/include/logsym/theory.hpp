#pragma once

// MA(infinity) expansion of the ARMA operator and the marginal moments of
// h(Y_t) = log Y_t implied by it.

#include <Eigen/Dense>

#include "logsym/kernels.hpp"

namespace logsym {

struct ArmaPolynomials {
  Eigen::VectorXd kappa;  // AR coefficients kappa_1..kappa_p
  Eigen::VectorXd zeta;   // MA coefficients zeta_1..zeta_q
};

/// psi_0..psi_K of Theta(B) / Phi(B) with psi_0 = 1.
Eigen::VectorXd psi_weights(const ArmaPolynomials& poly, Eigen::Index K);

struct StationarityReport {
  bool stationary = true;
  bool invertible = true;
  Eigen::VectorXd ar_root_moduli;  // |roots| of 1 - sum kappa_i B^i, ascending
  Eigen::VectorXd ma_root_moduli;  // |roots| of 1 + sum zeta_j B^j, ascending
};

StationarityReport check_stationarity(const ArmaPolynomials& poly);

/// Smallest K <= 1e5 with |psi_K| * max(1, sum |psi|) < 1e-12, held over
/// max(p, q, 1) consecutive terms. Throws NonStationaryError when the
/// expansion does not decay.
Eigen::Index truncation_order(const ArmaPolynomials& poly);

/// Moments of w_t = h(Y_t) - x_t'beta under constant dispersion phi.
/// The conditional variance of r_t is xi_var * phi.
struct MarginalMoments {
  double mean_shift = 0.0;
  double xi_var = 1.0;
  double phi = 1.0;
  Eigen::VectorXd psi;

  double variance() const;
  double autocovariance(Eigen::Index lag) const;
  double autocorrelation(Eigen::Index lag) const;
};

/// K = -1 picks the truncation adaptively.
MarginalMoments marginal_moments(const ArmaPolynomials& poly, double phi, const KernelFamily& k,
                                 Eigen::Index K = -1);

/// Time-varying dispersion: moments at position t (0-based) of a path
/// phi_0..phi_{T-1}, summing over the available window i = 0..t.
double path_variance(const ArmaPolynomials& poly, const Eigen::VectorXd& phi_path,
                     const KernelFamily& k, Eigen::Index t);
double path_autocovariance(const ArmaPolynomials& poly, const Eigen::VectorXd& phi_path,
                           const KernelFamily& k, Eigen::Index t, Eigen::Index lag);
double path_autocorrelation(const ArmaPolynomials& poly, const Eigen::VectorXd& phi_path,
                            const KernelFamily& k, Eigen::Index t, Eigen::Index lag);

}  // namespace logsym
