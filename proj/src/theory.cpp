#include "logsym/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "logsym/errors.hpp"

namespace logsym {

namespace {

constexpr double kUnitCircleMargin = 1e-10;
constexpr Eigen::Index kMaxTruncation = 100000;

// Moduli of the roots of 1 + sum_i c_i B^i, via the eigenvalues of the
// companion matrix of the reciprocal polynomial lambda^d + c_1 lambda^{d-1} + ... + c_d.
Eigen::VectorXd root_moduli(Eigen::VectorXd c) {
  Eigen::Index d = c.size();
  while (d > 0 && c[d - 1] == 0.0) --d;
  if (d == 0) return Eigen::VectorXd();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  companion.row(0) = -c.head(d).transpose();
  if (d > 1) companion.bottomLeftCorner(d - 1, d - 1).setIdentity();
  const Eigen::VectorXcd lambdas = companion.eigenvalues();
  Eigen::VectorXd moduli(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double a = std::abs(lambdas[i]);
    moduli[i] = a == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / a;
  }
  std::sort(moduli.data(), moduli.data() + d);
  return moduli;
}

}  // namespace

Eigen::VectorXd psi_weights(const ArmaPolynomials& poly, Eigen::Index K) {
  if (K < 0) throw DomainError("psi_weights: K must be non-negative");
  const Eigen::Index p = poly.kappa.size();
  const Eigen::Index q = poly.zeta.size();
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(K + 1);
  psi[0] = 1.0;
  for (Eigen::Index j = 1; j <= K; ++j) {
    double value = j <= q ? poly.zeta[j - 1] : 0.0;
    for (Eigen::Index i = 1; i <= std::min(j, p); ++i) value += poly.kappa[i - 1] * psi[j - i];
    psi[j] = value;
  }
  return psi;
}

StationarityReport check_stationarity(const ArmaPolynomials& poly) {
  StationarityReport report;
  report.ar_root_moduli = root_moduli(-poly.kappa);
  report.ma_root_moduli = root_moduli(poly.zeta);
  report.stationary = (report.ar_root_moduli.array() > 1.0 + kUnitCircleMargin).all();
  report.invertible = (report.ma_root_moduli.array() > 1.0 + kUnitCircleMargin).all();
  return report;
}

Eigen::Index truncation_order(const ArmaPolynomials& poly) {
  if (!check_stationarity(poly).stationary) {
    throw NonStationaryError("AR polynomial has a root on or inside the unit circle");
  }
  const Eigen::Index p = poly.kappa.size();
  const Eigen::Index q = poly.zeta.size();
  const Eigen::Index run = std::max<Eigen::Index>({p, q, 1});

  std::vector<double> psi{1.0};
  double abs_sum = 1.0;
  Eigen::Index quiet = 0;
  for (Eigen::Index j = 1; j <= kMaxTruncation; ++j) {
    double value = j <= q ? poly.zeta[j - 1] : 0.0;
    for (Eigen::Index i = 1; i <= std::min(j, p); ++i) value += poly.kappa[i - 1] * psi[j - i];
    psi.push_back(value);
    abs_sum += std::abs(value);
    quiet = std::abs(value) * std::max(1.0, abs_sum) < 1e-12 ? quiet + 1 : 0;
    if (quiet >= run) return j;
  }
  throw NonStationaryError("psi weights did not decay within the truncation limit");
}

double MarginalMoments::variance() const { return autocovariance(0); }

double MarginalMoments::autocovariance(Eigen::Index lag) const {
  lag = std::abs(lag);
  double sum = 0.0;
  for (Eigen::Index i = 0; i + lag < psi.size(); ++i) sum += psi[i] * psi[i + lag];
  return xi_var * phi * sum;
}

double MarginalMoments::autocorrelation(Eigen::Index lag) const {
  if (lag == 0) return 1.0;
  return autocovariance(lag) / variance();
}

MarginalMoments marginal_moments(const ArmaPolynomials& poly, double phi, const KernelFamily& k,
                                 Eigen::Index K) {
  if (!(phi > 0)) throw DomainError("marginal_moments: phi must be positive");
  if (!check_stationarity(poly).stationary) {
    throw NonStationaryError("marginal moments require a stationary AR polynomial");
  }
  MarginalMoments out;
  out.xi_var = variance_constant(k);
  out.phi = phi;
  out.psi = psi_weights(poly, K < 0 ? truncation_order(poly) : K);
  return out;
}

double path_autocovariance(const ArmaPolynomials& poly, const Eigen::VectorXd& phi_path,
                           const KernelFamily& k, Eigen::Index t, Eigen::Index lag) {
  if (t < 0 || t >= phi_path.size()) throw DomainError("path moments: t outside the path");
  if (lag < 0 || lag > t) throw DomainError("path moments: lag must lie in [0, t]");
  if ((phi_path.array() <= 0).any()) throw DomainError("path moments: phi must be positive");
  const Eigen::VectorXd psi = psi_weights(poly, t);
  double sum = 0.0;
  for (Eigen::Index i = lag; i <= t; ++i) sum += psi[i] * psi[i - lag] * phi_path[t - i];
  return variance_constant(k) * sum;
}

double path_variance(const ArmaPolynomials& poly, const Eigen::VectorXd& phi_path,
                     const KernelFamily& k, Eigen::Index t) {
  return path_autocovariance(poly, phi_path, k, t, 0);
}

double path_autocorrelation(const ArmaPolynomials& poly, const Eigen::VectorXd& phi_path,
                            const KernelFamily& k, Eigen::Index t, Eigen::Index lag) {
  const double cov = path_autocovariance(poly, phi_path, k, t, lag);
  return cov / std::sqrt(path_variance(poly, phi_path, k, t) *
                         path_variance(poly, phi_path, k, t - lag));
}

}  // namespace logsym
