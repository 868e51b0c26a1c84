#pragma once

// Log-symmetric ARMAX(p, q) model: specification, parameter layout, data
// container, the one-pass recursion for the conditional log-median, and the
// conditional log-likelihood.
//
//   v_t   = log y_t
//   mu_t  = x_t'beta + sum_l kappa_l (v_{t-l} - x_{t-l}'beta) + sum_j zeta_j r_{t-j}
//   phi_t = exp(w_t'tau)
//   r_t   = v_t - mu_t,   z_t = r_t / sqrt(phi_t)
//
// The first m = max(p, q) observations are conditioned on, with mu_t = x_t'beta
// and r_t = 0 there unless presample innovations are supplied.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "logsym/errors.hpp"
#include "logsym/kernels.hpp"

namespace logsym {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct ModelSpec {
  int p = 0;
  int q = 0;
  Eigen::Index n_beta = 1;
  Eigen::Index n_tau = 1;
  KernelFamily kernel;

  int m() const { return std::max(p, q); }
  Eigen::Index dim() const { return n_beta + n_tau + p + q; }

  void validate() const {
    if (p < 0 || q < 0) throw DomainError("model: p and q must be non-negative");
    if (n_beta < 1 || n_tau < 1) throw DomainError("model: n_beta and n_tau must be at least 1");
    logsym::validate(kernel);
  }
};

/// theta = (beta, tau, kappa, zeta). The flat layout follows the same order.
template <typename Scalar>
struct BasicParamVector {
  Vector<Scalar> beta;
  Vector<Scalar> tau;
  Vector<Scalar> kappa;
  Vector<Scalar> zeta;

  static BasicParamVector zeros(const ModelSpec& spec) {
    return {Vector<Scalar>::Zero(spec.n_beta), Vector<Scalar>::Zero(spec.n_tau),
            Vector<Scalar>::Zero(spec.p), Vector<Scalar>::Zero(spec.q)};
  }

  static BasicParamVector from_flat(const ModelSpec& spec, const Vector<Scalar>& flat) {
    if (flat.size() != spec.dim()) throw LengthError("parameter vector has wrong length");
    BasicParamVector out;
    Eigen::Index at = 0;
    out.beta = flat.segment(at, spec.n_beta);
    at += spec.n_beta;
    out.tau = flat.segment(at, spec.n_tau);
    at += spec.n_tau;
    out.kappa = flat.segment(at, spec.p);
    at += spec.p;
    out.zeta = flat.segment(at, spec.q);
    return out;
  }

  Vector<Scalar> flat() const {
    Vector<Scalar> out(size());
    out << beta, tau, kappa, zeta;
    return out;
  }

  Eigen::Index size() const { return beta.size() + tau.size() + kappa.size() + zeta.size(); }

  void check(const ModelSpec& spec) const {
    if (beta.size() != spec.n_beta || tau.size() != spec.n_tau || kappa.size() != spec.p ||
        zeta.size() != spec.q) {
      throw LengthError("parameter blocks do not match the model orders");
    }
  }

  template <typename Other>
  BasicParamVector<Other> cast() const {
    return {beta.template cast<Other>(), tau.template cast<Other>(),
            kappa.template cast<Other>(), zeta.template cast<Other>()};
  }
};

using ParamVector = BasicParamVector<double>;

/// Positive responses y with the median (X) and dispersion (W) design
/// matrices; v caches log y.
template <typename Scalar>
struct BasicTimeSeries {
  Vector<Scalar> y;
  Matrix<Scalar> X;
  Matrix<Scalar> W;
  Vector<Scalar> v;

  static BasicTimeSeries make(Vector<Scalar> y, Matrix<Scalar> X, Matrix<Scalar> W) {
    if (X.rows() != y.size() || W.rows() != y.size()) {
      throw LengthError("design matrices must have one row per observation");
    }
    for (Eigen::Index t = 0; t < y.size(); ++t) {
      if (!(y[t] > 0) || !std::isfinite(static_cast<double>(y[t]))) {
        throw DomainError("response must be positive and finite (observation " +
                          std::to_string(t + 1) + ")");
      }
    }
    BasicTimeSeries out{std::move(y), std::move(X), std::move(W), {}};
    out.v = out.y.array().log().matrix();
    return out;
  }

  /// Builds the series from log responses directly, avoiding exp/log round trips.
  static BasicTimeSeries from_log(Vector<Scalar> v, Matrix<Scalar> X, Matrix<Scalar> W) {
    if (X.rows() != v.size() || W.rows() != v.size()) {
      throw LengthError("design matrices must have one row per observation");
    }
    BasicTimeSeries out{v.array().exp().matrix(), std::move(X), std::move(W), std::move(v)};
    return out;
  }

  Eigen::Index size() const { return y.size(); }

  template <typename Other>
  BasicTimeSeries<Other> cast() const {
    return {y.template cast<Other>(), X.template cast<Other>(), W.template cast<Other>(),
            v.template cast<Other>()};
  }
};

using TimeSeriesData = BasicTimeSeries<double>;

template <typename Scalar>
struct BasicState {
  Vector<Scalar> mu;
  Vector<Scalar> r;
  Vector<Scalar> z;
  Vector<Scalar> phi;
};

using State = BasicState<double>;

template <typename Scalar>
void check_compatible(const ModelSpec& spec, const BasicParamVector<Scalar>& theta,
                      const BasicTimeSeries<Scalar>& data) {
  theta.check(spec);
  if (data.X.cols() != spec.n_beta || data.W.cols() != spec.n_tau) {
    throw LengthError("design matrix columns do not match n_beta / n_tau");
  }
  if (data.size() <= spec.m()) {
    throw LengthError("need more observations than max(p, q)");
  }
}

namespace detail {

template <typename Scalar>
BasicState<Scalar> recurse(const ModelSpec& spec, const BasicParamVector<Scalar>& theta,
                           const BasicTimeSeries<Scalar>& data, const Vector<Scalar>& presample_r) {
  check_compatible(spec, theta, data);
  const Eigen::Index n = data.size();
  const int m = spec.m();
  if (presample_r.size() != 0 && presample_r.size() != m) {
    throw LengthError("presample innovations must have length max(p, q)");
  }

  BasicState<Scalar> s;
  const Vector<Scalar> xb = data.X * theta.beta;
  s.phi = (data.W * theta.tau).array().exp().matrix();
  s.mu.resize(n);
  s.r.resize(n);
  for (Eigen::Index t = 0; t < m; ++t) {
    s.mu[t] = xb[t];
    s.r[t] = presample_r.size() ? presample_r[t] : Scalar(0);
  }
  for (Eigen::Index t = m; t < n; ++t) {
    Scalar mu = xb[t];
    for (int l = 1; l <= spec.p; ++l) mu += theta.kappa[l - 1] * (data.v[t - l] - xb[t - l]);
    for (int j = 1; j <= spec.q; ++j) mu += theta.zeta[j - 1] * s.r[t - j];
    s.mu[t] = mu;
    s.r[t] = data.v[t] - mu;
  }
  s.z = (s.r.array() / s.phi.array().sqrt()).matrix();
  return s;
}

}  // namespace detail

/// One left-to-right pass computing mu, r, z and phi. `presample_r` optionally
/// fixes the innovations of the first m observations (zero otherwise).
template <typename Scalar>
BasicState<Scalar> recurse_state(const ModelSpec& spec, const BasicParamVector<Scalar>& theta,
                                 const BasicTimeSeries<Scalar>& data,
                                 const Vector<Scalar>& presample_r = {}) {
  auto s = detail::recurse(spec, theta, data, presample_r);
  if (!s.mu.allFinite() || !s.phi.allFinite()) {
    throw NonFiniteError("recursion produced a non-finite conditional median or dispersion");
  }
  return s;
}

/// Conditional log-likelihood over t = m+1..n; NaN when any term is non-finite.
template <typename Scalar>
Scalar try_conditional_loglik(const ModelSpec& spec, const BasicParamVector<Scalar>& theta,
                              const BasicTimeSeries<Scalar>& data, bool include_constants) {
  const auto s = detail::recurse(spec, theta, data, Vector<Scalar>{});
  const Eigen::Index n = data.size();
  const int m = spec.m();
  Scalar total = 0;
  auto accumulate = [&](auto traits) {
    for (Eigen::Index t = m; t < n; ++t) {
      const Scalar u = s.z[t] * s.z[t];
      if (!std::isfinite(static_cast<double>(u)) || !std::isfinite(static_cast<double>(s.phi[t]))) {
        total = std::numeric_limits<Scalar>::quiet_NaN();
        return;
      }
      total += traits.template log_g<Scalar>(u, spec.kernel.theta) - std::log(s.phi[t]) / 2;
    }
    if (include_constants) {
      total += Scalar(n - m) * traits.template log_normalizer<Scalar>(spec.kernel.theta) -
               data.v.tail(n - m).sum();
    }
  };
  validate(spec.kernel);
  visit_family(spec.kernel, accumulate);
  return total;
}

/// Conditional log-likelihood. With `include_constants` false this is the
/// kernel-only form  -1/2 sum log phi_t + sum log g(z_t^2); with true it is the
/// full log density of y_{m+1..n} given the first m observations.
template <typename Scalar>
Scalar conditional_loglik(const ModelSpec& spec, const BasicParamVector<Scalar>& theta,
                          const BasicTimeSeries<Scalar>& data, bool include_constants = true) {
  const Scalar value = try_conditional_loglik(spec, theta, data, include_constants);
  if (!std::isfinite(static_cast<double>(value))) {
    throw NonFiniteError("conditional log-likelihood is not finite");
  }
  return value;
}

/// Values carried into a forward simulation: the last max(p, q) deviations
/// v - x'beta and innovations r, oldest first.
struct SimState {
  Eigen::VectorXd deviation;
  Eigen::VectorXd innovation;

  static SimState zeros(int m) { return {Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)}; }
};

/// Generates v_t = mu_t + sqrt(phi_t) eps_t for the rows of X_future / W_future.
/// `state` is updated in place so consecutive calls continue one path.
inline Eigen::VectorXd simulate_forward(const ModelSpec& spec, const ParamVector& theta,
                                        const Eigen::MatrixXd& X_future,
                                        const Eigen::MatrixXd& W_future, SimState& state,
                                        const Eigen::VectorXd& eps) {
  theta.check(spec);
  const Eigen::Index h = eps.size();
  if (X_future.rows() != h || W_future.rows() != h) {
    throw LengthError("simulate_forward: covariate rows must match the number of draws");
  }
  if (X_future.cols() != spec.n_beta || W_future.cols() != spec.n_tau) {
    throw LengthError("simulate_forward: covariate columns do not match the model");
  }
  const int m = spec.m();
  if (state.deviation.size() < m || state.innovation.size() < m) {
    throw LengthError("simulate_forward: state must hold at least max(p, q) values");
  }
  // Working buffers: m lagged values followed by the new path.
  Eigen::VectorXd dev(m + h), innov(m + h);
  dev.head(m) = state.deviation.tail(m);
  innov.head(m) = state.innovation.tail(m);

  const Eigen::VectorXd xb = X_future * theta.beta;
  const Eigen::VectorXd sd = (0.5 * (W_future * theta.tau).array()).exp().matrix();
  Eigen::VectorXd v(h);
  for (Eigen::Index t = 0; t < h; ++t) {
    double dyn = 0.0;
    for (int l = 1; l <= spec.p; ++l) dyn += theta.kappa[l - 1] * dev[m + t - l];
    for (int j = 1; j <= spec.q; ++j) dyn += theta.zeta[j - 1] * innov[m + t - j];
    const double r = sd[t] * eps[t];
    innov[m + t] = r;
    dev[m + t] = dyn + r;
    v[t] = xb[t] + dev[m + t];
  }
  state.deviation = dev.tail(m);
  state.innovation = innov.tail(m);
  return v;
}

}  // namespace logsym
