#include "logsym/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "logsym/diagnostics.hpp"
#include "logsym/special.hpp"

namespace logsym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Floor on z^2 where d log g / du is singular at zero (power-exponential, shape > 0).
constexpr double kScoreClamp = 1e-12;

double kernel_log_deriv(double u, const KernelFamily& k) {
  if (k.family == Family::LogPowerExponential && k.theta > 0) u = std::max(u, kScoreClamp);
  return g_log_deriv(u, k);
}

// -loglik and its gradient on the flat parameter vector.
class Objective {
 public:
  Objective(const ModelSpec& spec, const TimeSeriesData& data) : spec_(spec), data_(data) {}

  double value(const Eigen::VectorXd& x) const {
    const double ll = try_conditional_loglik(spec_, ParamVector::from_flat(spec_, x), data_, true);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    return -score(spec_, ParamVector::from_flat(spec_, x), data_);
  }

  // Inverse of the observed information at x when it is positive definite.
  std::optional<Eigen::MatrixXd> inverse_information(const Eigen::VectorXd& x) const {
    const auto info = observed_information(spec_, ParamVector::from_flat(spec_, x), data_);
    if (!info.positive_definite || !info.matrix.allFinite()) return std::nullopt;
    Eigen::LLT<Eigen::MatrixXd> llt(info.matrix);
    if (llt.info() != Eigen::Success) return std::nullopt;
    return llt.solve(Eigen::MatrixXd::Identity(x.size(), x.size()));
  }

 private:
  const ModelSpec& spec_;
  const TimeSeriesData& data_;
};

struct BfgsOutcome {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd g;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
  std::string message;
};

// BFGS on the inverse Hessian with Armijo backtracking (c = 1e-4, shrink 0.5).
// The inverse Hessian is seeded, and reseeded after a failed line search, from
// the observed information.
BfgsOutcome minimize_bfgs(const Objective& obj, Eigen::VectorXd x, int max_iter, double grad_tol) {
  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;
  constexpr int kMaxHalvings = 60;

  const Eigen::Index d = x.size();
  BfgsOutcome out;
  double f = obj.value(x);
  if (!std::isfinite(f)) {
    out.x = x;
    out.message = "objective not finite at the starting point";
    return out;
  }
  Eigen::VectorXd g = obj.gradient(x);

  auto fallback_inverse = [&](const Eigen::VectorXd& grad) {
    const double scale = 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d) * scale);
  };
  Eigen::MatrixXd H = obj.inverse_information(x).value_or(fallback_inverse(g));
  bool fresh = true;

  out.trace.push_back(-f);
  int iter = 0;
  int stalled = 0;
  for (; iter < max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0)) {
      H = fallback_inverse(g);
      dir = -H * g;
      slope = g.dot(dir);
      fresh = true;
    }

    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    Eigen::VectorXd g_new;
    bool accepted = false;
    for (int k = 0; k < kMaxHalvings; ++k, step *= kShrink) {
      x_new = x + step * dir;
      f_new = obj.value(x_new);
      if (!std::isfinite(f_new)) continue;
      if (f_new <= f + kArmijo * step * slope) {
        g_new = obj.gradient(x_new);
        accepted = true;
        break;
      }
      // Near the optimum the decrease can drown in rounding; accept a
      // non-increasing step that clearly shrinks the gradient.
      if (f_new <= f) {
        g_new = obj.gradient(x_new);
        if (g_new.lpNorm<Eigen::Infinity>() < 0.5 * g.lpNorm<Eigen::Infinity>()) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (fresh) {
        out.message = "line search failed";
        break;
      }
      H = obj.inverse_information(x).value_or(fallback_inverse(g));
      fresh = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      // (I - rho s y') H (I - rho y s') + rho s s'
      H += rho * ((1.0 + rho * y.dot(Hy)) * (s * s.transpose()) -
                  (Hy * s.transpose() + s * Hy.transpose()));
    }
    stalled = f - f_new > 1e-12 * (1.0 + std::abs(f)) ? 0 : stalled + 1;
    x = x_new;
    f = f_new;
    g = g_new;
    fresh = false;
    out.trace.push_back(-f);
    if (stalled >= 10) break;
  }
  // On badly scaled designs f stops resolving changes before the score is
  // small. Newton steps on the observed information still shrink the score;
  // accept them while f does not rise beyond rounding.
  for (int k = 0; k < 20 && iter < max_iter && !(g.lpNorm<Eigen::Infinity>() < grad_tol); ++k, ++iter) {
    const auto inv = obj.inverse_information(x);
    if (!inv) break;
    const Eigen::VectorXd x_new = x - *inv * g;
    const double f_new = obj.value(x_new);
    if (!std::isfinite(f_new) || f_new > f + 1e-10 * (1.0 + std::abs(f))) break;
    const Eigen::VectorXd g_new = obj.gradient(x_new);
    if (!(g_new.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>())) break;
    x = x_new;
    f = std::min(f, f_new);  // any rise is rounding; keep the trace monotone
    g = g_new;
    out.trace.push_back(-f);
  }
  if (!out.converged && g.lpNorm<Eigen::Infinity>() < grad_tol) out.converged = true;
  if (!out.converged && out.message.empty()) out.message = "iteration limit reached";
  out.x = x;
  out.f = f;
  out.g = g;
  out.iterations = iter;
  return out;
}

Eigen::VectorXd jitter(const ModelSpec& spec, const Eigen::VectorXd& start, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.1);
  Eigen::VectorXd out = start;
  for (Eigen::Index i = spec.n_beta; i < out.size(); ++i) out[i] += noise(rng);
  return out;
}

}  // namespace

Eigen::VectorXd score(const ModelSpec& spec, const ParamVector& theta, const TimeSeriesData& data) {
  const State s = detail::recurse(spec, theta, data, Eigen::VectorXd{});
  const Eigen::Index n = data.size();
  const int m = spec.m();
  const int p = spec.p;
  const int q = spec.q;
  const Eigen::Index nb = spec.n_beta;
  const Eigen::Index nt = spec.n_tau;
  const Eigen::Index off_kappa = nb + nt;
  const Eigen::Index off_zeta = off_kappa + p;
  const Eigen::VectorXd xb = data.X * theta.beta;

  // dmu(t, .) holds d mu_t / d theta; rows t < m stay zero because the
  // presample innovations are fixed.
  Eigen::MatrixXd dmu = Eigen::MatrixXd::Zero(n, spec.dim());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.dim());

  for (Eigen::Index t = m; t < n; ++t) {
    auto row = dmu.row(t);
    row.head(nb) = data.X.row(t);
    for (int l = 1; l <= p; ++l) {
      row.head(nb) -= theta.kappa[l - 1] * data.X.row(t - l);
      row[off_kappa + l - 1] = data.v[t - l] - xb[t - l];
    }
    for (int j = 1; j <= q; ++j) row[off_zeta + j - 1] = s.r[t - j];
    for (int j = 1; j <= q; ++j) {
      if (t - j >= m) row -= theta.zeta[j - 1] * dmu.row(t - j);
    }

    const double z = s.z[t];
    const double u = z * z;
    const double G = kernel_log_deriv(u, spec.kernel);
    grad -= (2.0 * z / std::sqrt(s.phi[t]) * G) * row.transpose();
    grad.segment(nb, nt) += (-0.5 - u * G) * data.W.row(t).transpose();
  }
  return grad;
}

ObservedInformation observed_information(const ModelSpec& spec, const ParamVector& theta,
                                         const TimeSeriesData& data) {
  const Eigen::VectorXd x = theta.flat();
  const Eigen::Index d = x.size();
  Eigen::MatrixXd hess(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = std::max(1e-5, 1e-5 * std::abs(x[i]));
    Eigen::VectorXd up = x, down = x;
    up[i] += h;
    down[i] -= h;
    hess.col(i) = (score(spec, ParamVector::from_flat(spec, up), data) -
                   score(spec, ParamVector::from_flat(spec, down), data)) /
                  (2.0 * h);
  }
  ObservedInformation out;
  out.unsymmetrized = -hess;
  out.matrix = 0.5 * (out.unsymmetrized + out.unsymmetrized.transpose());
  if (out.matrix.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
    out.positive_definite = out.min_eigenvalue > 0;
  } else {
    out.min_eigenvalue = kNaN;
  }
  return out;
}

ParamVector initialize(const ModelSpec& spec, const TimeSeriesData& data) {
  spec.validate();
  if (data.size() <= spec.m()) throw LengthError("initialize: need more observations than max(p, q)");
  if (data.X.cols() != spec.n_beta || data.W.cols() != spec.n_tau) {
    throw LengthError("initialize: design matrix columns do not match the model");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X);
  if (qr.rank() < data.X.cols()) throw RankDeficientError("initialize: X'X is singular");

  ParamVector theta = ParamVector::zeros(spec);
  theta.beta = qr.solve(data.v);
  const Eigen::VectorXd resid = data.v - data.X * theta.beta;
  const double var = resid.squaredNorm() / static_cast<double>(resid.size());
  theta.tau[0] = std::log(std::max(var, std::numeric_limits<double>::min()));
  if (spec.p > 0 && var > 0) theta.kappa = yule_walker(resid, spec.p);
  return theta;
}

FitResult fit(const ModelSpec& spec, const TimeSeriesData& data, const FitOptions& options) {
  spec.validate();
  check_compatible(spec, ParamVector::zeros(spec), data);

  ParamVector start;
  if (options.init_strategy == InitStrategy::Given) {
    if (!options.start) throw DomainError("fit: init strategy 'given' requires a start vector");
    options.start->check(spec);
    start = *options.start;
  } else {
    start = initialize(spec, data);
  }

  const Objective obj(spec, data);
  BfgsOutcome best = minimize_bfgs(obj, start.flat(), options.max_iter, options.grad_tol);
  std::mt19937_64 rng(options.seed);
  for (int attempt = 0; attempt < options.restarts && !best.converged; ++attempt) {
    BfgsOutcome next =
        minimize_bfgs(obj, jitter(spec, start.flat(), rng), options.max_iter, options.grad_tol);
    if ((next.converged && !best.converged) || (next.converged == best.converged && next.f < best.f)) {
      best = std::move(next);
    }
  }

  FitResult res;
  res.spec = spec;
  res.theta_hat = ParamVector::from_flat(spec, best.x);
  res.converged = best.converged;
  res.iterations = best.iterations;
  res.trace = std::move(best.trace);
  res.message = best.converged ? "converged" : best.message;
  res.n_obs = data.size();

  const Eigen::Index d = spec.dim();
  const Eigen::Index used = res.n_used();
  const State s = detail::recurse(spec, res.theta_hat, data, Eigen::VectorXd{});
  res.mu_hat = s.mu;
  res.r_hat = s.r;
  res.z_hat = s.z;
  res.phi_hat = s.phi;
  res.loglik_full = try_conditional_loglik(spec, res.theta_hat, data, true);
  res.loglik_kernel = try_conditional_loglik(spec, res.theta_hat, data, false);
  res.loglik_log_scale = res.loglik_full + data.v.tail(used).sum();
  res.aic = -2.0 * res.loglik_full + 2.0 * static_cast<double>(d);
  res.bic = -2.0 * res.loglik_full + static_cast<double>(d) * std::log(static_cast<double>(used));
  res.rmse = std::sqrt(s.r.tail(used).squaredNorm() / static_cast<double>(used));
  res.gradient = std::isfinite(res.loglik_full) ? score(spec, res.theta_hat, data)
                                                : Eigen::VectorXd::Constant(d, kNaN);

  res.se = Eigen::VectorXd::Constant(d, kNaN);
  const auto info = observed_information(spec, res.theta_hat, data);
  res.hessian = -info.matrix;
  if (info.positive_definite) {
    Eigen::LLT<Eigen::MatrixXd> llt(info.matrix);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
      res.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
      res.information_ok = (res.se.array() > 0).all() && res.se.allFinite();
    }
  }
  if (!res.information_ok) {
    res.se.setConstant(kNaN);
    if (res.converged) res.message = "converged; observed information is singular";
  }
  res.p_values = wald_tests(res);
  return res;
}

double wald_p_value(double estimate, double se) {
  if (!(se > 0) || !std::isfinite(se) || !std::isfinite(estimate)) return kNaN;
  return 2.0 * special::normal_cdf(-std::abs(estimate / se));
}

Eigen::VectorXd wald_tests(const FitResult& fit) {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(fit.spec.dim(), kNaN);
  const Eigen::VectorXd est = fit.theta_hat.flat();
  for (Eigen::Index i = 0; i < fit.spec.n_beta; ++i) {
    if (i < fit.se.size()) p[i] = wald_p_value(est[i], fit.se[i]);
  }
  return p;
}

ProfileResult profile_theta(const ModelSpec& spec, const TimeSeriesData& data,
                            std::vector<double> grid, const FitOptions& options) {
  if (!spec.kernel.has_shape()) {
    throw DomainError("profile_theta: family " + std::string(family_name(spec.kernel.family)) +
                      " has no shape parameter");
  }
  if (grid.empty()) throw DomainError("profile_theta: grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ProfileResult out;
  bool found = false;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double shape : grid) {
    ProfileRow row;
    row.theta = shape;
    try {
      ModelSpec s = spec;
      s.kernel.theta = shape;
      s.validate();
      const FitResult f = fit(s, data, options);
      row.loglik_full = f.loglik_full;
      row.ok = f.converged && std::isfinite(f.loglik_full);
      if (!row.ok) row.error = f.message;
    } catch (const Error& e) {
      row.error = e.what();
      row.loglik_full = kNaN;
    }
    if (row.ok && row.loglik_full > best_ll) {
      best_ll = row.loglik_full;
      out.best_theta = shape;
      found = true;
    }
    out.rows.push_back(std::move(row));
  }
  if (!found) throw ConvergenceError("profile_theta: no grid point produced a converged fit");
  return out;
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < spec.n_beta; ++i) names.push_back("beta" + std::to_string(i));
  for (Eigen::Index i = 0; i < spec.n_tau; ++i) names.push_back("tau" + std::to_string(i));
  for (int i = 1; i <= spec.p; ++i) names.push_back("kappa" + std::to_string(i));
  for (int i = 1; i <= spec.q; ++i) names.push_back("zeta" + std::to_string(i));
  return names;
}

}  // namespace logsym
