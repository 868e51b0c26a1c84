#include "logsym/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "logsym/parallel.hpp"
#include "logsym/simulation.hpp"
#include "logsym/special.hpp"

namespace logsym {

namespace {

constexpr double kProbFloor = 1e-12;

// Type-7 sample quantile of sorted values.
double sorted_quantile(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double quantile_residual(double z, const KernelFamily& k, Orientation o) {
  double u = cdf_standard(z, k);
  if (o == Orientation::Survival) u = 1.0 - u;
  u = std::clamp(u, kProbFloor, 1.0 - kProbFloor);
  return special::normal_quantile(u);
}

Eigen::VectorXd quantile_residuals(const ModelSpec& spec, const ParamVector& theta,
                                   const TimeSeriesData& data, Orientation o) {
  const State s = recurse_state(spec, theta, data);
  const Eigen::Index m = spec.m();
  const Eigen::Index n = data.size();
  Eigen::VectorXd rq(n - m);
  for (Eigen::Index t = m; t < n; ++t) rq[t - m] = quantile_residual(s.z[t], spec.kernel, o);
  return rq;
}

Eigen::VectorXd quantile_residuals(const FitResult& fit, const TimeSeriesData& data,
                                   Orientation o) {
  return quantile_residuals(fit.spec, fit.theta_hat, data, o);
}

Eigen::VectorXd sample_acf(const Eigen::VectorXd& x, Eigen::Index max_lag) {
  const Eigen::Index n = x.size();
  if (n < 2) throw LengthError("acf: need at least two observations");
  if (max_lag < 0 || max_lag >= n) throw DomainError("acf: max_lag must lie in [0, n)");
  const Eigen::VectorXd d = x.array() - x.mean();
  const double c0 = d.squaredNorm();
  if (!(c0 > 0)) throw DomainError("acf: series has zero variance");
  Eigen::VectorXd rho(max_lag);
  for (Eigen::Index k = 1; k <= max_lag; ++k) rho[k - 1] = d.head(n - k).dot(d.tail(n - k)) / c0;
  return rho;
}

LevinsonResult durbin_levinson(const Eigen::VectorXd& rho) {
  const Eigen::Index L = rho.size();
  LevinsonResult out;
  out.pacf = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(L);
  double v = 1.0;
  for (Eigen::Index k = 1; k <= L; ++k) {
    double num = rho[k - 1];
    for (Eigen::Index j = 1; j < k; ++j) num -= prev[j - 1] * rho[k - j - 1];
    if (!(v > 0)) throw SingularityError("durbin_levinson: autocorrelations are not positive definite");
    const double phi_kk = num / v;
    a[k - 1] = phi_kk;
    for (Eigen::Index j = 1; j < k; ++j) a[j - 1] = prev[j - 1] - phi_kk * prev[k - j - 1];
    v *= 1.0 - phi_kk * phi_kk;
    out.pacf[k - 1] = phi_kk;
    prev = a;
  }
  out.coefficients = a;
  out.innovation_ratio = v;
  return out;
}

Eigen::VectorXd sample_pacf(const Eigen::VectorXd& x, Eigen::Index max_lag) {
  return durbin_levinson(sample_acf(x, max_lag)).pacf;
}

Eigen::VectorXd yule_walker(const Eigen::VectorXd& x, int p) {
  if (p <= 0) return Eigen::VectorXd(0);
  const Eigen::VectorXd d = x.array() - x.mean();
  if (x.size() <= p || d.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(p);
  return durbin_levinson(sample_acf(x, p)).coefficients;
}

PortmanteauTest ljung_box(const Eigen::VectorXd& x, Eigen::Index lag, Eigen::Index fitdf) {
  if (lag < 1) throw DomainError("ljung_box: lag must be at least 1");
  if (fitdf < 0 || fitdf >= lag) throw DomainError("ljung_box: fitdf must lie in [0, lag)");
  const Eigen::Index n = x.size();
  const Eigen::VectorXd rho = sample_acf(x, lag);
  double q = 0.0;
  for (Eigen::Index k = 1; k <= lag; ++k) {
    q += rho[k - 1] * rho[k - 1] / static_cast<double>(n - k);
  }
  PortmanteauTest out;
  out.statistic = static_cast<double>(n) * static_cast<double>(n + 2) * q;
  out.lag = lag;
  out.dof = lag - fitdf;
  out.p_value = special::chi_squared_survival(out.statistic, static_cast<double>(out.dof));
  return out;
}

double ks_statistic_normal(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n == 0) throw LengthError("ks: empty sample");
  std::vector<double> s(x.data(), x.data() + n);
  std::sort(s.begin(), s.end());
  double d = 0.0;
  const double nd = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = special::normal_cdf(s[static_cast<std::size_t>(i)]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / nd - f, f - static_cast<double>(i) / nd});
  }
  return d;
}

Envelope simulated_envelope(const FitResult& fit, const TimeSeriesData& data,
                            const EnvelopeOptions& options) {
  if (options.replicates < 19) throw DomainError("envelope: need at least 19 replicates");
  if (!(options.level >= 0 && options.level < 1)) throw DomainError("envelope: level must lie in [0, 1)");
  const ModelSpec& spec = fit.spec;
  const Eigen::Index len = data.size() - spec.m();
  const auto reps = static_cast<std::size_t>(options.replicates);
  std::vector<Eigen::VectorXd> sorted(reps);

  parallel_for(reps, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(options.seed, r));
    const TimeSeriesData sim = simulate_series(spec, fit.theta_hat, data.X, data.W, rng);
    Eigen::VectorXd rq;
    if (options.refit) {
      FitOptions fo = options.fit;
      fo.seed = derive_seed(options.seed, r, 1);
      rq = quantile_residuals(logsym::fit(spec, sim, fo), sim);
    } else {
      rq = quantile_residuals(spec, fit.theta_hat, sim);
    }
    std::sort(rq.data(), rq.data() + rq.size());
    sorted[r] = std::move(rq);
  });

  Envelope env;
  env.lower.resize(len);
  env.median.resize(len);
  env.upper.resize(len);
  std::vector<double> column(reps);
  const double lo = (1.0 - options.level) / 2.0;
  const double hi = (1.0 + options.level) / 2.0;
  for (Eigen::Index i = 0; i < len; ++i) {
    for (std::size_t r = 0; r < reps; ++r) column[r] = sorted[r][i];
    std::sort(column.begin(), column.end());
    env.lower[i] = sorted_quantile(column, lo);
    env.median[i] = sorted_quantile(column, 0.5);
    env.upper[i] = sorted_quantile(column, hi);
  }
  return env;
}

ResidualReport residual_report(const FitResult& fit, const TimeSeriesData& data,
                               const ReportOptions& options) {
  ResidualReport rep;
  rep.rq = quantile_residuals(fit, data);
  const Eigen::Index max_lag = std::min<Eigen::Index>(options.max_lag, rep.rq.size() - 1);
  rep.acf = sample_acf(rep.rq, max_lag);
  rep.pacf = durbin_levinson(rep.acf).pacf;
  rep.ks_stat = ks_statistic_normal(rep.rq);
  rep.ljung_box = ljung_box(rep.rq, std::min<Eigen::Index>(options.ljung_box_lag, rep.rq.size() - 1));
  if (options.envelope.replicates > 0) rep.envelope = simulated_envelope(fit, data, options.envelope);
  return rep;
}

}  // namespace logsym
