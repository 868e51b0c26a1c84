#include "logsym/simulation.hpp"

#include <cmath>
#include <limits>

#include "logsym/parallel.hpp"
#include "logsym/theory.hpp"

namespace logsym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// exp() overflows beyond this on the log scale.
constexpr double kMaxLogResponse = 700.0;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

Eigen::MatrixXd draw_covariates(Eigen::Index rows, Eigen::Index cols, CovariateRule rule,
                                std::mt19937_64& rng) {
  Eigen::MatrixXd out(rows, cols);
  if (rule == CovariateRule::IidUniform01) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = u(rng);
  } else {
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = z(rng);
  }
  return out;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& cols) {
  Eigen::MatrixXd out(cols.rows(), cols.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(cols.cols()) = cols;
  return out;
}

}  // namespace

std::string_view covariate_rule_name(CovariateRule rule) {
  switch (rule) {
    case CovariateRule::IidStandardNormal:
      return "iid_standard_normal";
    case CovariateRule::IidUniform01:
      return "iid_uniform01";
    case CovariateRule::FromFile:
      return "from_file";
  }
  return "unknown";
}

CovariateRule parse_covariate_rule(std::string_view name) {
  if (name == "iid_standard_normal") return CovariateRule::IidStandardNormal;
  if (name == "iid_uniform01") return CovariateRule::IidUniform01;
  if (name == "from_file") return CovariateRule::FromFile;
  throw DomainError("unknown covariate rule '" + std::string(name) + "'");
}

TimeSeriesData simulate_series(const ModelSpec& spec, const ParamVector& theta,
                               const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
                               std::mt19937_64& rng) {
  const Eigen::Index n = X.rows();
  Eigen::VectorXd eps(n);
  for (Eigen::Index t = 0; t < n; ++t) eps[t] = draw_standard(rng, spec.kernel);
  SimState state = SimState::zeros(spec.m());
  Eigen::VectorXd v = simulate_forward(spec, theta, X, W, state, eps);
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kMaxLogResponse) {
    throw NonFiniteError("simulated series overflowed; the AR polynomial is likely non-stationary");
  }
  return TimeSeriesData::from_log(std::move(v), X, W);
}

TimeSeriesData generate_dataset(const ModelSpec& spec, const ParamVector& theta, Eigen::Index n,
                                CovariateRule rule, Eigen::Index burnin, std::uint64_t seed,
                                const Eigen::MatrixXd& covariates) {
  spec.validate();
  theta.check(spec);
  if (n < spec.m() + 2) throw DomainError("generate_dataset: n must be at least max(p, q) + 2");
  if (burnin < 0) throw DomainError("generate_dataset: burnin must be non-negative");

  const Eigen::Index total = burnin + n;
  const Eigen::Index kx = spec.n_beta - 1;
  const Eigen::Index kw = spec.n_tau - 1;
  std::mt19937_64 rng(seed);

  Eigen::MatrixXd extra;
  if (rule == CovariateRule::FromFile) {
    if (covariates.cols() != kx + kw || covariates.rows() < total) {
      throw LengthError("generate_dataset: covariate file needs " + std::to_string(kx + kw) +
                        " columns and at least " + std::to_string(total) + " rows");
    }
    extra = covariates.topRows(total);
  } else {
    extra = draw_covariates(total, kx + kw, rule, rng);
  }
  const Eigen::MatrixXd X = with_intercept(extra.leftCols(kx));
  const Eigen::MatrixXd W = with_intercept(extra.rightCols(kw));

  const TimeSeriesData full = simulate_series(spec, theta, X, W, rng);
  return TimeSeriesData::from_log(full.v.tail(n), full.X.bottomRows(n), full.W.bottomRows(n));
}

ModelSpec McConfig::spec() const {
  ModelSpec s;
  s.p = static_cast<int>(true_theta.kappa.size());
  s.q = static_cast<int>(true_theta.zeta.size());
  s.n_beta = true_theta.beta.size();
  s.n_tau = 1;
  s.kernel = family;
  return s;
}

void McConfig::validate() const {
  if (replicates < 2) throw ConfigError("mc: replicates must be at least 2");
  if (burnin < 0) throw ConfigError("mc: burnin must be non-negative");
  if (n_grid.empty() || phi_grid.empty()) throw ConfigError("mc: n_grid and phi_grid must be non-empty");
  for (double phi : phi_grid) {
    if (!(phi > 0)) throw ConfigError("mc: every phi must be positive");
  }
  if (true_theta.beta.size() < 1) throw ConfigError("mc: true beta must have at least one entry");
  spec().validate();
  for (Eigen::Index n : n_grid) {
    if (n < spec().m() + 2) throw ConfigError("mc: each n must be at least max(p, q) + 2");
  }
}

const McCell& McResultTable::cell(Eigen::Index n, double phi) const {
  for (const auto& c : cells) {
    if (c.n == n && c.phi == phi) return c;
  }
  throw DomainError("no Monte Carlo cell for the requested (n, phi)");
}

std::vector<std::string> mc_parameter_names(const ModelSpec& spec) {
  std::vector<std::string> names{"phi"};
  for (Eigen::Index i = 0; i < spec.n_beta; ++i) names.push_back("beta" + std::to_string(i));
  for (int i = 1; i <= spec.p; ++i) names.push_back("kappa" + std::to_string(i));
  for (int i = 1; i <= spec.q; ++i) names.push_back("zeta" + std::to_string(i));
  return names;
}

McResultTable run_monte_carlo(const McConfig& config) {
  config.validate();
  const ModelSpec spec = config.spec();
  McResultTable table;
  table.config = config;
  table.parameters = mc_parameter_names(spec);
  const Eigen::Index k = static_cast<Eigen::Index>(table.parameters.size());

  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    for (std::size_t pi = 0; pi < config.phi_grid.size(); ++pi) {
      const Eigen::Index n = config.n_grid[ni];
      const double phi = config.phi_grid[pi];
      ParamVector truth = config.true_theta;
      truth.tau = Eigen::VectorXd::Constant(1, std::log(phi));

      Eigen::VectorXd truth_row(k);
      truth_row << phi, truth.beta, truth.kappa, truth.zeta;

      McCell cell;
      cell.n = n;
      cell.phi = phi;
      cell.estimates = Eigen::MatrixXd::Constant(config.replicates, k, kNaN);

      parallel_for(static_cast<std::size_t>(config.replicates), [&](std::size_t r) {
        const std::uint64_t stream = config.common_random_numbers ? 0 : pi + 1;
        const std::uint64_t seed = derive_seed(config.seed, ni * 1000003ULL + stream, r);
        try {
          const TimeSeriesData data =
              generate_dataset(spec, truth, n, config.covariate_rule, config.burnin, seed,
                               config.covariates);
          FitOptions opts = config.fit;
          opts.seed = seed;
          const FitResult f = fit(spec, data, opts);
          if (!f.converged) return;
          Eigen::VectorXd row(k);
          row << std::exp(f.theta_hat.tau[0]), f.theta_hat.beta, f.theta_hat.kappa,
              f.theta_hat.zeta;
          cell.estimates.row(static_cast<Eigen::Index>(r)) = row.transpose();
        } catch (const Error&) {
          // counted as a failure below
        }
      });

      for (Eigen::Index r = 0; r < config.replicates; ++r) {
        if (cell.estimates.row(r).allFinite()) {
          ++cell.used;
        } else {
          ++cell.failures;
        }
      }
      cell.failed = cell.used < 2 ||
                    static_cast<double>(cell.failures) >
                        config.max_failure_rate * static_cast<double>(config.replicates);

      for (Eigen::Index j = 0; j < k; ++j) {
        CompensatedSum err_sum, sq_sum;
        for (Eigen::Index r = 0; r < config.replicates; ++r) {
          if (!cell.estimates.row(r).allFinite()) continue;
          const double e = cell.estimates(r, j) - truth_row[j];
          err_sum.add(e);
          sq_sum.add(e * e);
        }
        McParamStat stat;
        stat.name = table.parameters[static_cast<std::size_t>(j)];
        stat.truth = truth_row[j];
        if (cell.used >= 2) {
          const double used = cell.used;
          stat.bias = err_sum.value() / used;
          stat.mse = sq_sum.value() / used;
          CompensatedSum dev_e, dev_sq;
          for (Eigen::Index r = 0; r < config.replicates; ++r) {
            if (!cell.estimates.row(r).allFinite()) continue;
            const double e = cell.estimates(r, j) - truth_row[j];
            dev_e.add((e - stat.bias) * (e - stat.bias));
            dev_sq.add((e * e - stat.mse) * (e * e - stat.mse));
          }
          stat.bias_se = std::sqrt(dev_e.value() / (used - 1) / used);
          stat.mse_se = std::sqrt(dev_sq.value() / (used - 1) / used);
        } else {
          stat.bias = stat.mse = stat.bias_se = stat.mse_se = kNaN;
        }
        cell.stats.push_back(stat);
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

}  // namespace logsym
