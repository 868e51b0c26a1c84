#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "logsym/simulation.hpp"
#include "logsym/theory.hpp"

using namespace logsym;

TEST_CASE("white-noise log-normal series has median one") {
  ModelSpec spec;
  const ParamVector th = ParamVector::zeros(spec);
  const auto data = generate_dataset(spec, th, 100000, CovariateRule::IidStandardNormal, 0, 1);
  Eigen::VectorXd y = data.y;
  std::nth_element(y.data(), y.data() + y.size() / 2, y.data() + y.size());
  const double med = y[y.size() / 2];
  CHECK(med > 0.98);
  CHECK(med < 1.02);
  CHECK((data.v - data.y.array().log().matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("burn-in does not change the stationary autocorrelation") {
  ModelSpec spec;
  spec.p = 1;
  spec.n_beta = 2;
  ParamVector th = ParamVector::zeros(spec);
  th.beta << 1.0, 0.7;
  th.kappa << 0.6;
  for (Eigen::Index burnin : {0, 500}) {
    const auto data = generate_dataset(spec, th, 100000, CovariateRule::IidStandardNormal, burnin, 2);
    const Eigen::VectorXd w = data.v - data.X * th.beta;
    const Eigen::VectorXd d = w.array() - w.mean();
    const double rho1 = d.head(d.size() - 1).dot(d.tail(d.size() - 1)) / d.squaredNorm();
    CAPTURE(burnin);
    CHECK(std::abs(rho1 - 0.6) < 0.01);
  }
}

TEST_CASE("datasets are deterministic in the seed") {
  ModelSpec spec;
  spec.q = 1;
  spec.n_beta = 2;
  spec.kernel = KernelFamily::log_t(4.0);
  ParamVector th = ParamVector::zeros(spec);
  th.zeta << 0.3;
  const auto a = generate_dataset(spec, th, 200, CovariateRule::IidUniform01, 10, 42);
  const auto b = generate_dataset(spec, th, 200, CovariateRule::IidUniform01, 10, 42);
  const auto c = generate_dataset(spec, th, 200, CovariateRule::IidUniform01, 10, 43);
  CHECK(a.y == b.y);
  CHECK(a.X == b.X);
  CHECK(a.y != c.y);
  CHECK(a.X.col(1).minCoeff() >= 0.0);
  CHECK(a.X.col(1).maxCoeff() <= 1.0);
}

TEST_CASE("covariates from a file") {
  ModelSpec spec;
  spec.n_beta = 2;
  spec.n_tau = 2;
  ParamVector th = ParamVector::zeros(spec);
  th.beta << 0.0, 1.0;
  th.tau << 0.0, 0.5;
  Eigen::MatrixXd cov(30, 2);
  for (int i = 0; i < 30; ++i) cov.row(i) << i, 0.1 * i;
  const auto data = generate_dataset(spec, th, 20, CovariateRule::FromFile, 10, 1, cov);
  CHECK(data.X(0, 1) == 10.0);
  CHECK(data.W(19, 1) == doctest::Approx(2.9));
  CHECK_THROWS_AS(generate_dataset(spec, th, 25, CovariateRule::FromFile, 10, 1, cov), LengthError);
}

TEST_CASE("explosive parameters overflow with an error") {
  ModelSpec spec;
  spec.p = 1;
  ParamVector th = ParamVector::zeros(spec);
  th.kappa << 1.5;
  CHECK_THROWS_AS(generate_dataset(spec, th, 5000, CovariateRule::IidStandardNormal, 0, 1), NonFiniteError);
  CHECK_THROWS_AS(generate_dataset(spec, th, 1, CovariateRule::IidStandardNormal, 0, 1), DomainError);
}

TEST_CASE("covariate rule names") {
  for (auto r : {CovariateRule::IidStandardNormal, CovariateRule::IidUniform01, CovariateRule::FromFile}) {
    CHECK(parse_covariate_rule(covariate_rule_name(r)) == r);
  }
  CHECK_THROWS_AS(parse_covariate_rule("sobol"), DomainError);
}

namespace {

McConfig small_config() {
  McConfig cfg;
  cfg.family = KernelFamily::log_normal();
  cfg.n_grid = {100, 300};
  cfg.phi_grid = {0.5, 2.0};
  cfg.true_theta.beta = Eigen::Vector2d(1.0, 0.7);
  cfg.true_theta.tau = Eigen::VectorXd::Zero(1);
  cfg.true_theta.kappa = Eigen::VectorXd::Constant(1, 0.6);
  cfg.true_theta.zeta = Eigen::VectorXd::Constant(1, 0.3);
  cfg.replicates = 40;
  cfg.burnin = 100;
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("Monte Carlo table shape and variance bound") {
  const McResultTable t = run_monte_carlo(small_config());
  REQUIRE(t.cells.size() == 4);
  CHECK(t.parameters == std::vector<std::string>{"phi", "beta0", "beta1", "kappa1", "zeta1"});
  for (const auto& cell : t.cells) {
    CHECK(cell.used + cell.failures == 40);
    CHECK_FALSE(cell.failed);
    for (const auto& s : cell.stats) CHECK(s.mse >= s.bias * s.bias - 1e-15);
  }
  CHECK(t.cell(300, 2.0).stats[0].truth == 2.0);
  CHECK_THROWS_AS(t.cell(500, 2.0), DomainError);
}

TEST_CASE("common random numbers make the dynamic estimates scale-free") {
  const McResultTable t = run_monte_carlo(small_config());
  for (Eigen::Index n : {100, 300}) {
    const auto& a = t.cell(n, 0.5);
    const auto& b = t.cell(n, 2.0);
    for (std::size_t j = 3; j < 5; ++j) {
      CAPTURE(t.parameters[j]);
      CHECK(std::abs(a.stats[j].bias - b.stats[j].bias) < 5e-5);
      CHECK(std::abs(a.stats[j].mse - b.stats[j].mse) < 5e-5);
    }
    // phi-hat scales with phi
    CHECK(b.stats[0].bias == doctest::Approx(4.0 * a.stats[0].bias).epsilon(1e-3));
  }
}

TEST_CASE("Monte Carlo is reproducible") {
  const McResultTable a = run_monte_carlo(small_config());
  const McResultTable b = run_monte_carlo(small_config());
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    CHECK(a.cells[c].estimates.cwiseEqual(b.cells[c].estimates).all());
  }
}

TEST_CASE("two replicates are enough for a table") {
  McConfig cfg = small_config();
  cfg.replicates = 2;
  cfg.n_grid = {100};
  cfg.phi_grid = {1.0};
  const McResultTable t = run_monte_carlo(cfg);
  for (const auto& s : t.cells[0].stats) CHECK(s.mse >= s.bias * s.bias - 1e-15);
  cfg.replicates = 1;
  CHECK_THROWS_AS(run_monte_carlo(cfg), ConfigError);
}
