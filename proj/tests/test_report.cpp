#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "logsym/io.hpp"
#include "logsym/report.hpp"

using namespace logsym;

namespace {

// Hand-built result so the golden text does not depend on optimizer rounding.
FitResult toy_fit() {
  FitResult f;
  f.spec.n_beta = 1;
  f.spec.n_tau = 1;
  f.spec.p = 1;
  f.theta_hat.beta = Eigen::VectorXd::Constant(1, 1.23456);
  f.theta_hat.tau = Eigen::VectorXd::Constant(1, -0.5);
  f.theta_hat.kappa = Eigen::VectorXd::Constant(1, 0.61);
  f.theta_hat.zeta = Eigen::VectorXd(0);
  f.se = Eigen::Vector3d(0.1, 0.05, std::numeric_limits<double>::quiet_NaN());
  f.p_values = Eigen::Vector3d(wald_p_value(1.23456, 0.1), std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN());
  f.n_obs = 100;
  f.rmse = 0.123456;
  f.aic = 250.5;
  f.bic = 258.25;
  f.converged = true;
  f.information_ok = true;
  f.mu_hat = Eigen::VectorXd::Zero(100);
  f.r_hat = Eigen::VectorXd::Zero(100);
  f.z_hat = Eigen::VectorXd::Zero(100);
  f.phi_hat = Eigen::VectorXd::Constant(100, std::exp(-0.5));
  f.gradient = Eigen::Vector3d(1e-8, -2e-8, 0);
  f.hessian = -Eigen::Matrix3d::Identity();
  f.trace = {-140.0, -130.0, -125.25};
  f.iterations = 2;
  f.message = "gradient norm below tolerance";
  return f;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 88.699}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "NA");
}

TEST_CASE("fit text table matches the golden file") {
  const std::string text = fit_to_text(toy_fit());
  const auto golden = std::filesystem::path(LOGSYM_TEST_DATA_DIR) / "golden_fit.txt";
  if (std::getenv("LOGSYM_UPDATE_GOLDEN")) write_text_file(golden, text);
  CHECK(text == read_text_file(golden));

  FitResult bad = toy_fit();
  bad.converged = false;
  bad.message = "iteration limit reached";
  CHECK(fit_to_text(bad).find("warning: iteration limit reached") != std::string::npos);
}

TEST_CASE("fit JSON round trip") {
  const FitResult f = toy_fit();
  DataLabel label;
  label.source = "csv";
  label.path = "toy.csv";
  label.response = "y";
  label.median_columns = {"x"};
  const std::string text = fit_to_json(f, label);
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["schema_version"] == kSchemaVersion);
  CHECK(doc["kind"] == "fit");
  CHECK(doc["parameters"].size() == 3);
  CHECK(doc["parameters"][2]["se"].is_null());

  const FitReport back = fit_from_json(text);
  CHECK(back.fit.theta_hat.flat() == f.theta_hat.flat());
  CHECK(back.fit.spec.p == 1);
  CHECK(back.fit.n_obs == 100);
  CHECK(back.fit.aic == f.aic);
  CHECK(back.fit.phi_hat == f.phi_hat);
  CHECK(back.fit.trace == f.trace);
  CHECK(std::isnan(back.fit.se[2]));
  CHECK(back.data.median_columns == label.median_columns);
  CHECK(fit_to_json(back.fit, back.data) == text);

  CHECK_THROWS_AS(fit_from_json("{}"), ParseError);
  CHECK_THROWS_AS(fit_from_json("not json"), ParseError);
}

TEST_CASE("Monte Carlo CSV shape") {
  McConfig cfg;
  cfg.n_grid = {60, 120};
  cfg.phi_grid = {0.5, 1.0};
  cfg.true_theta.beta = Eigen::VectorXd::Constant(1, 0.5);
  cfg.true_theta.tau = Eigen::VectorXd::Zero(1);
  cfg.true_theta.kappa = Eigen::VectorXd::Constant(1, 0.5);
  cfg.true_theta.zeta = Eigen::VectorXd(0);
  cfg.replicates = 5;
  cfg.seed = 4;
  const McResultTable t = run_monte_carlo(cfg);
  const std::string csv = mc_to_csv(t);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "parameter,n,bias_phi_0.5,mse_phi_0.5,bias_phi_1,mse_phi_1");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 3 * 2);
  const auto doc = nlohmann::json::parse(mc_to_json(t));
  CHECK(doc["kind"] == "monte_carlo");
  CHECK(mc_to_csv(run_monte_carlo(cfg)) == csv);
}

TEST_CASE("theory report") {
  ArmaPolynomials poly;
  poly.kappa = Eigen::VectorXd::Constant(1, 0.6);
  poly.zeta = Eigen::VectorXd::Constant(1, 0.3);
  const TheoryReport rep = make_theory_report(poly, 1.0, KernelFamily::log_normal(), 5);
  const std::string csv = theory_to_csv(rep);
  CHECK(csv.rfind("lag,psi,autocovariance,autocorrelation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  const auto doc = nlohmann::json::parse(theory_to_json(rep));
  CHECK(doc["stationary"] == true);

  poly.kappa[0] = 1.2;
  CHECK_THROWS_AS(make_theory_report(poly, 1.0, KernelFamily::log_normal(), 5), NonStationaryError);
}
