#include "logsym/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "logsym/special.hpp"

namespace logsym {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ojson number(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson array(const Eigen::VectorXd& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

ojson matrix(const Eigen::MatrixXd& m) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(array(m.row(i).transpose()));
  return out;
}

double read_number(const ojson& j) { return j.is_null() ? kNaN : j.get<double>(); }

Eigen::VectorXd read_array(const ojson& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = read_number(j[i]);
  return v;
}

Eigen::MatrixXd read_matrix(const ojson& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = read_array(j[static_cast<std::size_t>(i)]).transpose();
  return m;
}

std::string fmt(const char* pattern, double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string model_label(const ModelSpec& spec) {
  std::string prefix;
  switch (spec.kernel.family) {
    case Family::LogNormal:
      prefix = "LogN";
      break;
    case Family::LogStudentT:
      prefix = "Logt(" + format_double(spec.kernel.theta) + ")";
      break;
    case Family::LogPowerExponential:
      prefix = "LogPE(" + format_double(spec.kernel.theta) + ")";
      break;
  }
  return prefix + "-ARMAX(" + std::to_string(spec.p) + "," + std::to_string(spec.q) + ")";
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  for (int digits = 6; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string fit_to_json(const FitResult& fit, const DataLabel& data) {
  const ModelSpec& spec = fit.spec;
  const auto names = parameter_names(spec);
  const Eigen::VectorXd est = fit.theta_hat.flat();

  ojson params = ojson::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    params.push_back({{"name", names[i]},
                      {"estimate", number(est[k])},
                      {"se", number(fit.se.size() > k ? fit.se[k] : kNaN)},
                      {"p_value", number(fit.p_values.size() > k ? fit.p_values[k] : kNaN)}});
  }

  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "fit";
  doc["model"] = {{"family", std::string(family_name(spec.kernel.family))},
                  {"vartheta", spec.kernel.theta},
                  {"p", spec.p},
                  {"q", spec.q},
                  {"n_beta", spec.n_beta},
                  {"n_tau", spec.n_tau}};
  doc["data"] = {{"source", data.source},
                 {"path", data.path},
                 {"response", data.response},
                 {"median_columns", data.median_columns},
                 {"dispersion_columns", data.dispersion_columns},
                 {"median_intercept", data.median_intercept},
                 {"dispersion_intercept", data.dispersion_intercept},
                 {"centered", data.centered},
                 {"trend", data.trend}};
  doc["n_obs"] = fit.n_obs;
  doc["n_used"] = fit.n_used();
  doc["converged"] = fit.converged;
  doc["information_ok"] = fit.information_ok;
  doc["iterations"] = fit.iterations;
  doc["message"] = fit.message;
  doc["parameters"] = params;
  doc["loglik"] = {{"full", number(fit.loglik_full)},
                   {"kernel", number(fit.loglik_kernel)},
                   {"log_scale", number(fit.loglik_log_scale)}};
  doc["aic"] = number(fit.aic);
  doc["bic"] = number(fit.bic);
  doc["rmse"] = number(fit.rmse);
  doc["gradient"] = array(fit.gradient);
  doc["hessian"] = matrix(fit.hessian);
  doc["fitted"] = {{"mu", array(fit.mu_hat)},
                   {"r", array(fit.r_hat)},
                   {"z", array(fit.z_hat)},
                   {"phi", array(fit.phi_hat)}};
  doc["trace"] = array(Eigen::Map<const Eigen::VectorXd>(fit.trace.data(),
                                                         static_cast<Eigen::Index>(fit.trace.size())));
  return doc.dump(2) + "\n";
}

FitReport fit_from_json(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("fit report is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion || doc.at("kind") != "fit") {
      throw ParseError("unsupported fit report schema");
    }
    FitReport out;
    FitResult& f = out.fit;
    const auto& model = doc.at("model");
    f.spec.kernel.family = parse_family(model.at("family").get<std::string>());
    f.spec.kernel.theta = model.at("vartheta").get<double>();
    f.spec.p = model.at("p").get<int>();
    f.spec.q = model.at("q").get<int>();
    f.spec.n_beta = model.at("n_beta").get<Eigen::Index>();
    f.spec.n_tau = model.at("n_tau").get<Eigen::Index>();
    f.spec.validate();

    const auto& data = doc.at("data");
    out.data.source = data.at("source").get<std::string>();
    out.data.path = data.at("path").get<std::string>();
    out.data.response = data.at("response").get<std::string>();
    out.data.median_columns = data.at("median_columns").get<std::vector<std::string>>();
    out.data.dispersion_columns = data.at("dispersion_columns").get<std::vector<std::string>>();
    out.data.median_intercept = data.at("median_intercept").get<bool>();
    out.data.dispersion_intercept = data.at("dispersion_intercept").get<bool>();
    out.data.centered = data.at("centered").get<bool>();
    out.data.trend = data.at("trend").get<std::string>();

    f.n_obs = doc.at("n_obs").get<Eigen::Index>();
    f.converged = doc.at("converged").get<bool>();
    f.information_ok = doc.at("information_ok").get<bool>();
    f.iterations = doc.at("iterations").get<int>();
    f.message = doc.at("message").get<std::string>();

    const auto& params = doc.at("parameters");
    const Eigen::Index d = f.spec.dim();
    if (static_cast<Eigen::Index>(params.size()) != d) throw ParseError("parameter count does not match the model");
    Eigen::VectorXd est(d);
    f.se.resize(d);
    f.p_values.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& p = params[static_cast<std::size_t>(i)];
      est[i] = read_number(p.at("estimate"));
      f.se[i] = read_number(p.at("se"));
      f.p_values[i] = read_number(p.at("p_value"));
    }
    f.theta_hat = ParamVector::from_flat(f.spec, est);

    const auto& ll = doc.at("loglik");
    f.loglik_full = read_number(ll.at("full"));
    f.loglik_kernel = read_number(ll.at("kernel"));
    f.loglik_log_scale = read_number(ll.at("log_scale"));
    f.aic = read_number(doc.at("aic"));
    f.bic = read_number(doc.at("bic"));
    f.rmse = read_number(doc.at("rmse"));
    f.gradient = read_array(doc.at("gradient"));
    f.hessian = read_matrix(doc.at("hessian"));
    const auto& fitted = doc.at("fitted");
    f.mu_hat = read_array(fitted.at("mu"));
    f.r_hat = read_array(fitted.at("r"));
    f.z_hat = read_array(fitted.at("z"));
    f.phi_hat = read_array(fitted.at("phi"));
    const Eigen::VectorXd trace = read_array(doc.at("trace"));
    f.trace.assign(trace.data(), trace.data() + trace.size());
    return out;
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("malformed fit report: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("malformed fit report: ") + e.what());
  }
}

std::string fit_to_text(const FitResult& fit) {
  const auto names = parameter_names(fit.spec);
  const Eigen::VectorXd est = fit.theta_hat.flat();
  std::ostringstream out;
  out << model_label(fit.spec) << "  n = " << fit.n_obs << " (" << fit.n_used() << " used)\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %26s %10s\n", "parameter", "estimate (SE)", "p-value");
  out << line;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double se = fit.se.size() > k ? fit.se[k] : kNaN;
    const double pv = fit.p_values.size() > k ? fit.p_values[k] : kNaN;
    const std::string cell = fmt("%.4f", est[k]) + " (" + fmt("%.4f", se) + ")";
    std::string pcell = "-";
    if (std::isfinite(pv)) pcell = pv < 1e-4 ? "<0.0001" : fmt("%.4f", pv);
    std::snprintf(line, sizeof line, "%-10s %26s %10s\n", names[i].c_str(), cell.c_str(), pcell.c_str());
    out << line;
  }
  out << "RMSE = " << fmt("%.4f", fit.rmse) << "  AIC = " << fmt("%.3f", fit.aic)
      << "  BIC = " << fmt("%.3f", fit.bic) << "\n";
  if (!fit.converged) out << "warning: " << fit.message << "\n";
  return out.str();
}

std::string mc_to_csv(const McResultTable& table) {
  std::ostringstream out;
  out << "parameter,n";
  for (double phi : table.config.phi_grid) {
    out << ",bias_phi_" << format_double(phi) << ",mse_phi_" << format_double(phi);
  }
  out << "\n";
  for (std::size_t j = 0; j < table.parameters.size(); ++j) {
    for (Eigen::Index n : table.config.n_grid) {
      out << table.parameters[j] << "," << n;
      for (double phi : table.config.phi_grid) {
        const McParamStat& s = table.cell(n, phi).stats[j];
        out << "," << format_double(s.bias) << "," << format_double(s.mse);
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string mc_to_json(const McResultTable& table) {
  const McConfig& c = table.config;
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "monte_carlo";
  doc["config"] = {{"family", std::string(family_name(c.family.family))},
                   {"vartheta", c.family.theta},
                   {"n_grid", c.n_grid},
                   {"phi_grid", c.phi_grid},
                   {"beta", array(c.true_theta.beta)},
                   {"kappa", array(c.true_theta.kappa)},
                   {"zeta", array(c.true_theta.zeta)},
                   {"replicates", c.replicates},
                   {"burnin", c.burnin},
                   {"covariate_rule", std::string(covariate_rule_name(c.covariate_rule))},
                   {"seed", c.seed},
                   {"common_random_numbers", c.common_random_numbers},
                   {"max_failure_rate", c.max_failure_rate}};
  ojson cells = ojson::array();
  for (const McCell& cell : table.cells) {
    ojson stats = ojson::array();
    for (const McParamStat& s : cell.stats) {
      stats.push_back({{"parameter", s.name},
                       {"truth", number(s.truth)},
                       {"bias", number(s.bias)},
                       {"mse", number(s.mse)},
                       {"bias_se", number(s.bias_se)},
                       {"mse_se", number(s.mse_se)}});
    }
    cells.push_back({{"n", cell.n},
                     {"phi", cell.phi},
                     {"used", cell.used},
                     {"failures", cell.failures},
                     {"failed", cell.failed},
                     {"stats", stats}});
  }
  doc["cells"] = cells;
  return doc.dump(2) + "\n";
}

TheoryReport make_theory_report(const ArmaPolynomials& poly, double phi, const KernelFamily& k,
                                Eigen::Index lags) {
  if (lags < 0) throw DomainError("theory: lags must be non-negative");
  TheoryReport r;
  r.poly = poly;
  r.family = k;
  r.phi = phi;
  r.lags = lags;
  r.stationarity = check_stationarity(poly);
  if (!r.stationarity.stationary) {
    throw NonStationaryError("AR polynomial has a root on or inside the unit circle");
  }
  const Eigen::Index K = std::max(truncation_order(poly), lags);
  r.moments = marginal_moments(poly, phi, k, K);
  return r;
}

std::string theory_to_json(const TheoryReport& r) {
  Eigen::VectorXd acov(r.lags + 1), acor(r.lags + 1);
  for (Eigen::Index h = 0; h <= r.lags; ++h) {
    acov[h] = r.moments.autocovariance(h);
    acor[h] = r.moments.autocorrelation(h);
  }
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "theory";
  doc["family"] = std::string(family_name(r.family.family));
  doc["vartheta"] = r.family.theta;
  doc["kappa"] = array(r.poly.kappa);
  doc["zeta"] = array(r.poly.zeta);
  doc["phi"] = r.phi;
  doc["stationary"] = r.stationarity.stationary;
  doc["invertible"] = r.stationarity.invertible;
  doc["ar_root_moduli"] = array(r.stationarity.ar_root_moduli);
  doc["ma_root_moduli"] = array(r.stationarity.ma_root_moduli);
  doc["xi_var"] = number(r.moments.xi_var);
  doc["truncation"] = r.moments.psi.size() - 1;
  doc["variance"] = number(r.moments.variance());
  doc["psi"] = array(r.moments.psi.head(std::min<Eigen::Index>(r.lags + 1, r.moments.psi.size())));
  doc["autocovariance"] = array(acov);
  doc["autocorrelation"] = array(acor);
  return doc.dump(2) + "\n";
}

std::string theory_to_csv(const TheoryReport& r) {
  std::ostringstream out;
  out << "lag,psi,autocovariance,autocorrelation\n";
  for (Eigen::Index h = 0; h <= r.lags; ++h) {
    const double psi = h < r.moments.psi.size() ? r.moments.psi[h] : 0.0;
    out << h << "," << format_double(psi) << "," << format_double(r.moments.autocovariance(h)) << ","
        << format_double(r.moments.autocorrelation(h)) << "\n";
  }
  return out.str();
}

std::string diagnostics_to_json(const ResidualReport& report) {
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "diagnostics";
  doc["n"] = report.rq.size();
  doc["ks_statistic"] = number(report.ks_stat);
  doc["ljung_box"] = {{"statistic", number(report.ljung_box.statistic)},
                      {"p_value", number(report.ljung_box.p_value)},
                      {"lag", report.ljung_box.lag},
                      {"dof", report.ljung_box.dof}};
  doc["acf"] = array(report.acf);
  doc["pacf"] = array(report.pacf);
  doc["quantile_residuals"] = array(report.rq);
  doc["envelope"] = {{"lower", array(report.envelope.lower)},
                     {"median", array(report.envelope.median)},
                     {"upper", array(report.envelope.upper)}};
  return doc.dump(2) + "\n";
}

std::string qq_to_csv(const ResidualReport& report) {
  const Eigen::Index n = report.rq.size();
  Eigen::VectorXd sorted = report.rq;
  std::sort(sorted.data(), sorted.data() + n);
  const bool has_env = report.envelope.lower.size() == n;
  std::ostringstream out;
  out << "index,rq,sorted_rq,normal_quantile,lower,median,upper\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pp = (static_cast<double>(i) + 0.625) / (static_cast<double>(n) + 0.25);
    out << i + 1 << "," << format_double(report.rq[i]) << "," << format_double(sorted[i]) << ","
        << format_double(special::normal_quantile(pp)) << ","
        << (has_env ? format_double(report.envelope.lower[i]) : "NA") << ","
        << (has_env ? format_double(report.envelope.median[i]) : "NA") << ","
        << (has_env ? format_double(report.envelope.upper[i]) : "NA") << "\n";
  }
  return out.str();
}

std::string acf_to_csv(const ResidualReport& report) {
  std::ostringstream out;
  out << "lag,acf,pacf\n";
  for (Eigen::Index k = 0; k < report.acf.size(); ++k) {
    out << k + 1 << "," << format_double(report.acf[k]) << ","
        << (k < report.pacf.size() ? format_double(report.pacf[k]) : "NA") << "\n";
  }
  return out.str();
}

}  // namespace logsym
