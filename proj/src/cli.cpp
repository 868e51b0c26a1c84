#include "logsym/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "logsym/io.hpp"
#include "logsym/report.hpp"

namespace logsym::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
};

fs::path output_dir(const std::string& flag, const fs::path& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("LOGSYM_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

RunConfig load_config(const Common& c, const std::string& command) {
  RunConfig cfg = load_run_config(c.config);
  if (!cfg.command.empty() && cfg.command != command) {
    throw ConfigError("config is for '" + cfg.command + "', not '" + command + "'");
  }
  cfg.command = command;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

DataLabel label_for(const RunConfig& cfg) {
  DataLabel label;
  if (cfg.source == DataSource::Mortality) {
    label.source = "mortality";
    label.path = cfg.data.string();
    label.response = "cmort";
    const std::string temp = cfg.mortality.centered ? "tempc" : "tempr";
    label.median_columns = {"trend", temp, temp + "2", "part"};
    label.centered = cfg.mortality.centered;
    label.trend = cfg.mortality.trend == TrendScale::CalendarYears ? "years" : "weeks";
  } else {
    label.source = "csv";
    label.path = cfg.data.string();
    label.response = cfg.columns.response;
    label.median_columns = cfg.columns.median_covariates;
    label.dispersion_columns = cfg.columns.dispersion_covariates;
    label.median_intercept = cfg.columns.median_intercept;
    label.dispersion_intercept = cfg.columns.dispersion_intercept;
  }
  return label;
}

std::string profile_to_csv(const ProfileResult& profile) {
  std::ostringstream out;
  out << "vartheta,loglik_full,ok\n";
  for (const auto& row : profile.rows) {
    out << format_double(row.theta) << "," << format_double(row.loglik_full) << ","
        << (row.ok ? 1 : 0) << "\n";
  }
  return out.str();
}

int cmd_fit(const Common& c, std::ostream& out) {
  RunConfig cfg = load_config(c, "fit");
  const fs::path dir = output_dir(c.output, cfg.output);
  const TimeSeriesData data = load_config_data(cfg);
  ModelSpec spec = cfg.spec();
  FitOptions opts = cfg.fit;
  opts.seed = cfg.seed;

  if (!cfg.vartheta_grid.empty()) {
    const ProfileResult profile = profile_theta(spec, data, cfg.vartheta_grid, opts);
    spec.kernel.theta = profile.best_theta;
    write_text_file(dir / "profile.csv", profile_to_csv(profile));
  }
  const FitResult result = fit(spec, data, opts);
  const std::string text = fit_to_text(result);
  write_text_file(dir / "fit.json", fit_to_json(result, label_for(cfg)));
  write_text_file(dir / "fit.txt", text);
  out << text;
  if (!result.converged) throw ConvergenceError("fit did not converge: " + result.message);
  return 0;
}

std::string series_to_csv(const TimeSeriesData& data) {
  std::ostringstream out;
  out << "y";
  for (Eigen::Index j = 1; j < data.X.cols(); ++j) out << ",x" << j;
  for (Eigen::Index j = 1; j < data.W.cols(); ++j) out << ",w" << j;
  out << "\n";
  for (Eigen::Index t = 0; t < data.size(); ++t) {
    out << format_double(data.y[t]);
    for (Eigen::Index j = 1; j < data.X.cols(); ++j) out << "," << format_double(data.X(t, j));
    for (Eigen::Index j = 1; j < data.W.cols(); ++j) out << "," << format_double(data.W(t, j));
    out << "\n";
  }
  return out.str();
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const RunConfig cfg = load_config(c, "simulate");
  const fs::path dir = output_dir(c.output, cfg.output);
  const Eigen::MatrixXd covariates =
      cfg.covariate_rule == CovariateRule::FromFile ? load_covariate_matrix(cfg.covariates)
                                                    : Eigen::MatrixXd();
  const TimeSeriesData data = generate_dataset(cfg.spec(), cfg.theta, cfg.n, cfg.covariate_rule,
                                               cfg.burnin, cfg.seed, covariates);
  write_text_file(dir / "simulated.csv", series_to_csv(data));
  out << "simulated " << data.size() << " observations to " << (dir / "simulated.csv").string()
      << "\n";
  return 0;
}

int cmd_mc(const Common& c, std::ostream& out) {
  const RunConfig cfg = load_config(c, "mc");
  const fs::path dir = output_dir(c.output, cfg.output);
  McConfig mc;
  mc.family = cfg.family;
  mc.n_grid = cfg.n_grid;
  mc.phi_grid = cfg.phi_grid;
  mc.true_theta = cfg.theta;
  mc.replicates = cfg.replicates;
  mc.burnin = cfg.burnin;
  mc.covariate_rule = cfg.covariate_rule;
  if (cfg.covariate_rule == CovariateRule::FromFile) mc.covariates = load_covariate_matrix(cfg.covariates);
  mc.seed = cfg.seed;
  mc.common_random_numbers = cfg.common_random_numbers;
  mc.max_failure_rate = cfg.max_failure_rate;
  mc.fit = cfg.fit;
  if (mc.true_theta.tau.size() != 1) throw ConfigError("mc: tau must have exactly one entry");
  try {
    mc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const McResultTable table = run_monte_carlo(mc);
  const std::string csv = mc_to_csv(table);
  write_text_file(dir / "mc.csv", csv);
  write_text_file(dir / "mc.json", mc_to_json(table));
  out << csv;
  const bool any_failed = std::any_of(table.cells.begin(), table.cells.end(),
                                      [](const McCell& cell) { return cell.failed; });
  if (any_failed) throw ConvergenceError("one or more Monte Carlo cells exceeded the failure threshold");
  return 0;
}

TimeSeriesData load_for_report(const DataLabel& label, const std::string& path) {
  if (label.source == "mortality") {
    MortalityDesignOptions opts;
    opts.centered = label.centered;
    opts.trend = label.trend == "weeks" ? TrendScale::WeekIndex : TrendScale::CalendarYears;
    return build_mortality_design(load_mortality(path), opts);
  }
  ColumnMapping mapping;
  mapping.response = label.response;
  mapping.median_covariates = label.median_columns;
  mapping.dispersion_covariates = label.dispersion_columns;
  mapping.median_intercept = label.median_intercept;
  mapping.dispersion_intercept = label.dispersion_intercept;
  return load_csv(path, mapping);
}

struct DiagnoseArgs {
  std::string fit;
  std::string data;
  Eigen::Index lags = 20;
  Eigen::Index ljung_box_lag = 20;
  int envelope = 100;
  double level = 0.95;
  bool refit = false;
};

int cmd_diagnose(const Common& c, const DiagnoseArgs& a, std::ostream& out) {
  const fs::path dir = output_dir(c.output, {});
  const FitReport report = fit_from_json(read_text_file(a.fit));
  const TimeSeriesData data = load_for_report(report.data, a.data);
  if (data.size() != report.fit.n_obs) {
    throw LengthError("data has " + std::to_string(data.size()) + " rows but the fit used " +
                      std::to_string(report.fit.n_obs));
  }
  ReportOptions opts;
  opts.max_lag = a.lags;
  opts.ljung_box_lag = a.ljung_box_lag;
  opts.envelope.replicates = a.envelope;
  opts.envelope.level = a.level;
  opts.envelope.refit = a.refit;
  opts.envelope.seed = c.seed.value_or(1);
  const ResidualReport rep = residual_report(report.fit, data, opts);
  write_text_file(dir / "diagnostics.json", diagnostics_to_json(rep));
  write_text_file(dir / "qq.csv", qq_to_csv(rep));
  write_text_file(dir / "acf.csv", acf_to_csv(rep));
  out << "ljung_box(" << rep.ljung_box.lag << ") = " << format_double(rep.ljung_box.statistic)
      << "  p = " << format_double(rep.ljung_box.p_value)
      << "  ks = " << format_double(rep.ks_stat) << "\n";
  return 0;
}

struct TheoryArgs {
  std::vector<double> kappa;
  std::vector<double> zeta;
  double phi = 1.0;
  Eigen::Index lags = 10;
  std::string family = "lognormal";
  std::optional<double> vartheta;
};

int cmd_theory(const Common& c, const TheoryArgs& a, std::ostream& out) {
  const fs::path dir = output_dir(c.output, {});
  KernelFamily k;
  k.family = parse_family(a.family);
  if (k.family == Family::LogStudentT) k.theta = 4.0;
  if (k.family == Family::LogPowerExponential) k.theta = 0.5;
  if (a.vartheta) k.theta = *a.vartheta;
  validate(k);
  if (!(a.phi > 0)) throw DomainError("phi must be positive");
  ArmaPolynomials poly;
  poly.kappa = Eigen::Map<const Eigen::VectorXd>(a.kappa.data(), static_cast<Eigen::Index>(a.kappa.size()));
  poly.zeta = Eigen::Map<const Eigen::VectorXd>(a.zeta.data(), static_cast<Eigen::Index>(a.zeta.size()));
  const TheoryReport report = make_theory_report(poly, a.phi, k, a.lags);
  const std::string csv = theory_to_csv(report);
  write_text_file(dir / "theory.json", theory_to_json(report));
  write_text_file(dir / "theory.csv", csv);
  out << csv;
  return 0;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Log-symmetric ARMAX models: fitting, simulation and diagnostics", "logsym"};
  app.require_subcommand(1, 1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "JSON run configuration")->required();
    sub->add_option("--output", common.output, "output directory");
    sub->add_option("--seed", common.seed, "random seed (overrides the config)");
  };

  auto* fit_cmd = app.add_subcommand("fit", "fit a model to data");
  add_common(fit_cmd, true);
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a series");
  add_common(sim_cmd, true);
  auto* mc_cmd = app.add_subcommand("mc", "run a Monte Carlo bias / MSE study");
  add_common(mc_cmd, true);

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "residual diagnostics for a saved fit");
  add_common(diag_cmd, false);
  diag_cmd->add_option("--fit", diag.fit, "fit.json from the fit command")->required();
  diag_cmd->add_option("--data", diag.data, "CSV data used for the fit")->required();
  diag_cmd->add_option("--lags", diag.lags, "ACF / PACF lags")->capture_default_str();
  diag_cmd->add_option("--ljung-box-lag", diag.ljung_box_lag)->capture_default_str();
  diag_cmd->add_option("--envelope", diag.envelope, "envelope replicates (0 disables)")->capture_default_str();
  diag_cmd->add_option("--level", diag.level, "envelope coverage")->capture_default_str();
  diag_cmd->add_flag("--refit", diag.refit, "refit each envelope replicate");

  TheoryArgs theory;
  auto* theory_cmd = app.add_subcommand("theory", "psi-weights and marginal moments");
  add_common(theory_cmd, false);
  theory_cmd->add_option("--kappa", theory.kappa, "AR coefficients")->delimiter(',');
  theory_cmd->add_option("--zeta", theory.zeta, "MA coefficients")->delimiter(',');
  theory_cmd->add_option("--phi", theory.phi)->capture_default_str();
  theory_cmd->add_option("--lags", theory.lags)->capture_default_str();
  theory_cmd->add_option("--family", theory.family)->capture_default_str();
  theory_cmd->add_option("--vartheta", theory.vartheta, "kernel shape");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(common, out);
    if (sim_cmd->parsed()) return cmd_simulate(common, out);
    if (mc_cmd->parsed()) return cmd_mc(common, out);
    if (diag_cmd->parsed()) return cmd_diagnose(common, diag, out);
    return cmd_theory(common, theory, out);
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
  }
  return 1;
}

}  // namespace logsym::cli
