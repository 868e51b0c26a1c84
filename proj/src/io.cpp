#include "logsym/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace logsym {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
  if (text.empty() || text == "NA" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + text + "' as a number");
  }
  return value;
}

double median_of(Eigen::VectorXd x) {
  std::sort(x.data(), x.data() + x.size());
  const Eigen::Index n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

void check_close(const char* what, double got, double want, double tol) {
  if (std::abs(got - want) > tol) {
    std::ostringstream msg;
    msg << "mortality data: " << what << " is " << got << ", expected " << want;
    throw DomainError(msg.str());
  }
}

}  // namespace

Eigen::Index CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("column '" + name + "' not found in CSV header");
  return static_cast<Eigen::Index>(it - header.begin());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      values[j] = parse_number(cells[j], row, table.header[j]);
    }
    rows.push_back(std::move(values));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

Eigen::Index ColumnMapping::n_beta() const {
  return static_cast<Eigen::Index>(median_covariates.size()) + (median_intercept ? 1 : 0);
}

Eigen::Index ColumnMapping::n_tau() const {
  return static_cast<Eigen::Index>(dispersion_covariates.size()) + (dispersion_intercept ? 1 : 0);
}

TimeSeriesData to_series(const CsvTable& table, const ColumnMapping& mapping) {
  if (mapping.response.empty()) throw ConfigError("no response column given");
  if (mapping.n_beta() < 1 || mapping.n_tau() < 1) {
    throw ConfigError("median and dispersion designs each need at least one column");
  }
  const Eigen::Index n = table.values.rows();
  auto build = [&](const std::vector<std::string>& names, bool intercept) {
    Eigen::MatrixXd M(n, static_cast<Eigen::Index>(names.size()) + (intercept ? 1 : 0));
    Eigen::Index c = 0;
    if (intercept) M.col(c++).setOnes();
    for (const auto& name : names) M.col(c++) = table.values.col(table.column(name));
    return M;
  };
  const Eigen::Index ycol = table.column(mapping.response);
  Eigen::VectorXd y = table.values.col(ycol);
  Eigen::MatrixXd X = build(mapping.median_covariates, mapping.median_intercept);
  Eigen::MatrixXd W = build(mapping.dispersion_covariates, mapping.dispersion_intercept);

  for (Eigen::Index t = 0; t < n; ++t) {
    const std::string row = "row " + std::to_string(t + 1);
    if (std::isnan(y[t])) throw ParseError(row + ": missing value in column '" + mapping.response + "'");
    if (!(y[t] > 0) || !std::isfinite(y[t])) {
      throw DomainError(row + ": response '" + mapping.response + "' must be positive, got " +
                        std::to_string(y[t]));
    }
    if (!X.row(t).allFinite() || !W.row(t).allFinite()) {
      throw ParseError(row + ": missing or non-finite covariate value");
    }
  }
  return TimeSeriesData::make(std::move(y), std::move(X), std::move(W));
}

TimeSeriesData load_csv(const fs::path& path, const ColumnMapping& mapping) {
  return to_series(read_csv(path), mapping);
}

MortalityDataset load_mortality(const fs::path& path) {
  const CsvTable table = read_csv(path);
  MortalityDataset d;
  d.time = table.values.col(table.column("time"));
  d.cmort = table.values.col(table.column("cmort"));
  d.tempr = table.values.col(table.column("tempr"));
  d.part = table.values.col(table.column("part"));
  if (!d.time.allFinite() || !d.cmort.allFinite() || !d.tempr.allFinite() || !d.part.allFinite()) {
    throw ParseError("mortality data: missing values");
  }
  if (d.cmort.size() != 508) {
    throw LengthError("mortality data: expected 508 weeks, found " + std::to_string(d.cmort.size()));
  }
  check_close("min(cmort)", d.cmort.minCoeff(), 68.11, 5e-3);
  check_close("median(cmort)", median_of(d.cmort), 87.33, 5e-3);
  check_close("mean(cmort)", d.cmort.mean(), 88.699, 5e-4);
  check_close("max(cmort)", d.cmort.maxCoeff(), 132.04, 5e-3);
  return d;
}

TimeSeriesData build_mortality_design(const MortalityDataset& raw,
                                      const MortalityDesignOptions& options) {
  const Eigen::Index n = raw.cmort.size();
  Eigen::VectorXd temp = raw.tempr;
  if (options.centered) temp.array() -= temp.mean();
  Eigen::VectorXd trend(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    trend[t] = options.trend == TrendScale::CalendarYears
                   ? raw.time[0] + static_cast<double>(t) / 52.0
                   : static_cast<double>(t + 1);
  }
  Eigen::MatrixXd X(n, 5);
  X.col(0).setOnes();
  X.col(1) = trend;
  X.col(2) = temp;
  X.col(3) = temp.array().square().matrix();
  X.col(4) = raw.part;
  return TimeSeriesData::make(raw.cmort, std::move(X), Eigen::MatrixXd::Ones(n, 1));
}

std::optional<fs::path> bundled_mortality_path() {
  std::vector<fs::path> candidates;
  if (const char* dir = std::getenv("LOGSYM_DATA_DIR")) candidates.emplace_back(fs::path(dir) / "mortality.csv");
#ifdef LOGSYM_SOURCE_DIR
  candidates.emplace_back(fs::path(LOGSYM_SOURCE_DIR) / "data" / "mortality.csv");
#endif
  candidates.emplace_back(fs::path("data") / "mortality.csv");
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(c, ec)) return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

const std::set<std::string> kKnownKeys = {
    "command", "family", "vartheta", "vartheta_grid", "p", "q",
    "dataset", "data", "response", "median_covariates", "dispersion_covariates",
    "median_intercept", "dispersion_intercept", "centered", "trend",
    "output", "seed", "max_iter", "grad_tol", "restarts",
    "acf_lags", "ljung_box_lag", "envelope_replicates", "envelope_level", "envelope_refit",
    "n", "burnin", "covariate_rule", "covariates", "beta", "tau", "kappa", "zeta",
    "n_grid", "phi_grid", "replicates", "common_random_numbers", "max_failure_rate"};

template <typename T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

template <typename T>
void read_opt(const json& doc, const std::string& key, T& out) {
  if (doc.contains(key)) out = get_as<T>(doc, key);
}

Eigen::VectorXd read_vector(const json& doc, const std::string& key) {
  const auto v = get_as<std::vector<double>>(doc, key);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

ModelSpec RunConfig::spec() const {
  ModelSpec s;
  s.kernel = family;
  if (command == "simulate" || command == "mc") {
    s.p = static_cast<int>(theta.kappa.size());
    s.q = static_cast<int>(theta.zeta.size());
    s.n_beta = theta.beta.size();
    s.n_tau = theta.tau.size();
    return s;
  }
  s.p = p;
  s.q = q;
  if (source == DataSource::Mortality) {
    s.n_beta = 5;
    s.n_tau = 1;
  } else {
    s.n_beta = columns.n_beta();
    s.n_tau = columns.n_tau();
  }
  return s;
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }

  RunConfig c;
  read_opt(doc, "command", c.command);
  if (doc.contains("family")) c.family.family = parse_family(get_as<std::string>(doc, "family"));
  if (c.family.family == Family::LogStudentT) c.family.theta = 4.0;
  if (c.family.family == Family::LogPowerExponential) c.family.theta = 0.5;
  read_opt(doc, "vartheta", c.family.theta);
  read_opt(doc, "vartheta_grid", c.vartheta_grid);
  read_opt(doc, "p", c.p);
  read_opt(doc, "q", c.q);
  if (c.p < 0 || c.q < 0) throw ConfigError("p and q must be non-negative");

  const std::string dataset = doc.value("dataset", std::string("csv"));
  if (dataset == "csv") {
    c.source = DataSource::Csv;
  } else if (dataset == "mortality") {
    c.source = DataSource::Mortality;
  } else {
    throw ConfigError("dataset must be 'csv' or 'mortality'");
  }
  if (doc.contains("data")) c.data = resolve(base_dir, get_as<std::string>(doc, "data"));
  read_opt(doc, "response", c.columns.response);
  read_opt(doc, "median_covariates", c.columns.median_covariates);
  read_opt(doc, "dispersion_covariates", c.columns.dispersion_covariates);
  read_opt(doc, "median_intercept", c.columns.median_intercept);
  read_opt(doc, "dispersion_intercept", c.columns.dispersion_intercept);
  read_opt(doc, "centered", c.mortality.centered);
  if (doc.contains("trend")) {
    const auto trend = get_as<std::string>(doc, "trend");
    if (trend == "years") {
      c.mortality.trend = TrendScale::CalendarYears;
    } else if (trend == "weeks") {
      c.mortality.trend = TrendScale::WeekIndex;
    } else {
      throw ConfigError("trend must be 'years' or 'weeks'");
    }
  }

  if (doc.contains("output")) c.output = resolve(base_dir, get_as<std::string>(doc, "output"));
  read_opt(doc, "seed", c.seed);
  read_opt(doc, "max_iter", c.fit.max_iter);
  read_opt(doc, "grad_tol", c.fit.grad_tol);
  read_opt(doc, "restarts", c.fit.restarts);
  read_opt(doc, "acf_lags", c.report.max_lag);
  read_opt(doc, "ljung_box_lag", c.report.ljung_box_lag);
  read_opt(doc, "envelope_replicates", c.report.envelope.replicates);
  read_opt(doc, "envelope_level", c.report.envelope.level);
  read_opt(doc, "envelope_refit", c.report.envelope.refit);
  if (c.fit.max_iter < 1 || !(c.fit.grad_tol > 0)) throw ConfigError("max_iter and grad_tol must be positive");
  if (c.report.max_lag < 1 || c.report.ljung_box_lag < 1) throw ConfigError("lags must be at least 1");
  if (c.report.envelope.replicates < 0) throw ConfigError("envelope_replicates must be non-negative");

  read_opt(doc, "n", c.n);
  read_opt(doc, "burnin", c.burnin);
  if (doc.contains("covariate_rule")) {
    try {
      c.covariate_rule = parse_covariate_rule(get_as<std::string>(doc, "covariate_rule"));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("covariates")) c.covariates = resolve(base_dir, get_as<std::string>(doc, "covariates"));
  c.theta.beta = doc.contains("beta") ? read_vector(doc, "beta") : Eigen::VectorXd::Zero(1);
  c.theta.tau = doc.contains("tau") ? read_vector(doc, "tau") : Eigen::VectorXd::Zero(1);
  c.theta.kappa = doc.contains("kappa") ? read_vector(doc, "kappa") : Eigen::VectorXd(0);
  c.theta.zeta = doc.contains("zeta") ? read_vector(doc, "zeta") : Eigen::VectorXd(0);
  read_opt(doc, "n_grid", c.n_grid);
  read_opt(doc, "phi_grid", c.phi_grid);
  read_opt(doc, "replicates", c.replicates);
  read_opt(doc, "common_random_numbers", c.common_random_numbers);
  read_opt(doc, "max_failure_rate", c.max_failure_rate);
  if (c.n < 1 || c.burnin < 0) throw ConfigError("n must be positive and burnin non-negative");

  try {
    c.spec().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_text_file(path), path.parent_path());
}

TimeSeriesData load_config_data(const RunConfig& config) {
  if (config.source == DataSource::Mortality) {
    fs::path path = config.data;
    if (path.empty()) {
      const auto bundled = bundled_mortality_path();
      if (!bundled) throw IoError("bundled mortality data not found; set 'data' in the config");
      path = *bundled;
    }
    return build_mortality_design(load_mortality(path), config.mortality);
  }
  if (config.data.empty()) throw ConfigError("config needs a 'data' path");
  return load_csv(config.data, config.columns);
}

Eigen::MatrixXd load_covariate_matrix(const fs::path& path) {
  const CsvTable table = read_csv(path);
  if (!table.values.allFinite()) throw ParseError("covariate file has missing values");
  return table.values;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace logsym
