// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code
// is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <CLI11.hpp>

#include "../oracles.hpp"
#include "logsym/cli.hpp"
#include "logsym/diagnostics.hpp"
#include "logsym/io.hpp"
#include "logsym/parallel.hpp"
#include "logsym/simulation.hpp"
#include "logsym/theory.hpp"

using namespace logsym;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. analytic score against long-double central differences

Outcome gradient_correctness() {
  constexpr double kTol = 1e-6;
  const std::vector<KernelFamily> families{KernelFamily::log_normal(), KernelFamily::log_t(4.0),
                                           KernelFamily::log_pe(0.5)};
  std::mt19937_64 rng(20240901);
  std::uniform_int_distribution<int> order(0, 2);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (; cases < 100; ++cases) {
    ModelSpec spec;
    spec.kernel = families[cases % 3];
    spec.p = order(rng);
    spec.q = order(rng);
    spec.n_beta = 2;
    spec.n_tau = cases % 2 == 0 ? 1 : 2;
    ParamVector th = ParamVector::zeros(spec);
    th.beta << U(rng), U(rng);
    th.tau[0] = 0.5 * U(rng) - 0.5;
    if (spec.n_tau > 1) th.tau[1] = 0.3 * U(rng);
    // coefficients shrunk so the AR and MA polynomials stay well inside
    for (int i = 0; i < spec.p; ++i) th.kappa[i] = 0.45 * U(rng);
    for (int j = 0; j < spec.q; ++j) th.zeta[j] = 0.45 * U(rng);
    const auto data = generate_dataset(spec, th, 50, CovariateRule::IidStandardNormal, 20, rng());
    // evaluate away from the generating point so the score is not near zero
    Eigen::VectorXd flat = th.flat();
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] += 0.1 * U(rng);
    const ParamVector at = ParamVector::from_flat(spec, flat);
    const double err =
        logsym::testing::max_relative_error(score(spec, at, data), logsym::testing::fd_gradient(spec, at, data));
    worst = std::max(worst, err);
  }
  return {worst < kTol, fmt("max relative error %.2e over %d cases (limit %.0e)", worst, cases, kTol)};
}

// ---------------------------------------------------------------------------
// 2. full density integrates to one

Outcome kernel_normalization() {
  constexpr double kTol = 1e-6;
  const std::vector<double> lambdas{0.3, 1.0, 5.0, 40.0};
  const std::vector<double> phis{0.05, 1.0, 3.0};
  const std::vector<KernelFamily> families{
      KernelFamily::log_normal(), KernelFamily::log_t(1.0),   KernelFamily::log_t(4.0),
      KernelFamily::log_t(30.0),  KernelFamily::log_pe(-0.5), KernelFamily::log_pe(0.0),
      KernelFamily::log_pe(0.5),  KernelFamily::log_pe(1.0)};
  boost::math::quadrature::tanh_sinh<double> quad;
  double worst = 0.0;
  int lognormal = 0, logt = 0, logpe = 0;
  for (const auto& k : families) {
    for (double lambda : lambdas) {
      for (double phi : phis) {
        // integrate over v = log y on a window that keeps exp(v) finite, then
        // add the Student-t tail mass beyond it
        const double c = std::log(lambda);
        const double width = 700.0;
        auto f = [&](double v) { return std::exp(log_pdf(std::exp(v), lambda, phi, k) + v); };
        double total = quad.integrate(f, c - width, c, 1e-13) + quad.integrate(f, c, c + width, 1e-13);
        if (k.family == Family::LogStudentT) {
          total += 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(k.theta),
                                                                width / std::sqrt(phi)));
        }
        worst = std::max(worst, std::abs(total - 1.0));
        switch (k.family) {
          case Family::LogNormal: ++lognormal; break;
          case Family::LogStudentT: ++logt; break;
          case Family::LogPowerExponential: ++logpe; break;
        }
      }
    }
  }
  const int fewest = std::min({lognormal, logt, logpe});
  return {worst < kTol && fewest >= 12,
          fmt("max |integral - 1| = %.2e; grid points LogN %d, Log-t %d, LogPE %d", worst, lognormal, logt, logpe)};
}

// ---------------------------------------------------------------------------
// 3. marginal moments against one long simulated path

Outcome theory_vs_simulation() {
  constexpr double kRho1 = 0.73241;
  constexpr double kRhoTol = 0.02;
  constexpr double kSeMultiple = 3.0;
  ModelSpec spec;
  spec.p = 1;
  spec.q = 1;
  spec.n_beta = 2;
  ParamVector th = ParamVector::zeros(spec);
  th.beta << 1.0, 0.7;
  th.kappa << 0.6;
  th.zeta << 0.3;
  const Eigen::Index n = 100000;
  const auto data = generate_dataset(spec, th, n, CovariateRule::IidStandardNormal, 500, 31337);

  // detrend by least squares on the design
  const Eigen::VectorXd b = data.X.colPivHouseholderQr().solve(data.v);
  const Eigen::VectorXd w = data.v - data.X * b;
  const Eigen::VectorXd d = w.array() - w.mean();
  const double var = d.squaredNorm() / double(n);
  const double rho1 = d.head(n - 1).dot(d.tail(n - 1)) / d.squaredNorm();

  ArmaPolynomials poly{th.kappa, th.zeta};
  const auto m = marginal_moments(poly, 1.0, spec.kernel);
  // Bartlett: Var(sample variance) ~ (2 / n) sum_h gamma_h^2 for a Gaussian linear process
  double s = m.autocovariance(0) * m.autocovariance(0);
  for (Eigen::Index h = 1; h < 400; ++h) s += 2 * m.autocovariance(h) * m.autocovariance(h);
  const double se = std::sqrt(2.0 * s / double(n));
  const double z = (var - m.variance()) / se;
  const bool ok = std::abs(z) <= kSeMultiple && std::abs(rho1 - kRho1) <= kRhoTol;
  return {ok, fmt("variance %.4f vs %.4f (%.2f MC SE); lag-1 acf %.4f vs %.5f", var, m.variance(), z, rho1, kRho1)};
}

// ---------------------------------------------------------------------------
// 4. Monte Carlo bias / MSE table, log-normal, phi = 1

Outcome monte_carlo() {
  // published desk values at n = 100, 300, 500
  const double published_bias_kappa[] = {-0.0394, -0.0156, -0.0077};
  const double published_mse_phi[] = {0.0218, 0.0070, 0.0041};
  constexpr double kSeMultiple = 2.0;
  constexpr double kMseRel = 0.30;

  McConfig cfg;
  cfg.family = KernelFamily::log_normal();
  cfg.n_grid = {100, 300, 500};
  cfg.phi_grid = {1.0};
  cfg.true_theta.beta = Eigen::Vector2d(1.0, 0.7);
  cfg.true_theta.tau = Eigen::VectorXd::Zero(1);
  cfg.true_theta.kappa = Eigen::VectorXd::Constant(1, 0.6);
  cfg.true_theta.zeta = Eigen::VectorXd::Constant(1, 0.3);
  cfg.replicates = 500;
  cfg.seed = 2024;
  const McResultTable t = run_monte_carlo(cfg);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(t.parameters.begin(), t.parameters.end(), name) - t.parameters.begin());
  };
  const std::size_t ik = col("kappa1"), iphi = col("phi");

  bool ok = true;
  std::ostringstream why;
  for (std::size_t i = 0; i < 3; ++i) {
    const McCell& c = t.cell(cfg.n_grid[i], 1.0);
    const McParamStat& k = c.stats[ik];
    const McParamStat& p = c.stats[iphi];
    const bool bias_ok = std::abs(k.bias - published_bias_kappa[i]) <= kSeMultiple * k.bias_se;
    const bool mse_ok = std::abs(p.mse - published_mse_phi[i]) <= kMseRel * published_mse_phi[i];
    ok = ok && bias_ok && mse_ok && !c.failed;
    why << fmt("n=%ld bias(kappa1) %.4f+-%.4f vs %.4f%s, mse(phi) %.4f vs %.4f%s; ", long(c.n), k.bias,
               kSeMultiple * k.bias_se, published_bias_kappa[i], bias_ok ? "" : " [out]", p.mse, published_mse_phi[i],
               mse_ok ? "" : " [out]");
  }
  // Exact decrease for the reproduced quantities and every MSE; the other
  // near-zero biases are compared with a two-SE slack.
  bool monotone = true;
  for (std::size_t j = 0; j < t.parameters.size(); ++j) {
    for (std::size_t i = 1; i < 3; ++i) {
      const McParamStat& a = t.cell(cfg.n_grid[i - 1], 1.0).stats[j];
      const McParamStat& b = t.cell(cfg.n_grid[i], 1.0).stats[j];
      if (!(b.mse < a.mse)) monotone = false;
      const double slack = (j == ik) ? 0.0 : kSeMultiple * std::hypot(a.bias_se, b.bias_se);
      if (std::abs(b.bias) > std::abs(a.bias) + slack) monotone = false;
    }
  }
  why << (monotone ? "monotone decrease holds" : "monotone decrease violated");
  return {ok && monotone, why.str()};
}

// ---------------------------------------------------------------------------
// 5. mortality case study

Outcome mortality() {
  const auto path = bundled_mortality_path();
  if (!path) return {true, "warning: bundled mortality data not found, criterion skipped", true};
  const TimeSeriesData data = build_mortality_design(load_mortality(*path));

  // published estimates and SEs; "<0.0001" is taken as 0.0001
  const double beta_static[] = {35.4616, -0.0157, -0.0051, 0.0002, 0.0027};
  const double se_static[] = {2.1630, 0.0011, 0.0003, 0.0001, 0.0002};
  constexpr double kLogPhiStatic = -5.3412;
  constexpr double kLogPhiTol = 0.1;
  const double kappa_published[] = {0.4050, 0.2789};
  const double kappa_se[] = {0.0441, 0.0452};
  constexpr double kAicStatic = -1259.696;
  constexpr double kAicArmax = -1487.895;
  constexpr double kGapRel = 0.10;
  // published values are rounded to four decimals
  constexpr double kRounding = 0.00005;

  ModelSpec s0;
  s0.n_beta = 5;
  ModelSpec s2 = s0;
  s2.p = 2;
  const FitResult f0 = fit(s0, data);
  const FitResult f2 = fit(s2, data);
  if (!f0.converged || !f2.converged) return {false, "a mortality fit did not converge"};

  std::ostringstream why;
  bool beta_ok = true;
  for (int j = 0; j < 5; ++j) {
    const double diff = std::abs(f0.theta_hat.beta[j] - beta_static[j]);
    if (diff > 2 * se_static[j] + kRounding) beta_ok = false;
  }
  const bool phi_ok = std::abs(f0.theta_hat.tau[0] - kLogPhiStatic) <= kLogPhiTol;
  why << fmt("static beta within 2 SE: %s, log phi %.4f vs %.4f; ", beta_ok ? "yes" : "no", f0.theta_hat.tau[0],
             kLogPhiStatic);

  bool kappa_ok = true;
  for (int i = 0; i < 2; ++i) {
    const double lo = kappa_published[i] - 2 * kappa_se[i], hi = kappa_published[i] + 2 * kappa_se[i];
    const double k = f2.theta_hat.kappa[i];
    const bool in = k >= lo - kRounding && k <= hi + kRounding;
    kappa_ok = kappa_ok && in;
    why << fmt("kappa%d %.4f in [%.4f, %.4f]: %s; ", i + 1, k, lo, hi, in ? "yes" : "no");
  }

  // The published AIC values are on the log-response scale.
  auto aic_log = [](const FitResult& f) { return -2 * f.loglik_log_scale + 2 * double(f.spec.dim()); };
  const double a0 = aic_log(f0), a2 = aic_log(f2);
  const double gap = a2 - a0, published_gap = kAicArmax - kAicStatic;
  const bool order_ok = a2 < a0;
  const bool gap_ok = std::abs(gap - published_gap) <= kGapRel * std::abs(published_gap);
  why << fmt("AIC %.3f vs %.3f (published %.3f vs %.3f); gap %.2f vs %.2f (%.1f%%)", a2, a0, kAicArmax,
             kAicStatic, gap, published_gap, 100 * std::abs(gap - published_gap) / std::abs(published_gap));
  return {beta_ok && phi_ok && kappa_ok && order_ok && gap_ok, why.str()};
}

// ---------------------------------------------------------------------------
// 6. Ljung-Box contrast between the dynamic and the static fit

Outcome residual_whiteness() {
  constexpr int kReplicates = 200;
  constexpr double kLevel = 0.01;
  constexpr double kShare = 0.95;
  constexpr Eigen::Index kLag = 20;
  ModelSpec truth_spec;
  truth_spec.p = 2;
  truth_spec.n_beta = 2;
  ParamVector th = ParamVector::zeros(truth_spec);
  th.beta << 1.0, 0.7;
  th.kappa << 0.405, 0.2789;
  ModelSpec static_spec = truth_spec;
  static_spec.p = 0;

  std::vector<int> white(kReplicates, 0), flagged(kReplicates, 0), failed(kReplicates, 0);
  parallel_for(kReplicates, [&](std::size_t r) {
    const auto data = generate_dataset(truth_spec, th, 500, CovariateRule::IidStandardNormal, 200,
                                       derive_seed(606, r));
    const FitResult dyn = fit(truth_spec, data);
    const FitResult stat = fit(static_spec, data);
    if (!dyn.converged || !stat.converged) {
      failed[r] = 1;
      return;
    }
    white[r] = ljung_box(quantile_residuals(dyn, data), kLag, truth_spec.p).p_value > kLevel;
    flagged[r] = ljung_box(quantile_residuals(stat, data), kLag).p_value < kLevel;
  });
  const int nf = std::accumulate(failed.begin(), failed.end(), 0);
  const int nw = std::accumulate(white.begin(), white.end(), 0);
  const int ns = std::accumulate(flagged.begin(), flagged.end(), 0);
  const int used = kReplicates - nf;
  const bool ok = used > 0 && nw >= kShare * used && ns >= kShare * used;
  return {ok, fmt("ARMAX(2,0) residuals white in %d/%d, static residuals rejected in %d/%d (%d failed fits)", nw,
                  used, ns, used, nf)};
}

// ---------------------------------------------------------------------------
// 7. Wald interval coverage

Outcome wald_coverage() {
  constexpr int kReplicates = 1000;
  constexpr double kLo = 0.90, kHi = 0.98;
  constexpr double kZ = 1.959963984540054;
  ModelSpec spec;
  spec.p = 1;
  spec.q = 1;
  spec.n_beta = 2;
  ParamVector th = ParamVector::zeros(spec);
  th.beta << 1.0, 0.7;
  th.kappa << 0.6;
  th.zeta << 0.3;
  // beta0, beta1, kappa1, zeta1 in the flat layout
  const std::vector<Eigen::Index> idx{0, 1, 3, 4};
  const Eigen::VectorXd truth = th.flat();

  Eigen::MatrixXi covered = Eigen::MatrixXi::Zero(kReplicates, 4);
  std::vector<int> usable(kReplicates, 0);
  parallel_for(kReplicates, [&](std::size_t r) {
    const auto data = generate_dataset(spec, th, 500, CovariateRule::IidStandardNormal, 200, derive_seed(707, r));
    const FitResult f = fit(spec, data);
    if (!f.converged || !f.information_ok) return;
    usable[r] = 1;
    const Eigen::VectorXd est = f.theta_hat.flat();
    for (int j = 0; j < 4; ++j) {
      const Eigen::Index i = idx[j];
      covered(Eigen::Index(r), j) = std::abs(est[i] - truth[i]) <= kZ * f.se[i];
    }
  });
  const int used = std::accumulate(usable.begin(), usable.end(), 0);
  const char* names[] = {"beta0", "beta1", "kappa1", "zeta1"};
  bool ok = used > 0;
  std::ostringstream why;
  for (int j = 0; j < 4; ++j) {
    const double c = double(covered.col(j).sum()) / std::max(used, 1);
    ok = ok && c >= kLo && c <= kHi;
    why << fmt("%s %.1f%% ", names[j], 100 * c);
  }
  why << fmt("over %d usable fits", used);
  return {ok, why.str()};
}

// ---------------------------------------------------------------------------
// 8. byte-identical outputs on re-runs

std::string read_all(const fs::path& dir) {
  std::string out;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) out += fs::relative(p, dir).string() + "\n" + read_text_file(p);
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "logsym_acceptance_determinism";
  fs::remove_all(root);
  write_text_file(root / "sim.json", R"({"command": "simulate", "family": "logt", "vartheta": 4,
    "beta": [1.0, 0.7], "tau": [0.0], "kappa": [0.6], "zeta": [0.3], "n": 300, "seed": 5})");
  write_text_file(root / "fit.json", R"({"command": "fit", "family": "logt", "vartheta": 4, "p": 1, "q": 1,
    "data": "a/sim/simulated.csv", "response": "y", "median_covariates": ["x1"]})");
  write_text_file(root / "mc.json", R"({"command": "mc", "family": "logpe", "vartheta": 0.5,
    "beta": [1.0, 0.7], "tau": [0.0], "kappa": [0.6], "zeta": [0.3], "n_grid": [100, 200],
    "phi_grid": [0.5, 1.0], "replicates": 20, "seed": 9})");

  auto run_all = [&](const std::string& tag) {
    const fs::path d = root / tag;
    std::ostringstream out, err;
    int bad = 0;
    auto call = [&](std::vector<std::string> args) { bad += cli::run(args, out, err) != 0; };
    call({"simulate", "--config", (root / "sim.json").string(), "--output", (d / "sim").string()});
    // both runs fit the first run's series so the inputs are identical
    call({"fit", "--config", (root / "fit.json").string(), "--output", (d / "fit").string()});
    call({"diagnose", "--fit", (d / "fit" / "fit.json").string(), "--data",
          (root / "a" / "sim" / "simulated.csv").string(), "--envelope", "39", "--seed", "3", "--output",
          (d / "diag").string()});
    call({"theory", "--kappa", "0.5,0.2", "--zeta", "0.4", "--family", "logt", "--output", (d / "theory").string()});
    call({"mc", "--config", (root / "mc.json").string(), "--output", (d / "mc").string()});
    // stdout echoes the output directory, which differs by run tag
    std::string text = out.str();
    for (std::size_t at; (at = text.find(d.string())) != std::string::npos;) text.replace(at, d.string().size(), "<out>");
    return std::pair{bad, read_all(d) + text};
  };
  const auto [bad_a, a] = run_all("a");
  const auto [bad_b, b] = run_all("b");
  const bool same = a == b;
  return {bad_a == 0 && bad_b == 0 && same,
          fmt("%d + %d failed commands; outputs %s (%zu bytes)", bad_a, bad_b, same ? "identical" : "DIFFER",
              a.size())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-8)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "kernel normalization", kernel_normalization},
      {3, "theory vs simulation", theory_vs_simulation},
      {4, "Monte Carlo bias and MSE", monte_carlo},
      {5, "mortality case study", mortality},
      {6, "residual whiteness contrast", residual_whiteness},
      {7, "Wald coverage", wald_coverage},
      {8, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.skipped ? "SKIP" : o.pass ? "PASS" : "FAIL";
    std::printf("[%s] %d %s: %s (%.1f s)\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
