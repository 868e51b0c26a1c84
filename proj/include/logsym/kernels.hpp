#pragma once

// Density generating kernels of the symmetric family S(0, 1, g).
//
// Each family is described by a Traits specialization carrying the kernel
// log g(u), its derivative, the normalizer, the CDF, the variance of the
// standard variate and a sampler. Adding a family means adding one enum value
// and one Traits specialization.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "logsym/errors.hpp"
#include "logsym/special.hpp"

namespace logsym {

enum class Family { LogNormal, LogStudentT, LogPowerExponential };

/// A kernel family with its fixed shape parameter (degrees of freedom for
/// log-t, power-exponential shape in (-1, 1] for log-PE, unused for
/// log-normal).
struct KernelFamily {
  Family family = Family::LogNormal;
  double theta = 0.0;

  static KernelFamily log_normal() { return {Family::LogNormal, 0.0}; }
  static KernelFamily log_t(double dof) { return {Family::LogStudentT, dof}; }
  static KernelFamily log_pe(double shape) { return {Family::LogPowerExponential, shape}; }

  bool has_shape() const { return family != Family::LogNormal; }

  friend bool operator==(const KernelFamily&, const KernelFamily&) = default;
};

std::string_view family_name(Family f);
Family parse_family(std::string_view name);
std::string describe(const KernelFamily& k);

template <Family F>
struct KernelTraits;

template <>
struct KernelTraits<Family::LogNormal> {
  static void validate(double) {}

  template <typename Scalar>
  static Scalar log_g(Scalar u, double) { return -u / 2; }

  template <typename Scalar>
  static Scalar log_g_deriv(Scalar, double) { return Scalar(-0.5); }

  template <typename Scalar>
  static Scalar log_normalizer(double) {
    return -std::log(2 * std::numbers::pi_v<Scalar>) / 2;
  }

  template <typename Scalar>
  static Scalar cdf(Scalar z, double) { return special::normal_cdf(z); }

  static double variance(double) { return 1.0; }

  template <typename Rng>
  static double sample(Rng& rng, double) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
  }
};

template <>
struct KernelTraits<Family::LogStudentT> {
  static void validate(double dof) {
    if (!(dof > 0) || !std::isfinite(dof)) {
      throw DomainError("log-Student-t: degrees of freedom must be positive and finite");
    }
  }

  template <typename Scalar>
  static Scalar log_g(Scalar u, double dof) {
    return -Scalar(dof + 1) / 2 * std::log1p(u / Scalar(dof));
  }

  template <typename Scalar>
  static Scalar log_g_deriv(Scalar u, double dof) {
    return -Scalar(dof + 1) / (2 * (Scalar(dof) + u));
  }

  template <typename Scalar>
  static Scalar log_normalizer(double dof) {
    const Scalar nu = dof;
    return std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) -
           std::log(std::numbers::pi_v<Scalar> * nu) / 2;
  }

  template <typename Scalar>
  static Scalar cdf(Scalar z, double dof) { return special::student_t_cdf(z, Scalar(dof)); }

  static double variance(double dof) {
    if (!(dof > 2)) throw DomainError("log-Student-t: variance requires more than 2 degrees of freedom");
    return dof / (dof - 2);
  }

  template <typename Rng>
  static double sample(Rng& rng, double dof) {
    return std::student_t_distribution<double>(dof)(rng);
  }
};

// g(u) = exp(-u^{1/(1+theta)} / 2). The standard variate is
// sign * S^{(1+theta)/2} with S ~ chi-squared(1 + theta).
template <>
struct KernelTraits<Family::LogPowerExponential> {
  static void validate(double shape) {
    if (!(shape > -1.0 && shape <= 1.0)) {
      throw DomainError("log-power-exponential: shape must lie in (-1, 1]");
    }
  }

  template <typename Scalar>
  static Scalar log_g(Scalar u, double shape) {
    if (u == 0) return Scalar(0);
    return -std::pow(u, Scalar(1) / Scalar(1 + shape)) / 2;
  }

  template <typename Scalar>
  static Scalar log_g_deriv(Scalar u, double shape) {
    const Scalar a = Scalar(1) / Scalar(1 + shape);
    if (u == 0) {
      if (shape > 0) throw SingularityError("log-power-exponential: d log g / du is singular at u = 0");
      if (shape < 0) return Scalar(0);
      return Scalar(-0.5);
    }
    return -a * std::pow(u, a - 1) / 2;
  }

  template <typename Scalar>
  static Scalar log_normalizer(double shape) {
    const Scalar c = Scalar(3 + shape) / 2;
    return -(c * std::numbers::ln2_v<Scalar> + std::lgamma(c));
  }

  template <typename Scalar>
  static Scalar cdf(Scalar z, double shape) {
    if (z == 0) return Scalar(0.5);
    const Scalar dof = Scalar(1 + shape);
    const Scalar s = std::pow(std::abs(z), 2 / dof);
    if (z > 0) return Scalar(0.5) + special::chi_squared_cdf(s, dof) / 2;
    return special::chi_squared_survival(s, dof) / 2;
  }

  static double variance(double shape) {
    const double k = (1 + shape) / 2;
    return std::exp((1 + shape) * std::numbers::ln2 + std::lgamma(3 * k) - std::lgamma(k));
  }

  template <typename Rng>
  static double sample(Rng& rng, double shape) {
    const double s = std::chi_squared_distribution<double>(1 + shape)(rng);
    const double magnitude = std::pow(s, (1 + shape) / 2);
    return std::bernoulli_distribution(0.5)(rng) ? magnitude : -magnitude;
  }
};

/// Calls `fn(KernelTraits<F>{})` for the runtime family of `k`.
template <typename Fn>
decltype(auto) visit_family(const KernelFamily& k, Fn&& fn) {
  switch (k.family) {
    case Family::LogNormal:
      return fn(KernelTraits<Family::LogNormal>{});
    case Family::LogStudentT:
      return fn(KernelTraits<Family::LogStudentT>{});
    case Family::LogPowerExponential:
      return fn(KernelTraits<Family::LogPowerExponential>{});
  }
  throw DomainError("unknown kernel family");
}

inline void validate(const KernelFamily& k) {
  visit_family(k, [&](auto traits) { traits.validate(k.theta); });
}

/// log g(u).
template <typename Scalar = double>
Scalar log_kernel(Scalar u, const KernelFamily& k) {
  if (u < 0) throw DomainError("kernel: u must be non-negative");
  return visit_family(k, [&](auto traits) {
    traits.validate(k.theta);
    return traits.template log_g<Scalar>(u, k.theta);
  });
}

/// g(u).
template <typename Scalar = double>
Scalar kernel_g(Scalar u, const KernelFamily& k) {
  return std::exp(log_kernel(u, k));
}

/// d log g(u) / du = g'(u) / g(u).
template <typename Scalar = double>
Scalar g_log_deriv(Scalar u, const KernelFamily& k) {
  if (u < 0) throw DomainError("g_log_deriv: u must be non-negative");
  return visit_family(k, [&](auto traits) {
    traits.validate(k.theta);
    return traits.template log_g_deriv<Scalar>(u, k.theta);
  });
}

template <typename Scalar = double>
Scalar log_normalizer(const KernelFamily& k) {
  return visit_family(k, [&](auto traits) {
    traits.validate(k.theta);
    return traits.template log_normalizer<Scalar>(k.theta);
  });
}

/// The constant xi_nc with xi_nc * integral g(z^2) dz = 1.
template <typename Scalar = double>
Scalar normalizer(const KernelFamily& k) {
  return std::exp(log_normalizer<Scalar>(k));
}

/// CDF of the standard symmetric variate S(0, 1, g).
template <typename Scalar = double>
Scalar cdf_standard(Scalar z, const KernelFamily& k) {
  return visit_family(k, [&](auto traits) {
    traits.validate(k.theta);
    return traits.template cdf<Scalar>(z, k.theta);
  });
}

/// Var[eps] for eps ~ S(0, 1, g).
inline double variance_constant(const KernelFamily& k) {
  return visit_family(k, [&](auto traits) {
    traits.validate(k.theta);
    return traits.variance(k.theta);
  });
}

/// One draw of eps ~ S(0, 1, g) from a caller-owned generator.
template <typename Rng>
double draw_standard(Rng& rng, const KernelFamily& k) {
  return visit_family(k, [&](auto traits) { return traits.sample(rng, k.theta); });
}

/// n iid draws of eps ~ S(0, 1, g), deterministic in `seed`.
inline Eigen::VectorXd sample_standard(Eigen::Index n, const KernelFamily& k, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_standard: n must be at least 1");
  validate(k);
  std::mt19937_64 rng(seed);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = draw_standard(rng, k);
  return out;
}

/// Full log density of Y ~ LS(lambda, phi, g) at y.
template <typename Scalar = double>
Scalar log_pdf(Scalar y, Scalar lambda, Scalar phi, const KernelFamily& k) {
  if (!(y > 0) || !(lambda > 0) || !(phi > 0)) {
    throw DomainError("log_pdf: y, lambda and phi must be positive");
  }
  const Scalar log_ratio = std::log(y / lambda);
  return log_normalizer<Scalar>(k) - std::log(phi) / 2 - std::log(y) +
         log_kernel(log_ratio * log_ratio / phi, k);
}

/// CDF of Y ~ LS(lambda, phi, g) at y.
template <typename Scalar = double>
Scalar cdf(Scalar y, Scalar lambda, Scalar phi, const KernelFamily& k) {
  if (!(y > 0) || !(lambda > 0) || !(phi > 0)) {
    throw DomainError("cdf: y, lambda and phi must be positive");
  }
  return cdf_standard(std::log(y / lambda) / std::sqrt(phi), k);
}

}  // namespace logsym
