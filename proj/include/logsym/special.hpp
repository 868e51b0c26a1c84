#pragma once

// Special functions needed by the kernel CDFs and the diagnostics: regularized
// incomplete gamma and beta, the standard normal CDF and quantile, and the
// Student-t and chi-squared CDFs built on top of them.

#include <cmath>
#include <limits>
#include <numbers>

#include "logsym/errors.hpp"

namespace logsym::special {

namespace detail {

template <typename Scalar>
constexpr Scalar tiny() {
  return std::numeric_limits<Scalar>::min() / std::numeric_limits<Scalar>::epsilon();
}

template <typename Scalar>
constexpr Scalar tolerance() {
  return std::numeric_limits<Scalar>::epsilon();
}

constexpr int kMaxIterations = 10000;

// Lower incomplete gamma by its power series, valid for x < a + 1.
template <typename Scalar>
Scalar gamma_p_series(Scalar a, Scalar x) {
  Scalar term = Scalar(1) / a;
  Scalar sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * tolerance<Scalar>()) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw ConvergenceError("gamma_p: series did not converge");
}

// Upper incomplete gamma by Lentz's continued fraction, valid for x >= a + 1.
template <typename Scalar>
Scalar gamma_q_fraction(Scalar a, Scalar x) {
  Scalar b = x + 1 - a;
  Scalar c = Scalar(1) / tiny<Scalar>();
  Scalar d = Scalar(1) / b;
  Scalar h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const Scalar an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
    c = b + an / c;
    if (std::abs(c) < tiny<Scalar>()) c = tiny<Scalar>();
    d = Scalar(1) / d;
    const Scalar delta = d * c;
    h *= delta;
    if (std::abs(delta - 1) < tolerance<Scalar>()) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw ConvergenceError("gamma_q: continued fraction did not converge");
}

// Continued fraction for the incomplete beta (modified Lentz).
template <typename Scalar>
Scalar beta_fraction(Scalar a, Scalar b, Scalar x) {
  const Scalar qab = a + b;
  const Scalar qap = a + 1;
  const Scalar qam = a - 1;
  Scalar c = 1;
  Scalar d = 1 - qab * x / qap;
  if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
  d = Scalar(1) / d;
  Scalar h = d;
  for (int m = 1; m < kMaxIterations; ++m) {
    const int m2 = 2 * m;
    Scalar aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
    c = 1 + aa / c;
    if (std::abs(c) < tiny<Scalar>()) c = tiny<Scalar>();
    d = Scalar(1) / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
    c = 1 + aa / c;
    if (std::abs(c) < tiny<Scalar>()) c = tiny<Scalar>();
    d = Scalar(1) / d;
    const Scalar delta = d * c;
    h *= delta;
    if (std::abs(delta - 1) < tolerance<Scalar>()) return h;
  }
  throw ConvergenceError("beta_inc: continued fraction did not converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
template <typename Scalar>
Scalar gamma_p(Scalar a, Scalar x) {
  if (!(a > 0) || x < 0) throw DomainError("gamma_p: requires a > 0 and x >= 0");
  if (x == 0) return 0;
  if (x < a + 1) return detail::gamma_p_series(a, x);
  return 1 - detail::gamma_q_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without
/// cancellation in the upper tail.
template <typename Scalar>
Scalar gamma_q(Scalar a, Scalar x) {
  if (!(a > 0) || x < 0) throw DomainError("gamma_q: requires a > 0 and x >= 0");
  if (x == 0) return 1;
  if (x < a + 1) return 1 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

/// Regularized incomplete beta I_x(a, b). The complement y = 1 - x is passed
/// separately so callers can supply it without cancellation.
template <typename Scalar>
Scalar beta_inc(Scalar a, Scalar b, Scalar x, Scalar y) {
  if (!(a > 0) || !(b > 0)) throw DomainError("beta_inc: requires a, b > 0");
  if (x < 0 || x > 1) throw DomainError("beta_inc: x outside [0, 1]");
  if (x == 0) return 0;
  if (y == 0) return 1;
  const Scalar log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const Scalar front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * detail::beta_fraction(a, b, x) / a;
  return 1 - front * detail::beta_fraction(b, a, y) / b;
}

template <typename Scalar>
Scalar beta_inc(Scalar a, Scalar b, Scalar x) {
  return beta_inc(a, b, x, Scalar(1) - x);
}

template <typename Scalar>
Scalar normal_pdf(Scalar z) {
  return std::exp(-z * z / 2) / std::sqrt(2 * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar normal_cdf(Scalar z) {
  return std::erfc(-z / std::numbers::sqrt2_v<Scalar>) / 2;
}

/// Standard normal quantile: Wichura's AS241 rational approximation followed
/// by one Newton step against normal_cdf.
template <typename Scalar>
Scalar normal_quantile(Scalar p) {
  if (!(p > 0) || !(p < 1)) {
    if (p == 0) return -std::numeric_limits<Scalar>::infinity();
    if (p == 1) return std::numeric_limits<Scalar>::infinity();
    throw DomainError("normal_quantile: p outside [0, 1]");
  }
  const double q = static_cast<double>(p) - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
  } else {
    double r = std::sqrt(-std::log(q < 0 ? static_cast<double>(p) : 1.0 - static_cast<double>(p)));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
    }
    if (q < 0) x = -x;
  }
  Scalar z = static_cast<Scalar>(x);
  const Scalar density = normal_pdf(z);
  if (density > 0) {
    // Phi(z) - p, evaluated in the smaller tail to keep relative accuracy.
    const Scalar err = p < Scalar(0.5) ? normal_cdf(z) - p : (1 - p) - normal_cdf(-z);
    z -= err / density;
  }
  return z;
}

/// Student-t CDF with `dof` > 0 degrees of freedom.
template <typename Scalar>
Scalar student_t_cdf(Scalar t, Scalar dof) {
  if (!(dof > 0)) throw DomainError("student_t_cdf: degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? Scalar(1) : Scalar(0);
  const Scalar t2 = t * t;
  const Scalar x = dof / (dof + t2);
  const Scalar y = t2 / (dof + t2);
  const Scalar tail = beta_inc(dof / 2, Scalar(0.5), x, y) / 2;
  return t > 0 ? 1 - tail : tail;
}

template <typename Scalar>
Scalar chi_squared_cdf(Scalar x, Scalar dof) {
  if (x <= 0) return 0;
  return gamma_p(dof / 2, x / 2);
}

template <typename Scalar>
Scalar chi_squared_survival(Scalar x, Scalar dof) {
  if (x <= 0) return 1;
  return gamma_q(dof / 2, x / 2);
}

}  // namespace logsym::special
