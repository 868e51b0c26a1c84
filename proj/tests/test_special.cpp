#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "logsym/special.hpp"

using namespace logsym;

TEST_CASE("regularized incomplete gamma against boost") {
  for (double a : {0.25, 0.5, 1.0, 2.5, 10.0, 75.0}) {
    for (double x : {1e-6, 0.01, 0.5, 1.0, 3.0, 12.0, 80.0, 200.0}) {
      const double p = boost::math::gamma_p(a, x);
      const double q = boost::math::gamma_q(a, x);
      CHECK(special::gamma_p(a, x) == doctest::Approx(p).epsilon(1e-12));
      CHECK(special::gamma_q(a, x) == doctest::Approx(q).epsilon(1e-10));
    }
  }
  CHECK(special::gamma_p(2.0, 0.0) == 0.0);
  CHECK_THROWS_AS(special::gamma_p(-1.0, 1.0), DomainError);
}

TEST_CASE("regularized incomplete beta against boost") {
  for (double a : {0.5, 1.0, 2.0, 7.5}) {
    for (double b : {0.5, 3.0, 20.0}) {
      for (double x : {0.001, 0.2, 0.5, 0.9, 0.999}) {
        CHECK(special::beta_inc(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("normal quantile inverts the CDF to near machine precision") {
  boost::math::normal_distribution<double> N;
  for (double p : {1e-300, 1e-12, 1e-6, 0.01, 0.2, 0.5, 0.7, 0.975, 1 - 1e-9}) {
    CHECK(special::normal_quantile(p) == doctest::Approx(boost::math::quantile(N, p)).epsilon(1e-13));
  }
  CHECK(std::isinf(special::normal_quantile(0.0)));
  CHECK_THROWS_AS(special::normal_quantile(1.5), DomainError);
}

TEST_CASE("student t and chi-squared CDFs against boost") {
  for (double nu : {0.7, 1.0, 4.0, 30.0}) {
    boost::math::students_t_distribution<double> T(nu);
    for (double t : {-40.0, -2.5, -0.3, 0.0, 1e-4, 1.7, 9.0}) {
      CHECK(special::student_t_cdf(t, nu) == doctest::Approx(boost::math::cdf(T, t)).epsilon(1e-11));
    }
  }
  for (double k : {1.0, 1.5, 18.0}) {
    boost::math::chi_squared_distribution<double> C(k);
    for (double x : {0.01, 1.0, 7.0, 60.0}) {
      CHECK(special::chi_squared_cdf(x, k) == doctest::Approx(boost::math::cdf(C, x)).epsilon(1e-11));
      CHECK(special::chi_squared_survival(x, k) ==
            doctest::Approx(boost::math::cdf(boost::math::complement(C, x))).epsilon(1e-10));
    }
  }
}
