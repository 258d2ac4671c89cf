#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "edgebound/rng.hpp"
#include "edgebound/special.hpp"

#ifdef EDGEBOUND_HAVE_BOOST
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#endif

using namespace edgebound;
using Catch::Approx;

namespace {

// Composite Simpson rule with an even number of panels.
template <class F>
double simpson(F f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

// Explicit probabilists' Hermite polynomials.
double hermite_explicit(int k, double x) {
  switch (k) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return x * x - 1.0;
    case 3: return x * x * x - 3.0 * x;
    case 4: return std::pow(x, 4) - 6.0 * x * x + 3.0;
    case 5: return std::pow(x, 5) - 10.0 * std::pow(x, 3) + 15.0 * x;
    case 6: return std::pow(x, 6) - 15.0 * std::pow(x, 4) + 45.0 * x * x - 15.0;
  }
  return 0.0;
}

const double kPhi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

TEST_CASE("normal density and cdf") {
  CHECK(normal_pdf(0.0) == Approx(kPhi0).epsilon(1e-15));
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-13));
  CHECK(normal_cdf(-8.0) == Approx(6.22096057427178e-16).epsilon(1e-9));
  for (double x = -6.0; x <= 6.0; x += 0.25)
    CHECK(normal_cdf(x) == Approx(0.5 + simpson(normal_pdf, 0.0, x, 2000)).margin(1e-12));
}

TEST_CASE("hermite recurrence matches explicit polynomials") {
  for (int k = 0; k <= 6; ++k)
    for (double x = -3.0; x <= 3.0; x += 0.37) CHECK(hermite(k, x) == Approx(hermite_explicit(k, x)).margin(1e-12));
  CHECK_THROWS_AS(hermite(-1, 0.0), DomainError);
}

TEST_CASE("hermite orthogonality under the gaussian weight") {
  for (int j = 0; j <= 6; ++j)
    for (int k = 0; k <= 6; ++k) {
      double v = simpson([&](double x) { return hermite(j, x) * hermite(k, x) * normal_pdf(x); }, -12.0, 12.0);
      CHECK(v == Approx(j == k ? factorial(k) : 0.0).margin(1e-9));
    }
}

TEST_CASE("hermite interval integrals against quadrature") {
  CHECK(hermite_interval_integral(3, -INFINITY, 0.0) == Approx(kPhi0).epsilon(1e-14));
  CHECK(hermite_interval_integral(0, -INFINITY, INFINITY) == Approx(1.0));
  for (int k = 1; k <= 6; ++k) CHECK(hermite_interval_integral(k, -INFINITY, INFINITY) == Approx(0.0).margin(1e-15));
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    double a = 6.0 * rng.uniform() - 3.0, b = a + 4.0 * rng.uniform();
    for (int k = 0; k <= 6; ++k) {
      double q = simpson([&](double x) { return hermite_explicit(k, x) * normal_pdf(x); }, a, b, 2000);
      CHECK(hermite_interval_integral(k, a, b) == Approx(q).margin(1e-11));
    }
  }
  CHECK_THROWS_AS(hermite_interval_integral(7, 0.0, 1.0), DomainError);
}

TEST_CASE("hermite interval integrals are bounded by sqrt(k!)") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    double a = 10.0 * rng.uniform() - 5.0, b = 10.0 * rng.uniform() - 5.0;
    if (a > b) std::swap(a, b);
    if (trial % 10 == 0) a = -INFINITY;
    for (int k = 0; k <= 6; ++k) CHECK(std::abs(hermite_interval_integral(k, a, b)) <= std::sqrt(factorial(k)));
  }
}

TEST_CASE("regularized gamma against independent references") {
  // integer shape: P(a, x) = 1 - e^-x sum_{j<a} x^j / j!
  for (int a = 1; a <= 20; ++a)
    for (double x : {0.1, 1.0, 5.0, 12.0, 40.0}) {
      double tail = 0.0, term = 1.0;
      for (int j = 0; j < a; ++j) {
        tail += term;
        term *= x / (j + 1);
      }
      const double q = std::exp(-x) * tail;
      CHECK(gamma_q(a, x) == Approx(q).epsilon(1e-11).margin(1e-300));
      CHECK(gamma_p(a, x) + gamma_q(a, x) == Approx(1.0).epsilon(1e-14));
    }
  CHECK(gamma_p(0.5, 2.0) == Approx(std::erf(std::sqrt(2.0))).epsilon(1e-13));
#ifdef EDGEBOUND_HAVE_BOOST
  for (double d : {1.0, 2.0, 3.0, 7.0, 32.0, 128.0, 511.0, 512.0}) {
    for (double f : {0.05, 0.3, 0.8, 1.0, 1.2, 2.0, 4.0}) {
      const double x = f * d;
      const double a = 0.5 * d, xx = 0.5 * x;
      const double p = boost::math::gamma_p(a, xx), q = boost::math::gamma_q(a, xx);
      if (p > 1e-300) CHECK(gamma_p(a, xx) == Approx(p).epsilon(1e-10));
      if (q > 1e-300) CHECK(gamma_q(a, xx) == Approx(q).epsilon(1e-10));
    }
  }
#endif
}

TEST_CASE("chi-square quantiles") {
  for (double alpha : {0.5, 0.1, 0.05, 0.01, 1e-6}) CHECK(chi2_quantile(alpha, 2) == Approx(-2.0 * std::log(alpha)).epsilon(1e-12));
  CHECK(chi2_quantile(0.05, 2) == Approx(5.9915).margin(5e-5));
  CHECK(chi2_quantile(0.05, 1) == Approx(1.959963984540054 * 1.959963984540054).epsilon(1e-12));
  CHECK(chi2_quantile(0.05, 1) == Approx(3.8415).margin(5e-5));

  // inverse of a Simpson-integrated chi^2_1 density (u = sqrt(x) removes the pole)
  auto cdf1 = [](double q) {
    return simpson([](double u) { return 2.0 * std::exp(-0.5 * u * u) * kPhi0; }, 0.0, std::sqrt(q), 4000);
  };
  double lo = 0.0, hi = 20.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (cdf1(mid) < 0.95 ? lo : hi) = mid;
  }
  CHECK(chi2_quantile(0.05, 1) == Approx(0.5 * (lo + hi)).epsilon(1e-10));

  for (int d : {1, 3, 10, 100, 512})
    for (double alpha : {0.9, 0.5, 0.1, 0.01}) {
      const double q = chi2_quantile(alpha, d);
      CHECK(chi2_cdf(q, d) == Approx(1.0 - alpha).epsilon(1e-10));
    }
  double prev = 0.0;
  for (double alpha = 0.99; alpha > 0.005; alpha -= 0.01) {
    double q = chi2_quantile(alpha, 4);
    CHECK(q > prev);
    prev = q;
  }
  CHECK_THROWS_AS(chi2_quantile(0.0, 2), DomainError);
  CHECK_THROWS_AS(chi2_quantile(1.0, 2), DomainError);
  CHECK_THROWS_AS(chi2_quantile(0.5, 0), DomainError);
#ifdef EDGEBOUND_HAVE_BOOST
  for (int d : {1, 5, 50})
    CHECK(chi2_quantile(0.025, d) ==
          Approx(boost::math::quantile(boost::math::complement(boost::math::chi_squared(d), 0.025))).epsilon(1e-10));
#endif
}

TEST_CASE("chi density and distribution") {
  for (int d : {1, 2, 8, 32}) {
    double mass = simpson([&](double r) { return chi_pdf(r, d); }, 0.0, std::sqrt(d) + 12.0, 20000);
    CHECK(mass == Approx(1.0).epsilon(1e-8));
    for (double r : {0.5, 1.0, 3.0})
      CHECK(chi_cdf(r, d) == Approx(simpson([&](double t) { return chi_pdf(t, d); }, 0.0, r, 4000)).margin(1e-10));
  }
  // chi_1 is the half-normal
  CHECK(chi_pdf(0.0, 1) == Approx(2.0 * kPhi0));
  CHECK(chi_cdf(1.0, 1) == Approx(2.0 * normal_cdf(1.0) - 1.0).epsilon(1e-13));
  CHECK(chi_cdf(-1.0, 3) == 0.0);
}
