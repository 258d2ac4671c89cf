#include <catch_amalgamated.hpp>

#include <cmath>

#include "edgebound/distance.hpp"
#include "edgebound/special.hpp"

#ifdef EDGEBOUND_HAVE_BOOST
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#endif

using namespace edgebound;
using Catch::Approx;

namespace {

Sample gaussian(int d, Eigen::Index n, std::uint64_t seed, double shift = 0.0) {
  DistributionSpec spec;
  spec.d = d;
  Sample s = draw(spec, n, seed);
  RowMatrix x = s.data();
  x.col(0).array() += shift;
  return Sample(std::move(x));
}

Matrix random_rotation(int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

Sample rotate(const Sample& s, const Matrix& q) { return Sample(RowMatrix(s.data() * q.transpose())); }

std::vector<double> uniforms(int n, std::uint64_t seed, double shift = 0.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() + shift;
  return v;
}

}  // namespace

TEST_CASE("two-sample KS in one dimension") {
  CHECK(ks_two_sample_1d({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample_1d({0}, {1}) == 1.0);
  CHECK(ks_two_sample_1d({1, 2, 3, 4}, {3, 4, 5, 6}) == Approx(0.5));
  // ties across samples are consumed together
  CHECK(ks_two_sample_1d({0, 0, 1, 1}, {0, 1}) == 0.0);
  CHECK(ks_two_sample_1d(uniforms(20000, 1), uniforms(20000, 2)) < 0.02);
  CHECK_THROWS_AS(ks_two_sample_1d({}, {1.0}), DomainError);

  // brute force over all thresholds
  for (std::uint64_t seed = 3; seed < 13; ++seed) {
    std::vector<double> a = uniforms(37, seed), b = uniforms(23, seed + 100, 0.2);
    double best = 0.0;
    for (const auto* src : {&a, &b})
      for (double t : *src) {
        double fa = 0, fb = 0;
        for (double x : a) fa += x <= t;
        for (double x : b) fb += x <= t;
        best = std::max(best, std::abs(fa / a.size() - fb / b.size()));
      }
    CHECK(ks_two_sample_1d(a, b) == Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("levy distance") {
  CHECK(levy_distance_1d({1, 2, 3}, {3, 2, 1}) == 0.0);
  CHECK(levy_distance_1d({0.0}, {1.0}) == Approx(1.0).epsilon(1e-12));
  for (double c : {0.01, 0.05, 0.2}) {
    std::vector<double> a = uniforms(500, 7), b = a;
    for (auto& x : b) x += c;
    CHECK(levy_distance_1d(a, b) <= c + 1e-12);
  }
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::vector<double> a = uniforms(40 + seed, seed), b = uniforms(60, seed + 999, 0.1 * (seed % 5));
    CHECK(levy_distance_1d(a, b) <= ks_two_sample_1d(a, b) + 1e-12);
  }
}

TEST_CASE("distance estimators on identical samples are zero") {
  Sample a = gaussian(3, 500, 4);
  CHECK(delta_B_hat(a, a, {}, 1).value == 0.0);
  CHECK(delta_H_hat(a, a, 64, 1).value == 0.0);
  CHECK_THROWS_AS(delta_B_hat(a, gaussian(2, 500, 5), {}, 1), DomainError);
  BallSearchPolicy empty{0, false, false, 0};
  CHECK_THROWS_AS(delta_B_hat(a, a, empty, 1), DomainError);
}

TEST_CASE("half-space estimate recovers a mean shift") {
  // sup_t |Phi(t) - Phi(t - 3)| = 2 Phi(1.5) - 1, attained along e_1
  const double target = 2.0 * normal_cdf(1.5) - 1.0;
  Sample a = gaussian(2, 20000, 11), b = gaussian(2, 20000, 12, 3.0);
  DistanceEstimate h = delta_H_hat(a, b, 32, 5, 8);
  INFO("value " << h.value << " stderr " << h.stderr_);
  CHECK(std::abs(h.value - target) < 0.02);
  CHECK(h.stderr_ > 0.0);
  CHECK(h.stderr_ < 0.01);
  CHECK(h.lower_estimate);
  CHECK(h.search_size == 34u);

  DistanceEstimate ball = delta_B_hat(a, b, {256, true, true, 0}, 5);
  CHECK(ball.value >= 0.5);
  CHECK(ball.value <= 1.0);
}

#ifdef EDGEBOUND_HAVE_BOOST
TEST_CASE("ball estimate dominates the origin-centered population gap") {
  // balls at the origin: |Z|^2 ~ chi2_2 vs |Z + 3e_1|^2 ~ noncentral chi2_2(9)
  boost::math::chi_squared c(2.0);
  boost::math::non_central_chi_squared nc(2.0, 9.0);
  double gap = 0.0;
  for (double r2 = 0.01; r2 < 40.0; r2 += 0.01) gap = std::max(gap, boost::math::cdf(c, r2) - boost::math::cdf(nc, r2));
  Sample a = gaussian(2, 20000, 21), b = gaussian(2, 20000, 22, 3.0);
  BallSearchPolicy origin_only{0, true, false, 0};
  DistanceEstimate e = delta_B_hat(a, b, origin_only, 1);
  CHECK(std::abs(e.value - gap) < 4.0 * e.stderr_ + 0.005);
  CHECK(delta_B_hat(a, b, {64, true, true, 0}, 1).value >= e.value);
}
#endif

TEST_CASE("estimates are monotone in the search set") {
  Sample a = gaussian(3, 800, 31), b = gaussian(3, 800, 32, 0.15);
  double prev_b = 0.0, prev_h = 0.0;
  for (int m : {0, 4, 16, 64, 256}) {
    BallSearchPolicy p;
    p.random_centers = m;
    p.stderr_reps = 0;
    double vb = delta_B_hat(a, b, p, 9).value;
    double vh = delta_H_hat(a, b, m, 9, 0).value;
    CHECK(vb >= prev_b);
    CHECK(vh >= prev_h);
    prev_b = vb;
    prev_h = vh;
  }
}

TEST_CASE("estimates are invariant under a common rotation") {
  Sample a = gaussian(3, 3000, 41), b = gaussian(3, 3000, 42, 0.3);
  Matrix q = random_rotation(3, 43);
  Sample ra = rotate(a, q), rb = rotate(b, q);
  // centered at the origin the reduction sees only |x|, which is exact up to rounding
  BallSearchPolicy origin_only{0, true, false, 0};
  CHECK(delta_B_hat(ra, rb, origin_only, 1).value == Approx(delta_B_hat(a, b, origin_only, 1).value).margin(2.0 / 3000));
  // randomized search sets agree up to re-estimation noise
  BallSearchPolicy p{256, true, true, 8};
  DistanceEstimate e1 = delta_B_hat(a, b, p, 2), e2 = delta_B_hat(ra, rb, p, 2);
  CHECK(std::abs(e1.value - e2.value) < 4.0 * std::hypot(e1.stderr_, e2.stderr_) + 0.01);
  DistanceEstimate h1 = delta_H_hat(a, b, 256, 2, 8), h2 = delta_H_hat(ra, rb, 256, 2, 8);
  CHECK(std::abs(h1.value - h2.value) < 4.0 * std::hypot(h1.stderr_, h2.stderr_) + 0.01);
}

TEST_CASE("estimates are deterministic and serialize") {
  Sample a = gaussian(2, 400, 51), b = gaussian(2, 400, 52);
  DistanceEstimate e1 = delta_B_hat(a, b, {}, 77), e2 = delta_B_hat(a, b, {}, 77);
  CHECK(e1.value == e2.value);
  CHECK(e1.stderr_ == e2.stderr_);
  auto j = e1.to_json();
  CHECK(j["kind"] == "ball");
  CHECK(j["n_mc"]["a"] == 400);
  CHECK(j["search_set"]["size"] == 1 + 4 + 256);
  CHECK(j["flags"]["lower_estimate_of_supremum"] == true);
  CHECK(j["stderr_method"] == "bootstrap");
  CHECK(delta_H_hat(a, b, 8, 1, 0).to_json()["stderr_method"] == "plugin_binomial");
}

TEST_CASE("null calibration scales the threshold with n") {
  DistributionSpec spec;
  spec.d = 2;
  BallSearchPolicy p;
  p.random_centers = 32;
  NullCalibration cal = calibrate_null("halfspace", spec, 1000, 20, 0.95, p, 32, 3);
  CHECK(cal.runs == 20);
  CHECK(cal.scaled_quantile > 0.3);
  CHECK(cal.scaled_quantile < 3.0);
  CHECK(cal.threshold(4000) == Approx(cal.threshold(1000) / 2.0));
  CHECK_THROWS_AS(calibrate_null("ball", spec, 1000, 19, 0.95, p, 32, 3), DomainError);
  CHECK_THROWS_AS(calibrate_null("convex", spec, 1000, 20, 0.95, p, 32, 3), DomainError);
  CHECK_THROWS_AS(calibrate_null("ball", spec, 1000, 20, 1.0, p, 32, 3), DomainError);
}

TEST_CASE("sum replicates have unit covariance") {
  DistributionSpec spec;
  spec.family = "centered_exponential";
  spec.d = 2;
  Sample s = sum_replicates(spec, 50, 20000, 8);
  Matrix cov = s.covariance();
  CHECK(cov(0, 0) == Approx(1.0).margin(0.05));
  CHECK(cov(0, 1) == Approx(0.0).margin(0.03));
  CHECK(s.mean().cwiseAbs().maxCoeff() < 0.04);
  CHECK(sum_replicates(spec, 50, 10, 8).data() == sum_replicates(spec, 50, 10, 8).data());
}

TEST_CASE("anti-concentration probe") {
  // chi_1 is the half-normal, whose density peaks at 2 phi(0)
  const double half_normal_peak = std::sqrt(2.0 / std::numbers::pi);
  CHECK(anti_concentration_probe(1, 1e-3, default_radius_grid(1)) == Approx(half_normal_peak).epsilon(1e-3));
  double prev = half_normal_peak;
  for (int d : {2, 8, 32, 128}) {
    const double mode = std::sqrt(d - 1.0);
    const double peak = chi_pdf(mode, d);
    const double probe = anti_concentration_probe(d, 1e-3, default_radius_grid(d));
    CHECK(probe <= peak * (1.0 + 1e-9));
    CHECK(probe == Approx(peak).epsilon(2e-3));
    // the chi_d density peak decreases to 1/sqrt(pi)
    CHECK(probe > 1.0 / std::sqrt(std::numbers::pi));
    CHECK(probe < prev);
    prev = probe;
  }
  CHECK_THROWS_AS(anti_concentration_probe(0, 1e-3, {1.0}), DomainError);
  CHECK_THROWS_AS(anti_concentration_probe(2, 0.0, {1.0}), DomainError);
  CHECK_THROWS_AS(anti_concentration_probe(2, 1e-3, {}), DomainError);
  CHECK_THROWS_AS(anti_concentration_probe(2, 1e-3, {-1.0}), DomainError);
}

TEST_CASE("portnoy experiment") {
  CHECK_THROWS_AS(portnoy_scaling_experiment({2}, 64, 29, 1), DomainError);
  CHECK_THROWS_AS(portnoy_scaling_experiment({4, 2}, 64, 50, 1), DomainError);
  CHECK_THROWS_AS(portnoy_scaling_experiment({128}, 64, 50, 1), DomainError);

  PortnoyResult one = portnoy_scaling_experiment({1}, 64, 2000, 2);
  REQUIRE(one.rows.size() == 1);
  // E |S_n|^2 = 1; Var |S_n|^2 = E u^4 E z^4 / n + 2 (1 - 1/n) ~ 2.1
  CHECK(std::abs(one.rows[0].mean_norm_sq - 1.0) < 5.0 * std::sqrt(2.2 / 2000));

  // the coupled remainder is |g|^2 (chi2_n / n - 1) of order |g|^2 sqrt(2/n): it halves when n quadruples
  PortnoyResult a = portnoy_scaling_experiment({8}, 256, 400, 3);
  PortnoyResult b = portnoy_scaling_experiment({8}, 1024, 400, 3);
  CHECK(b.rows[0].median_abs_D / a.rows[0].median_abs_D == Approx(0.5).margin(0.125));

  PortnoyResult r = portnoy_scaling_experiment({2, 4, 8}, 128, 60, 4);
  CHECK(r.rows.size() == 3);
  CHECK(r.fit.slope_stderr >= 0.0);
  CHECK(portnoy_scaling_experiment({2, 4}, 64, 30, 9).rows[1].median_abs_D ==
        portnoy_scaling_experiment({2, 4}, 64, 30, 9).rows[1].median_abs_D);
}

TEST_CASE("least squares slope") {
  SlopeFit f = ols_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
  CHECK(f.slope_stderr == Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(ols_fit({1}, {1}), DomainError);
}
