#include <catch_amalgamated.hpp>

#include <cmath>

#include "edgebound/distributions.hpp"
#include "edgebound/tensor.hpp"

using namespace edgebound;
using Catch::Approx;

namespace {

struct MeanSe {
  double mean, se;
};

template <class F>
MeanSe column_stat(const Sample& s, F f) {
  double m = 0.0, q = 0.0;
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    double v = f(s.row(i));
    m += v;
    q += v * v;
  }
  const double nn = static_cast<double>(s.n());
  m /= nn;
  return {m, std::sqrt(std::max(0.0, q / nn - m * m) / nn)};
}

void check_within(const MeanSe& est, double target, double k = 5.0) {
  INFO("estimate " << est.mean << " se " << est.se << " target " << target);
  CHECK(std::abs(est.mean - target) <= k * est.se + 1e-12);
}

}  // namespace

TEST_CASE("alpha law moments and Hankel determinant") {
  Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    const double beta = 0.02 + 0.96 * rng.uniform();
    TwoPointLaw law = alpha_law(beta);
    const double bu2 = 1.0 - beta * beta;
    CHECK(law.p > 0.0);
    CHECK(law.p < 1.0);
    CHECK(law.moment(1) == Approx(0.0).margin(1e-12));
    CHECK(law.moment(2) == Approx(bu2).epsilon(1e-12));
    CHECK(law.moment(3) == Approx(1.0).epsilon(1e-12));
    CHECK(law.moment(4) == Approx(bu2 * bu2 + 1.0 / bu2).epsilon(1e-12));
    CHECK(std::abs(hankel_determinant(law.moment(1), law.moment(2), law.moment(3), law.moment(4))) <= 1e-9);
  }
  CHECK_THROWS_AS(alpha_law(1.0), DomainError);
  // Hankel matrix of N(0,1) moments is positive definite
  CHECK(hankel_determinant(0, 1, 0, 3) == Approx(2.0));
}

TEST_CASE("alpha law sampling frequency") {
  TwoPointLaw law = alpha_law(0.829);
  Rng rng(5);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += law.draw(rng) == law.a;
  const double se = std::sqrt(law.p * (1 - law.p) / n);
  CHECK(std::abs(hits / double(n) - law.p) < 5 * se);
}

TEST_CASE("gaussian sampler covariance and mean") {
  Matrix s(2, 2);
  s << 2.0, -0.6, -0.6, 1.0;
  Vector mu(2);
  mu << 1.0, -3.0;
  Sample x = sample_gaussian(SpdMatrix(s), 200000, 3, mu);
  check_within(column_stat(x, [](auto r) { return r(0); }), 1.0);
  check_within(column_stat(x, [](auto r) { return r(1); }), -3.0);
  check_within(column_stat(x, [](auto r) { return (r(0) - 1.0) * (r(1) + 3.0); }), -0.6);
  check_within(column_stat(x, [](auto r) { return (r(0) - 1.0) * (r(0) - 1.0); }), 2.0);
  CHECK_THROWS_AS(sample_gaussian(SpdMatrix(s), 1, 3), DomainError);
}

TEST_CASE("family moments") {
  const Eigen::Index n = 400000;
  SECTION("centered exponential") {
    Sample x = sample_centered_exponential(2, n, 8);
    check_within(column_stat(x, [](auto r) { return r(0); }), 0.0);
    check_within(column_stat(x, [](auto r) { return r(1) * r(1); }), 1.0);
    check_within(column_stat(x, [](auto r) { return std::pow(r(0), 3); }), 2.0);
  }
  SECTION("laplace product") {
    Sample x = sample_laplace_product(2, n, 9);
    check_within(column_stat(x, [](auto r) { return r(0) * r(0); }), 1.0);
    check_within(column_stat(x, [](auto r) { return std::pow(r(1), 4); }), 6.0);  // kurtosis of Laplace
    check_within(column_stat(x, [](auto r) { return r(0) * r(1); }), 0.0);
  }
  SECTION("portnoy mixture") {
    Sample x = sample_portnoy(3, n, 10);
    check_within(column_stat(x, [](auto r) { return r(0) * r(0); }), 1.0);
    check_within(column_stat(x, [](auto r) { return r(0) * r(2); }), 0.0);
    check_within(column_stat(x, [](auto r) { return std::pow(r(1), 4); }), 9.0);
    // E u^4 E Z_i^2 Z_k^2 = 3 off the diagonal
    check_within(column_stat(x, [](auto r) { return r(0) * r(0) * r(1) * r(1); }), 3.0);
  }
  SECTION("symmetric L") {
    Sample x = sample_symmetric_L(3, n, 11);
    check_within(column_stat(x, [](auto r) { return r(0) * r(0); }), 1.0);
    check_within(column_stat(x, [](auto r) { return r(0) * r(1); }), 0.0);
    check_within(column_stat(x, [](auto r) { return std::pow(r(0), 3); }), 0.0);
    check_within(column_stat(x, [](auto r) { return std::pow(r(2), 4); }), 9.0);
    check_within(column_stat(x, [](auto r) { return r(0) * r(0) * r(1) * r(1); }), 1.8);
  }
}

TEST_CASE("samplers are deterministic in the seed") {
  DistributionSpec spec;
  spec.family = "laplace_product";
  spec.d = 3;
  Sample a = draw(spec, 50, 77), b = draw(spec, 50, 77), c = draw(spec, 50, 78);
  CHECK(a.data() == b.data());
  CHECK(a.data() != c.data());
}

TEST_CASE("distribution spec validation") {
  DistributionSpec s;
  s.family = "cauchy";
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.family = "laplace_product";
  s.d = 2;
  s.sigma = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.family = "gaussian";
  s.sigma = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.sigma.reset();
  CHECK_NOTHROW(s.validate());
  s.family = "user_csv";
  CHECK_THROWS_AS(s.validate(), DomainError);
  CHECK(DistributionSpec::families().size() == 6);
}

TEST_CASE("construction matches the first three moment tensors") {
  for (const std::string family : {"gaussian", "centered_exponential"}) {
    DistributionSpec spec;
    spec.family = family;
    spec.d = 2;
    const Eigen::Index n = 300000;
    Sample x = draw(spec, n, 31);
    ConstructedY y = construct_Y(x, 0.829, 32, spec);
    CHECK(y.copy_policy == "fresh_draw");
    CHECK(y.y.n() == n);
    for (int k : {2, 3}) {
      MomentWithError mx = empirical_moment_with_error(x, k, Center::none);
      MomentWithError my = empirical_moment_with_error(y.y, k, Center::none);
      for (std::size_t f = 0; f < mx.mean.size(); ++f) {
        const double se = std::hypot(mx.stderr_.entries()[f], my.stderr_.entries()[f]);
        INFO(family << " order " << k << " entry " << f);
        CHECK(std::abs(mx.mean.entries()[f] - my.mean.entries()[f]) <= 5.0 * se);
      }
    }
    Vector dm = x.mean() - y.y.mean();
    CHECK(dm.cwiseAbs().maxCoeff() < 5.0 * std::sqrt(2.0 / n) * 2.0);
  }
}

TEST_CASE("construction without a spec splits the sample") {
  DistributionSpec spec;
  spec.family = "centered_exponential";
  spec.d = 1;
  Sample x = draw(spec, 200001, 41);
  ConstructedY y = construct_Y(x, 0.6, 42);
  CHECK(y.copy_policy == "half_split_resample");
  CHECK(y.reference_rows == 100000);
  CHECK(y.y.n() == 100000);
  MomentWithError my = empirical_moment_with_error(y.y, 3, Center::mean);
  CHECK(std::abs(my.mean.entries()[0] - 2.0) < 5.0 * my.stderr_.entries()[0] + 0.1);
  CHECK_THROWS_AS(construct_Y(Sample(RowMatrix::Zero(3, 1)), 0.5, 1), DomainError);
}

TEST_CASE("concentration helpers") {
  CHECK(bernstein_tail(2.0, 1.0, 3.0) == Approx(std::sqrt(12.0) + 3.0));
  CHECK(product_tail(0.5, 2.0) == Approx(2.0 * (4.0 + 2.0)));
  CHECK_THROWS_AS(bernstein_tail(-1, 0, 0), DomainError);

  DistributionSpec g;
  g.d = 2;
  SubGaussianEstimate est = sub_gaussian_factor(draw(g, 20000, 5));
  CHECK(est.heuristic);
  CHECK(est.sigma2 >= 0.98);
  CHECK(est.sigma2 < 1.5);
  RowMatrix scaled = draw(g, 20000, 5).data() * 3.0;
  CHECK(sub_gaussian_factor(Sample(scaled)).sigma2 == Approx(9.0 * est.sigma2).epsilon(1e-9));
  CHECK_THROWS_AS(sub_gaussian_factor(draw(g, 50, 1)), DomainError);
}
