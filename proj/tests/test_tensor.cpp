#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <filesystem>

#include "edgebound/sample.hpp"
#include "edgebound/spd_matrix.hpp"
#include "edgebound/tensor.hpp"

using namespace edgebound;
using Catch::Approx;

namespace {

Sample random_sample(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal() + 0.3 * rng.normal() * rng.normal();
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

// E Z^4 for Z ~ N(0, I_d).
MomentTensor gaussian_fourth(int d) {
  return MomentTensor::from_symmetric_function(4, d, [](std::span<const int> i) {
    auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    return delta(i[0], i[1]) * delta(i[2], i[3]) + delta(i[0], i[2]) * delta(i[1], i[3]) +
           delta(i[0], i[3]) * delta(i[1], i[2]);
  });
}

}  // namespace

TEST_CASE("tensor shape checks") {
  CHECK_THROWS_AS(MomentTensor(0, 3), DomainError);
  CHECK_THROWS_AS(MomentTensor(3, 0), DomainError);
  CHECK_THROWS_AS(MomentTensor(4, 200), DomainError);  // 1.6e9 entries
  CHECK_NOTHROW(MomentTensor(3, 64));
  CHECK_THROWS_AS(MomentTensor(3, 2) - MomentTensor(3, 3), DomainError);
}

TEST_CASE("from_entries rejects asymmetric arrays") {
  std::vector<double> e(8, 0.0);
  e[1] = 1.0;  // (0,0,1) set but (0,1,0) not
  CHECK_THROWS_AS(MomentTensor::from_entries(3, 2, e), DomainError);
  e[2] = e[4] = 1.0;
  CHECK_NOTHROW(MomentTensor::from_entries(3, 2, e));
}

TEST_CASE("rank one tensor norms") {
  Vector v(3);
  v << 1.0, -2.0, 0.5;
  for (int k : {2, 3, 4}) {
    MomentTensor t = MomentTensor::rank_one(v, k);
    const double expected = std::pow(v.norm(), k);
    CHECK(frobenius_norm(t) == Approx(expected).epsilon(1e-12));
    OperatorNormResult r = operator_norm_detail(t);
    CHECK(r.value == Approx(expected).epsilon(1e-9));
    CHECK(max_norm(t) == Approx(std::pow(2.0, k)));
    Vector x = Vector::Random(3).normalized();
    CHECK(t.evaluate(x) == Approx(std::pow(v.dot(x), k)).epsilon(1e-12));
  }
}

TEST_CASE("gaussian fourth moment tensor") {
  for (int d : {1, 2, 5}) {
    MomentTensor t = gaussian_fourth(d);
    CHECK(frobenius_norm(t) == Approx(std::sqrt(3.0 * d * d + 6.0 * d)));
    CHECK(operator_norm(t) == Approx(3.0).epsilon(1e-9));
    CHECK(max_norm(t) == Approx(3.0));
    // nonzero pattern: (i,i,i,i) and the 3 pairings of i != j
    CHECK(nonzero_count(t) == static_cast<std::size_t>(d + 3 * d * (d - 1)));
  }
}

TEST_CASE("diagonal odd tensor operator norm picks the largest weight") {
  const int d = 4;
  std::vector<double> w = {0.5, -3.0, 1.0, 2.0};
  MomentTensor t = MomentTensor::from_symmetric_function(3, d, [&](std::span<const int> i) {
    return (i[0] == i[1] && i[1] == i[2]) ? w[i[0]] : 0.0;
  });
  CHECK(operator_norm(t) == Approx(3.0).epsilon(1e-9));
}

TEST_CASE("operator norm sandwich on random tensors") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Sample s = random_sample(50, 4, seed);
    MomentTensor t = empirical_moment(s, 3, Center::mean);
    const double op = operator_norm(t);
    CHECK(op >= max_norm(t) - 1e-12);
    CHECK(op <= frobenius_norm(t) + 1e-12);
    Rng rng(seed + 100);
    for (int r = 0; r < 50; ++r) {
      Vector x(4);
      for (int j = 0; j < 4; ++j) x(j) = rng.normal();
      x.normalize();
      CHECK(std::abs(t.evaluate(x)) <= op * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("operator norm option validation") {
  OperatorNormOptions opt;
  opt.restarts = 3;
  CHECK_THROWS_AS(operator_norm(MomentTensor(3, 2), opt), DomainError);
  CHECK(operator_norm(MomentTensor(3, 2)) == 0.0);
}

TEST_CASE("empirical moments match direct sums") {
  Sample s = random_sample(40, 3, 7);
  MomentTensor t2 = empirical_moment(s, 2, Center::mean);
  Matrix cov = s.covariance();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(t2.at({i, j}) == Approx(cov(i, j)).epsilon(1e-12));

  MomentTensor t3 = empirical_moment(s, 3, Center::none);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double direct = 0.0;
        for (Eigen::Index r = 0; r < s.n(); ++r) direct += s.data()(r, i) * s.data()(r, j) * s.data()(r, k);
        CHECK(t3.at({i, j, k}) == Approx(direct / s.n()).epsilon(1e-12));
      }

  MomentTensor t6 = empirical_moment(s, 6, Center::none);
  double direct = 0.0;
  for (Eigen::Index r = 0; r < s.n(); ++r) direct += std::pow(s.data()(r, 0), 4) * s.data()(r, 1) * s.data()(r, 2);
  CHECK(t6.at({2, 0, 1, 0, 0, 0}) == Approx(direct / s.n()).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_moment(s, 5, Center::none), DomainError);
}

TEST_CASE("empirical moments are exactly symmetric") {
  Sample s = random_sample(30, 3, 11);
  MomentTensor t = empirical_moment(s, 4, Center::mean);
  std::vector<int> idx(4);
  for (std::size_t f = 0; f < t.size(); ++f) {
    t.unflatten(f, idx);
    std::vector<int> p = idx;
    std::sort(p.begin(), p.end());
    do {
      REQUIRE(t.at(std::span<const int>(p)) == t.entries()[f]);
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST_CASE("moment standard errors") {
  RowMatrix c = RowMatrix::Constant(10, 2, 1.5);
  MomentWithError constant = empirical_moment_with_error(Sample(c), 3, Center::none);
  CHECK(max_norm(constant.stderr_) == Approx(0.0).margin(1e-12));
  CHECK(constant.mean.at({0, 1, 1}) == Approx(1.5 * 1.5 * 1.5));

  Sample s = random_sample(400, 2, 3);
  MomentWithError m = empirical_moment_with_error(s, 2, Center::none);
  double mean = 0.0, sq = 0.0;
  for (Eigen::Index r = 0; r < s.n(); ++r) {
    double v = s.data()(r, 0) * s.data()(r, 1);
    mean += v;
    sq += v * v;
  }
  mean /= s.n();
  const double se = std::sqrt((sq / s.n() - mean * mean) / s.n());
  CHECK(m.stderr_.at({0, 1}) == Approx(se).epsilon(1e-10));
}

TEST_CASE("norms are invariant under rotation of the sample") {
  Sample s = random_sample(60, 3, 21);
  Matrix q = random_rotation(3, 5);
  RowMatrix rotated = s.data() * q.transpose();
  Sample r(rotated);
  for (int k : {3, 4}) {
    MomentTensor a = empirical_moment(s, k, Center::mean), b = empirical_moment(r, k, Center::mean);
    CHECK(frobenius_norm(a) == Approx(frobenius_norm(b)).epsilon(1e-10));
    CHECK(operator_norm(a) == Approx(operator_norm(b)).epsilon(1e-6));
  }
}

TEST_CASE("spd matrix basics") {
  Matrix m(2, 2);
  m << 4.0, 1.0, 1.0, 3.0;
  SpdMatrix s(m);
  CHECK(s.lambda_max() >= s.lambda_min());
  CHECK((s.sqrt() * s.sqrt() - m).norm() < 1e-12);
  CHECK((s.inverse() * m - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((s.inverse_sqrt() * m * s.inverse_sqrt() - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(s.op_norm() * s.inverse_op_norm() == Approx(s.condition()));
  CHECK(s.frobenius() == Approx(m.norm()));
  CHECK(s.trace() == Approx(7.0));

  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(SpdMatrix(bad), DomainError);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(SpdMatrix(asym), DomainError);
  Matrix nearly(2, 2);
  nearly << 1.0, 0.0, 0.0, 1e-14;
  CHECK_THROWS_AS(SpdMatrix(nearly).inverse(), SingularMatrixError);
}

TEST_CASE("sample validation and whitening") {
  CHECK_THROWS_AS(Sample(RowMatrix::Zero(1, 2)), DomainError);
  RowMatrix nan = RowMatrix::Zero(3, 1);
  nan(1, 0) = std::nan("");
  CHECK_THROWS_AS(Sample(nan), DomainError);

  Sample s = random_sample(200, 3, 9);
  RowMatrix centered = s.data().rowwise() - s.data().colwise().mean();
  Sample w = whiten(Sample(centered), SpdMatrix(s.covariance()));
  CHECK((w.covariance() - Matrix::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("csv round trip is exact") {
  Sample s = random_sample(20, 3, 4);
  auto path = std::filesystem::temp_directory_path() / "edgebound_roundtrip.csv";
  write_csv(path.string(), s);
  Sample back = read_csv(path.string());
  CHECK(back.n() == s.n());
  CHECK(back.d() == s.d());
  CHECK(back.data() == s.data());
  CHECK(back.columns() == s.columns());
  std::filesystem::remove(path);

  auto bad = std::filesystem::temp_directory_path() / "edgebound_bad.csv";
  {
    std::ofstream f(bad);
    f << "x1,x2\n1,2\n3,abc\n";
  }
  CHECK_THROWS_AS(read_csv(bad.string()), DomainError);
  std::filesystem::remove(bad);
}
