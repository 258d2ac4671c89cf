#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "edgebound/errors.hpp"
#include "edgebound/rng.hpp"
#include "edgebound/sample.hpp"
#include "edgebound/spd_matrix.hpp"

namespace edgebound {

// Mean-zero law on two atoms: P(a) = p, P(b) = 1 - p.
struct TwoPointLaw {
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;

  double q() const { return 1.0 - p; }
  double moment(int k) const { return p * std::pow(a, k) + q() * std::pow(b, k); }
  double draw(Rng& rng) const { return rng.uniform() < p ? a : b; }
};

// Two-point law with moments (0, 1 - beta^2, 1, (1-beta^2)^2 + (1-beta^2)^-1):
// the atoms solve x^2 - x / bu2 - bu2 = 0 with bu2 = 1 - beta^2.
inline TwoPointLaw alpha_law(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("alpha_law: beta must be in (0, 1)");
  const double bu2 = 1.0 - beta * beta;
  const double half_sum = 0.5 / bu2;
  const double disc = std::sqrt(half_sum * half_sum + bu2);
  TwoPointLaw law;
  law.a = half_sum + disc;
  law.b = -bu2 / law.a;  // product of roots is -bu2; avoids cancellation
  law.p = -law.b / (law.a - law.b);
  return law;
}

// det of the 3x3 Hankel matrix of (1, m1, m2, m3, m4).
inline double hankel_determinant(double m1, double m2, double m3, double m4) {
  Eigen::Matrix3d h;
  h << 1.0, m1, m2, m1, m2, m3, m2, m3, m4;
  return h.determinant();
}

inline double standard_laplace(Rng& rng) {
  double e = -std::log1p(-rng.uniform());
  double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return sign * e / std::sqrt(2.0);  // scale 1/sqrt(2) gives variance 1
}

inline double centered_exponential(Rng& rng) { return -std::log1p(-rng.uniform()) - 1.0; }

inline void require_rows(Eigen::Index n, const char* who) {
  if (n < 2) throw DomainError(std::string(who) + ": need n >= 2 (a Sample holds at least two rows)");
}

inline Sample sample_gaussian(const SpdMatrix& sigma, Eigen::Index n, std::uint64_t seed,
                              const std::optional<Vector>& mean = std::nullopt) {
  require_rows(n, "sample_gaussian");
  const int d = sigma.dim();
  Matrix root = sigma.sqrt();
  Rng rng(seed);
  RowMatrix g(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  RowMatrix x = g * root;
  if (mean) {
    if (mean->size() != d) throw DomainError("sample_gaussian: mean has wrong dimension");
    x.rowwise() += mean->transpose();
  }
  return Sample(std::move(x), {seed, "gaussian"});
}

// X = Z u with Z ~ N(0, I_d), u ~ N(0, 1) independent.
inline Sample sample_portnoy(int d, Eigen::Index n, std::uint64_t seed) {
  require_rows(n, "sample_portnoy");
  if (d < 1) throw DomainError("sample_portnoy: d must be >= 1");
  Rng rng(seed);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
    x.row(i) *= rng.normal();
  }
  return Sample(std::move(x), {seed, "portnoy_mixed"});
}

// L = c1 Zt + c2 Y (Y'Z) / |Y| with Y standardized Laplace coordinates,
// c1 = (1 - sqrt(2/5))^(1/2), c2 = (2/5)^(1/4).
inline Sample sample_symmetric_L(int d, Eigen::Index n, std::uint64_t seed) {
  require_rows(n, "sample_symmetric_L");
  if (d < 1) throw DomainError("sample_symmetric_L: d must be >= 1");
  const double c1 = std::sqrt(1.0 - std::sqrt(0.4));
  const double c2 = std::pow(0.4, 0.25);
  Rng rng(seed);
  RowMatrix x(n, d);
  Vector y(d), z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) y(j) = standard_laplace(rng);
    for (int j = 0; j < d; ++j) z(j) = rng.normal();
    const double ynorm = y.norm();
    const double proj = ynorm > 0.0 ? y.dot(z) / ynorm : 0.0;
    for (int j = 0; j < d; ++j) x(i, j) = c1 * rng.normal() + c2 * y(j) * proj;
  }
  return Sample(std::move(x), {seed, "symmetric_L"});
}

inline Sample sample_laplace_product(int d, Eigen::Index n, std::uint64_t seed) {
  require_rows(n, "sample_laplace_product");
  Rng rng(seed);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = standard_laplace(rng);
  return Sample(std::move(x), {seed, "laplace_product"});
}

inline Sample sample_centered_exponential(int d, Eigen::Index n, std::uint64_t seed) {
  require_rows(n, "sample_centered_exponential");
  Rng rng(seed);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = centered_exponential(rng);
  return Sample(std::move(x), {seed, "centered_exponential"});
}

// Family tag plus parameters. user_csv draws rows with replacement from a file.
struct DistributionSpec {
  std::string family = "gaussian";
  int d = 1;
  std::optional<Matrix> sigma;  // gaussian only; identity when absent
  std::optional<Vector> mean;   // gaussian only
  std::string path;             // user_csv only
  std::optional<std::uint64_t> seed;

  static const std::vector<std::string>& families() {
    static const std::vector<std::string> names = {"gaussian",        "portnoy_mixed",        "symmetric_L",
                                                   "laplace_product", "centered_exponential", "user_csv"};
    return names;
  }

  bool parametric() const { return family != "user_csv"; }

  void validate() const {
    const auto& names = families();
    if (std::find(names.begin(), names.end(), family) == names.end())
      throw DomainError("unknown distribution family '" + family + "'");
    if (d < 1) throw DomainError("distribution spec: d must be >= 1");
    if (sigma) {
      if (family != "gaussian") throw DomainError("distribution spec: sigma is only valid for gaussian");
      if (sigma->rows() != d) throw DomainError("distribution spec: sigma has wrong dimension");
      SpdMatrix check(*sigma);
      (void)check;
    }
    if (mean && mean->size() != d) throw DomainError("distribution spec: mean has wrong dimension");
    if (family == "user_csv" && path.empty()) throw DomainError("distribution spec: user_csv needs a path");
  }

  Vector population_mean() const { return mean ? *mean : Vector::Zero(d); }

  // Known covariance of the family, if any.
  std::optional<Matrix> population_covariance() const {
    if (family == "user_csv") return std::nullopt;
    if (family == "gaussian" && sigma) return *sigma;
    return Matrix::Identity(d, d);
  }
};

inline Sample draw(const DistributionSpec& spec, Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  const std::string& f = spec.family;
  if (f == "gaussian")
    return sample_gaussian(SpdMatrix(spec.sigma ? *spec.sigma : Matrix::Identity(spec.d, spec.d)), n, seed,
                           spec.mean);
  if (f == "portnoy_mixed") return sample_portnoy(spec.d, n, seed);
  if (f == "symmetric_L") return sample_symmetric_L(spec.d, n, seed);
  if (f == "laplace_product") return sample_laplace_product(spec.d, n, seed);
  if (f == "centered_exponential") return sample_centered_exponential(spec.d, n, seed);
  Sample pool = read_csv(spec.path);
  if (pool.d() != spec.d) throw DomainError("user_csv: file width does not match d");
  require_rows(n, "draw");
  Rng rng(seed);
  RowMatrix x(n, spec.d);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = pool.row(static_cast<Eigen::Index>(rng.index(pool.n())));
  return Sample(std::move(x), {seed, "user_csv:" + spec.path}, pool.columns());
}

struct ConstructedY {
  Sample y;
  std::string copy_policy;  // "fresh_draw" or "half_split_resample"
  Eigen::Index reference_rows = 0;  // rows of the input that Y should be compared with
};

// Y_i = m + Z_i + alpha_i (Xt_i - m), Z_i ~ N(0, beta^2 S), alpha from
// alpha_law(beta), where m and S are the mean and covariance of the copy
// source. With a parametric spec the copy Xt is a fresh draw of n rows.
// Without one, the input is split: the first half is the reference and Xt is
// resampled with replacement from the second half, which also supplies m, S.
inline ConstructedY construct_Y(const Sample& x, double beta, std::uint64_t seed,
                                const std::optional<DistributionSpec>& spec = std::nullopt) {
  TwoPointLaw law = alpha_law(beta);
  const int d = x.d();
  std::optional<Sample> pool;
  Eigen::Index out_rows = x.n();
  std::string policy;
  if (spec) {
    if (spec->d != d) throw DomainError("construct_Y: spec dimension mismatch");
    pool.emplace(draw(*spec, x.n(), derive_seed(seed, "construct_Y.copy")));
    policy = spec->parametric() ? "fresh_draw" : "resample_user_csv";
  } else {
    const Eigen::Index half = x.n() / 2;
    if (half < 2 || x.n() - half < 2) throw DomainError("construct_Y: need at least 4 rows for the half split");
    pool.emplace(RowMatrix(x.data().bottomRows(x.n() - half)), Provenance{x.provenance().seed, "half_split"});
    out_rows = half;
    policy = "half_split_resample";
  }
  SpdMatrix cov(pool->covariance());
  Matrix root = cov.sqrt() * beta;
  Vector m = pool->mean();
  Rng rng(seed, "construct_Y.noise");
  RowMatrix y(out_rows, d);
  Vector g(d);
  for (Eigen::Index i = 0; i < out_rows; ++i) {
    for (int j = 0; j < d; ++j) g(j) = rng.normal();
    const double alpha = law.draw(rng);
    Eigen::Index src = spec ? i : static_cast<Eigen::Index>(rng.index(pool->n()));
    Vector xt = pool->row(src).transpose() - m;
    y.row(i) = (m + root * g + alpha * xt).transpose();
  }
  return {Sample(std::move(y), {seed, "construct_Y"}, x.columns()), policy, out_rows};
}

// Deviation radius sqrt(2 nu t) + c t.
inline double bernstein_tail(double nu, double c, double t) {
  if (nu < 0.0 || c < 0.0 || t < 0.0) throw DomainError("bernstein_tail: arguments must be >= 0");
  return std::sqrt(2.0 * nu * t) + c * t;
}

// Deviation radius 4 sigma^2 (sqrt(8 t) + t).
inline double product_tail(double sigma2, double t) {
  if (sigma2 < 0.0 || t < 0.0) throw DomainError("product_tail: arguments must be >= 0");
  return 4.0 * sigma2 * (std::sqrt(8.0 * t) + t);
}

struct SubGaussianEstimate {
  double sigma2 = 0.0;
  bool grid_truncated = false;
  bool heuristic = true;  // a finite sample cannot certify this value
};

// max over coordinates of max(variance, sup over a gamma grid of
// 2 log(mean exp(gamma (x - mean))) / gamma^2). The grid is scaled by each
// coordinate's standard deviation so the estimate is scale-equivariant.
inline SubGaussianEstimate sub_gaussian_factor(const Sample& s) {
  if (s.n() < 100) throw DomainError("sub_gaussian_factor: need n >= 100");
  static const double grid[] = {0.125, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
  SubGaussianEstimate est;
  const Vector mean = s.mean();
  const double nn = static_cast<double>(s.n());
  for (int j = 0; j < s.d(); ++j) {
    double var = 0.0;
    for (Eigen::Index i = 0; i < s.n(); ++i) {
      double c = s.data()(i, j) - mean(j);
      var += c * c;
    }
    var /= nn;
    double best = var;
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      for (double base : grid) {
        for (double sign : {1.0, -1.0}) {
          const double gamma = sign * base / sd;
          double top = -std::numeric_limits<double>::infinity();
          for (Eigen::Index i = 0; i < s.n(); ++i) top = std::max(top, gamma * (s.data()(i, j) - mean(j)));
          if (top > 700.0) {
            est.grid_truncated = true;
            continue;
          }
          double acc = 0.0;  // log-sum-exp with the running max factored out
          for (Eigen::Index i = 0; i < s.n(); ++i) acc += std::exp(gamma * (s.data()(i, j) - mean(j)) - top);
          const double log_mgf = top + std::log(acc / nn);
          best = std::max(best, 2.0 * log_mgf / (gamma * gamma));
        }
      }
    }
    est.sigma2 = std::max(est.sigma2, best);
  }
  return est;
}

}  // namespace edgebound
