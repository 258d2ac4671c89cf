#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "edgebound/bounds.hpp"
#include "edgebound/distributions.hpp"
#include "edgebound/errors.hpp"
#include "edgebound/moments.hpp"
#include "edgebound/parallel.hpp"
#include "edgebound/rng.hpp"
#include "edgebound/sample.hpp"
#include "edgebound/special.hpp"
#include "edgebound/spd_matrix.hpp"

namespace edgebound {

inline constexpr int kMinBootstrapReplicates = 200;
inline constexpr int kDefaultBootstrapReplicates = 2000;

// n rows drawn uniformly with replacement from {X_j - Xbar}.
inline Sample efron_resample(const Sample& s, std::uint64_t seed) {
  RowMatrix centered = s.data().rowwise() - s.data().colwise().mean();
  RowMatrix out(s.n(), s.d());
  Rng rng(seed, "efron_resample");
  for (Eigen::Index i = 0; i < s.n(); ++i) out.row(i) = centered.row(static_cast<Eigen::Index>(rng.index(s.n())));
  return Sample(std::move(out), {seed, "efron_resample"}, s.columns());
}

// Order statistic at index ceil((1 - alpha) B): the smallest t with at least
// a (1 - alpha) fraction of replicates <= t.
inline double empirical_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw DomainError("empirical_quantile: no values");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("empirical_quantile: alpha must be in (0, 1)");
  std::sort(values.begin(), values.end());
  const double pos = (1.0 - alpha) * static_cast<double>(values.size());
  auto k = static_cast<std::size_t>(std::ceil(pos - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

struct BootstrapResult {
  std::vector<double> replicates;
  double alpha = 0.0;
  double quantile = 0.0;
  int B = 0;
  std::uint64_t seed = 0;
  std::optional<BoundBreakdown> certificate;
  std::string certificate_status = "not requested";

  json to_json(bool with_replicates = false) const {
    json j = {{"alpha", alpha}, {"B", B}, {"seed", seed}, {"quantile", quantile}};
    if (with_replicates) j["replicates"] = replicates;
    j["certificate_status"] = certificate_status;
    j["certificate"] = certificate ? certificate->to_json() : json(nullptr);
    return j;
  }
};

namespace detail {

inline void check_bootstrap_args(double alpha, int B, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError(std::string(who) + ": alpha must be in (0, 1)");
  if (B < kMinBootstrapReplicates) throw DomainError(std::string(who) + ": B must be >= 200");
}

// n * Xbar*' W Xbar* for B Efron resamples of the centered rows. Replicate b
// draws from its own substream, so results do not depend on scheduling.
inline std::vector<double> quadratic_replicates(const RowMatrix& centered, const Matrix& W, int B,
                                                std::uint64_t seed, bool parallel) {
  const Eigen::Index n = centered.rows();
  const double nn = static_cast<double>(n);
  std::vector<double> out(static_cast<std::size_t>(B));
  auto one = [&](std::size_t b) {
    Rng rng(seed, "bootstrap.replicate", b);
    Vector sum = Vector::Zero(centered.cols());
    for (Eigen::Index i = 0; i < n; ++i) sum += centered.row(static_cast<Eigen::Index>(rng.index(n))).transpose();
    Vector mean = sum / nn;
    out[b] = nn * mean.dot(W * mean);
  };
  if (parallel) {
    parallel_for(out.size(), one);
  } else {
    for (std::size_t b = 0; b < out.size(); ++b) one(b);
  }
  return out;
}

inline RowMatrix centered_rows(const Sample& s) { return s.data().rowwise() - s.data().colwise().mean(); }

inline double safe_sqrt(double q) { return std::sqrt(std::max(0.0, q)); }

}  // namespace detail

// Bootstrap quantile of sqrt(n) |W^1/2 Xbar*|.
inline BootstrapResult bootstrap_ball_quantile(const Sample& s, const SpdMatrix& W, double alpha, int B,
                                               std::uint64_t seed) {
  detail::check_bootstrap_args(alpha, B, "bootstrap_ball_quantile");
  if (W.dim() != s.d()) throw DomainError("bootstrap_ball_quantile: W dimension mismatch");
  std::vector<double> q = detail::quadratic_replicates(detail::centered_rows(s), W.matrix(), B, seed, true);
  BootstrapResult r;
  r.replicates.reserve(q.size());
  for (double v : q) r.replicates.push_back(detail::safe_sqrt(v));
  r.alpha = alpha;
  r.B = B;
  r.seed = seed;
  r.quantile = empirical_quantile(r.replicates, alpha);
  return r;
}

struct CertificateRequest {
  double sigma2;
  double beta = kReferenceBeta;
  ConstantsLedger ledger{};
};

namespace detail {

template <class F>
inline void attach_certificate(BootstrapResult& r, F&& make) {
  try {
    r.certificate = make();
    r.certificate_status = "ok";
  } catch (const InfeasibleError& e) {
    r.certificate_status = std::string("infeasible: ") + e.condition();
  }
}

}  // namespace detail

struct ScoreTestResult {
  bool reject = false;
  double statistic = 0.0;  // n |mean score|^2 on raw scores
  BootstrapResult bootstrap;

  json to_json() const {
    return {{"test", "bootstrap-score"},
            {"decision", reject ? "reject" : "accept"},
            {"statistic", statistic},
            {"quantile", bootstrap.quantile},
            {"alpha", bootstrap.alpha},
            {"B", bootstrap.B},
            {"seed", bootstrap.seed},
            {"certificate_status", bootstrap.certificate_status},
            {"certificate", bootstrap.certificate ? bootstrap.certificate->to_json() : json(nullptr)}};
  }
};

namespace detail {

inline ScoreTestResult score_test_impl(const Sample& scores, double alpha, int B, std::uint64_t seed, bool parallel) {
  const Eigen::Index n = scores.n();
  const Vector mean = scores.mean();
  ScoreTestResult res;
  res.statistic = static_cast<double>(n) * mean.squaredNorm();
  Matrix I = Matrix::Identity(scores.d(), scores.d());
  res.bootstrap.replicates = quadratic_replicates(centered_rows(scores), I, B, seed, parallel);
  res.bootstrap.alpha = alpha;
  res.bootstrap.B = B;
  res.bootstrap.seed = seed;
  res.bootstrap.quantile = empirical_quantile(res.bootstrap.replicates, alpha);
  res.reject = res.statistic > res.bootstrap.quantile;
  return res;
}

}  // namespace detail

// Rejects when n |mean score|^2 exceeds the bootstrap quantile of the same
// statistic on centered resamples. The uncentered sum is used for the
// observed statistic, so the test has power against a nonzero score mean.
inline ScoreTestResult bootstrap_score_test(const Sample& scores, double alpha, int B, std::uint64_t seed,
                                            const std::optional<CertificateRequest>& cert = std::nullopt) {
  detail::check_bootstrap_args(alpha, B, "bootstrap_score_test");
  ScoreTestResult res = detail::score_test_impl(scores, alpha, B, seed, true);
  if (cert) {
    detail::attach_certificate(res.bootstrap, [&] {
      MomentSummary ms = summarize_sample(scores);
      ms.sigma2 = cert->sigma2;
      return delta_R(ms, cert->beta, cert->ledger);
    });
  }
  return res;
}

struct LevelResult {
  double rate = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
  int rejections = 0;
  double alpha = 0.0;

  json to_json() const {
    return {{"rejection_rate", rate}, {"stderr", stderr_}, {"trials", trials}, {"rejections", rejections},
            {"alpha", alpha}};
  }
};

// Rejection rate of the bootstrap score test on score samples from spec.
// Under a centered family this is the empirical level.
inline LevelResult score_test_level(const DistributionSpec& spec, Eigen::Index n, double alpha, int B, int trials,
                                    std::uint64_t seed) {
  detail::check_bootstrap_args(alpha, B, "score_test_level");
  if (trials < 1) throw DomainError("score_test_level: trials must be >= 1");
  spec.validate();
  std::vector<char> rejected(static_cast<std::size_t>(trials));
  parallel_for(rejected.size(), [&](std::size_t t) {
    Sample scores = draw(spec, n, derive_seed(seed, "level.scores", t));
    rejected[t] = detail::score_test_impl(scores, alpha, B, derive_seed(seed, "level.bootstrap", t), false).reject;
  });
  LevelResult r;
  r.trials = trials;
  r.rejections = static_cast<int>(std::count(rejected.begin(), rejected.end(), 1));
  r.rate = static_cast<double>(r.rejections) / trials;
  r.stderr_ = std::sqrt(r.rate * (1.0 - r.rate) / trials);
  r.alpha = alpha;
  return r;
}

struct RaoTestResult {
  bool reject = false;
  double statistic = 0.0;
  double chi2_quantile = 0.0;
  double alpha = 0.0;
  std::optional<BoundBreakdown> certificate;

  json to_json() const {
    return {{"test", "rao"},
            {"decision", reject ? "reject" : "accept"},
            {"statistic", statistic},
            {"quantile", chi2_quantile},
            {"alpha", alpha},
            {"certificate", certificate ? certificate->to_json() : json(nullptr)}};
  }
};

// R = s' I^-1 s with s the total score and I the information of the total.
inline RaoTestResult rao_score_test(const Sample& scores, const SpdMatrix& info, double alpha,
                                    const std::optional<MomentSummary>& moments = std::nullopt,
                                    double beta = kReferenceBeta, const ConstantsLedger& ledger = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("rao_score_test: alpha must be in (0, 1)");
  if (info.dim() != scores.d()) throw DomainError("rao_score_test: information dimension mismatch");
  const Vector total = scores.data().colwise().sum().transpose();
  RaoTestResult res;
  res.alpha = alpha;
  res.statistic = total.dot(info.inverse() * total);
  res.chi2_quantile = chi2_quantile(alpha, scores.d());
  res.reject = res.statistic > res.chi2_quantile;
  if (moments) res.certificate = score2_bound(*moments, beta, ledger);
  return res;
}

// One draw of the coverage event sqrt(n)|W^1/2 (Xbar - mu)| <= q*_alpha.
inline bool coverage_trial(const Sample& x, const Vector& mu, const Matrix& W, double alpha, int B,
                           std::uint64_t seed) {
  const Vector diff = x.mean() - mu;
  const double stat = detail::safe_sqrt(static_cast<double>(x.n()) * diff.dot(W * diff));
  std::vector<double> q = detail::quadratic_replicates(detail::centered_rows(x), W, B, seed, false);
  for (double& v : q) v = detail::safe_sqrt(v);
  return stat <= empirical_quantile(std::move(q), alpha);
}

struct CoverageResult {
  double coverage = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
  int covered = 0;
  double alpha = 0.0;
  Eigen::Index n = 0;
  int B = 0;
  std::uint64_t seed = 0;
  std::optional<BoundBreakdown> certificate;
  std::string certificate_status = "not requested";

  json to_json() const {
    return {{"experiment", "elliptical-coverage"},
            {"coverage", coverage},
            {"stderr", stderr_},
            {"nominal", 1.0 - alpha},
            {"trials", trials},
            {"covered", covered},
            {"alpha", alpha},
            {"n", n},
            {"B", B},
            {"seed", seed},
            {"certificate_status", certificate_status},
            {"certificate", certificate ? certificate->to_json() : json(nullptr)}};
  }
};

// Fraction of trials whose bootstrap ellipsoid holds the population mean.
// With a certificate request, delta_W is evaluated on the population
// moments of W^1/2 X when the family provides them, else on a pilot sample;
// infeasibility is reported without stopping the run.
inline CoverageResult elliptical_coverage_experiment(const DistributionSpec& spec, const SpdMatrix& W, double alpha,
                                                     Eigen::Index n, int B, int trials, std::uint64_t seed,
                                                     const std::optional<CertificateRequest>& cert = std::nullopt) {
  detail::check_bootstrap_args(alpha, B, "elliptical_coverage_experiment");
  if (trials < 200) throw DomainError("elliptical_coverage_experiment: trials must be >= 200");
  spec.validate();
  if (W.dim() != spec.d) throw DomainError("elliptical_coverage_experiment: W dimension mismatch");
  if (!spec.parametric()) throw DomainError("elliptical_coverage_experiment: family has no known mean");
  const Vector mu = spec.population_mean();
  std::vector<char> inside(static_cast<std::size_t>(trials));
  parallel_for(inside.size(), [&](std::size_t t) {
    Sample x = draw(spec, n, derive_seed(seed, "coverage.data", t));
    inside[t] = coverage_trial(x, mu, W.matrix(), alpha, B, derive_seed(seed, "coverage.bootstrap", t)) ? 1 : 0;
  });
  CoverageResult res;
  res.trials = trials;
  res.covered = static_cast<int>(std::count(inside.begin(), inside.end(), 1));
  res.coverage = static_cast<double>(res.covered) / trials;
  res.stderr_ = std::sqrt(res.coverage * (1.0 - res.coverage) / trials);
  res.alpha = alpha;
  res.n = n;
  res.B = B;
  res.seed = seed;
  if (cert) {
    try {
      const Matrix w_half = W.sqrt();
      MomentSummary ms;
      const std::optional<Matrix> cov = spec.population_covariance();
      if (spec.family == "gaussian" && cov) {
        ms = gaussian_population_summary(SpdMatrix(w_half * *cov * w_half), static_cast<double>(n));
      } else {
        Sample pilot = draw(spec, std::max<Eigen::Index>(n, 2), derive_seed(seed, "coverage.pilot"));
        RowMatrix transformed = pilot.data() * w_half;
        ms = summarize_sample(Sample(std::move(transformed)));
        ms.n = static_cast<double>(n);
      }
      ms.sigma2 = cert->sigma2;
      res.certificate = delta_W(ms, cert->beta, cert->ledger);
      res.certificate_status = "ok";
    } catch (const InfeasibleError& e) {
      res.certificate_status = std::string("infeasible: ") + e.condition();
    }
  }
  return res;
}

// Score of N(theta, Sigma) in theta at theta0: Sigma^-1 (x_i - theta0).
// The per-observation information is Sigma^-1.
inline Sample gaussian_location_scores(const Sample& x, const Vector& theta0, const SpdMatrix& sigma) {
  if (theta0.size() != x.d() || sigma.dim() != x.d()) throw DomainError("gaussian_location_scores: dimension mismatch");
  RowMatrix diff = x.data().rowwise() - theta0.transpose();
  RowMatrix s = diff * sigma.inverse();
  return Sample(std::move(s), {x.provenance().seed, "gaussian_location_scores"});
}

// Coordinatewise exponential with rates lambda0: score 1/lambda - x, and
// per-observation information diag(1/lambda^2).
inline Sample exponential_rate_scores(const Sample& x, const Vector& lambda0) {
  if (lambda0.size() != x.d()) throw DomainError("exponential_rate_scores: dimension mismatch");
  if ((lambda0.array() <= 0.0).any()) throw DomainError("exponential_rate_scores: rates must be > 0");
  RowMatrix s(x.n(), x.d());
  for (Eigen::Index i = 0; i < x.n(); ++i)
    for (int j = 0; j < x.d(); ++j) s(i, j) = 1.0 / lambda0(j) - x.data()(i, j);
  return Sample(std::move(s), {x.provenance().seed, "exponential_rate_scores"});
}

}  // namespace edgebound
