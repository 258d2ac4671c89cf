// Builds a bootstrap confidence ellipsoid for the mean of a skewed sample and
// reports the radius, whether it holds the true mean, and the certificate.
#include <cstdio>
#include <cstdlib>

#include "edgebound/edgebound.hpp"

using namespace edgebound;

int main(int argc, char** argv) {
  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 2000;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  DistributionSpec spec;
  spec.family = "centered_exponential";
  spec.d = 3;
  Sample x = draw(spec, n, seed);

  Matrix w(3, 3);
  w << 2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.5;
  SpdMatrix W(w);
  BootstrapResult r = bootstrap_ball_quantile(x, W, 0.1, kDefaultBootstrapReplicates, seed);

  const Vector diff = x.mean() - spec.population_mean();
  const double stat = std::sqrt(static_cast<double>(n) * diff.dot(w * diff));
  std::printf("n = %ld, 90%% region: sqrt(n) |W^1/2 (mu - xbar)| <= %.4f\n", static_cast<long>(n), r.quantile);
  std::printf("true mean statistic %.4f -> %s\n", stat, stat <= r.quantile ? "covered" : "not covered");

  MomentSummary ms = summarize_sample(Sample(RowMatrix(x.data() * W.sqrt())));
  ms.sigma2 = sub_gaussian_factor(x).sigma2 * W.op_norm();
  try {
    BoundBreakdown b = delta_W(ms, kReferenceBeta, {});
    std::printf("coverage error certificate: %.4g\n", b.total);
  } catch (const InfeasibleError& e) {
    std::printf("no certificate at this n: %s\n", e.condition().c_str());
  }
}
