// Prints the bound coefficients over a beta grid, then the ball and
// half-space normal-approximation bounds for a few summand laws as n grows.
#include <cstdio>

#include "edgebound/edgebound.hpp"

using namespace edgebound;

int main() {
  std::printf("%6s %8s %8s %8s %8s %8s %8s %8s\n", "beta", "third", "b4", "brem4", "bremd", "h4", "hconst", "hrem");
  for (double beta : {0.5, 0.6, 0.7, 0.8, 0.829, 0.9}) {
    BoundCoefficients c = bound_coefficients(beta);
    std::printf("%6.3f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", beta, c.third, c.ball_fourth, c.ball_rem_fourth,
                c.ball_rem_dim, c.half_fourth, c.half_const, c.half_rem_const);
  }

  std::printf("\n%-22s %3s %10s %12s %12s\n", "family", "d", "n", "ball", "halfspace");
  for (const char* family : {"gaussian", "laplace_product", "centered_exponential"}) {
    for (int d : {2, 8}) {
      DistributionSpec spec;
      spec.family = family;
      spec.d = d;
      MomentSummary ms = summarize_sample(draw(spec, 50000, 17));
      for (double n : {1e3, 1e5, 1e7}) {
        ms.n = n;
        const double ball = optimize_beta([&](double b) { return bound_ball_normal(ms, b, {}); }).breakdown.total;
        const double half = optimize_beta([&](double b) { return bound_halfspace_normal(ms, b, {}); }).breakdown.total;
        std::printf("%-22s %3d %10.0f %12.5g %12.5g\n", family, d, n, ball, half);
      }
    }
  }
}
