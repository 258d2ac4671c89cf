#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "edgebound/errors.hpp"

namespace edgebound {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Probabilists' Hermite polynomial He_k by the three-term recurrence.
inline double hermite(int k, double x) {
  if (k < 0) throw DomainError("hermite: negative order");
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = x;
  for (int j = 1; j < k; ++j) {
    double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Integral of He_k * phi over [a, b]; infinite endpoints allowed.
inline double hermite_interval_integral(int k, double a, double b) {
  if (k < 0 || k > 6) throw DomainError("hermite_interval_integral: k must be in [0, 6]");
  if (!(a <= b)) throw DomainError("hermite_interval_integral: need a <= b");
  if (k == 0) return normal_cdf(b) - normal_cdf(a);
  auto anti = [k](double x) {
    if (std::isinf(x)) return 0.0;
    return -hermite(k - 1, x) * normal_pdf(x);
  };
  return anti(b) - anti(a);
}

namespace detail {

// Series for P(a, x), valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

inline double chi2_cdf(double x, double d) {
  return x <= 0.0 ? 0.0 : gamma_p(0.5 * d, 0.5 * x);
}

inline double chi2_sf(double x, double d) {
  return x <= 0.0 ? 1.0 : gamma_q(0.5 * d, 0.5 * x);
}

inline double chi2_pdf(double x, double d) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return d == 2.0 ? 0.5 : (d < 2.0 ? std::numeric_limits<double>::infinity() : 0.0);
  double a = 0.5 * d;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

// CDF of the chi distribution (norm of a standard Gaussian in R^d).
inline double chi_cdf(double r, double d) { return r <= 0.0 ? 0.0 : chi2_cdf(r * r, d); }

inline double chi_pdf(double r, double d) {
  if (r <= 0.0) return d == 1.0 ? 2.0 * normal_pdf(0.0) : 0.0;
  return 2.0 * r * chi2_pdf(r * r, d);
}

// Upper alpha-quantile: q with P(chi2_d <= q) = 1 - alpha.
// Bracketed Newton on whichever tail is smaller for accuracy.
inline double chi2_quantile(double alpha, double d) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chi2_quantile: alpha must be in (0, 1)");
  if (!(d >= 1.0)) throw DomainError("chi2_quantile: d must be >= 1");
  const bool upper = alpha < 0.5;
  // f(q) increasing in q, root at the quantile.
  auto f = [&](double q) { return upper ? alpha - chi2_sf(q, d) : chi2_cdf(q, d) - (1.0 - alpha); };
  double lo = 0.0;
  double hi = std::max(1.0, d);
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  double q = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fq = f(q);
    if (fq == 0.0) break;
    if (fq < 0.0) lo = q; else hi = q;
    double dens = chi2_pdf(q, d);
    double step = dens > 0.0 ? fq / dens : 0.0;
    double next = q - step;
    if (!(dens > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - q) <= 1e-15 * std::max(1.0, q)) {
      q = next;
      break;
    }
    q = next;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return q;
}

}  // namespace edgebound
