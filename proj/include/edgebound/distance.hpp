#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <numeric>
#include <string>
#include <vector>

#include "edgebound/distributions.hpp"
#include "edgebound/errors.hpp"
#include "edgebound/parallel.hpp"
#include "edgebound/rng.hpp"
#include "edgebound/sample.hpp"
#include "edgebound/special.hpp"

namespace edgebound {

struct KsResult {
  double stat = 0.0;
  double fa = 0.0;  // empirical CDFs at the maximizing threshold
  double fb = 0.0;
};

// Exact two-sample KS over all thresholds for sorted inputs. Ties are
// consumed on both sides before the gap is evaluated.
inline KsResult ks_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample_1d: inputs must be nonempty");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  KsResult best;
  while (i < a.size() || j < b.size()) {
    double x = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    const double fa = i / na, fb = j / nb;
    const double gap = std::abs(fa - fb);
    if (gap > best.stat) best = {gap, fa, fb};
  }
  return best;
}

inline double ks_two_sample_1d(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return ks_sorted(a, b).stat;
}

namespace detail {

// Right-continuous empirical CDF of sorted data.
inline double ecdf(const std::vector<double>& sorted, double x) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

// Sandwich G(x - e) - e <= F(x) <= G(x + e) + e for all x. Both sides are
// right-continuous step functions of x, so their extremes occur at jump
// points: the atoms of F and the shifted atoms of G.
inline bool levy_feasible(const std::vector<double>& a, const std::vector<double>& b, double eps) {
  constexpr double slack = 1e-12;
  auto upper_ok = [&](double x) { return ecdf(a, x) <= ecdf(b, x + eps) + eps + slack; };
  auto lower_ok = [&](double x) { return ecdf(b, x - eps) - eps <= ecdf(a, x) + slack; };
  for (double x : a)
    if (!upper_ok(x) || !lower_ok(x)) return false;
  for (double y : b)
    if (!upper_ok(y - eps) || !lower_ok(y + eps)) return false;
  return true;
}

}  // namespace detail

// Smallest eps with G(x - eps) - eps <= F(x) <= G(x + eps) + eps, F the ECDF
// of a and G the ECDF of b. Bisection on eps in [0, 1]; eps = 1 is always
// feasible.
inline double levy_distance_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("levy_distance_1d: inputs must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (detail::levy_feasible(a, b, 0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    if (detail::levy_feasible(a, b, mid)) hi = mid; else lo = mid;
  }
  return hi;
}

struct DistanceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::string stderr_method;  // "bootstrap" or "plugin_binomial"
  int stderr_reps = 0;
  Eigen::Index n_a = 0, n_b = 0;
  std::string kind;  // "ball" or "halfspace"
  std::size_t search_size = 0;
  std::string search_description;
  std::size_t argmax = 0;
  bool lower_estimate = true;

  nlohmann::ordered_json to_json() const {
    return {{"kind", kind},
            {"value", value},
            {"stderr", stderr_},
            {"stderr_method", stderr_method},
            {"stderr_reps", stderr_reps},
            {"n_mc", {{"a", n_a}, {"b", n_b}}},
            {"search_set", {{"size", search_size}, {"generation", search_description}, {"argmax", argmax}}},
            {"flags", {{"lower_estimate_of_supremum", lower_estimate}}}};
  }
};

struct BallSearchPolicy {
  int random_centers = 256;
  bool include_origin = true;
  bool include_axes = true;
  int stderr_reps = 20;  // 0 selects the plug-in binomial error at the argmax
};

namespace detail {

inline RowMatrix stack_rows(const Sample& a, const Sample& b) {
  RowMatrix all(a.n() + b.n(), a.d());
  all << a.data(), b.data();
  return all;
}

// Centers: origin, then +-s e_j, then s g with g ~ N(0, I); s is the RMS
// coordinate scale of the pooled sample. Larger m extends the same list.
inline std::vector<Vector> ball_centers(const Sample& a, const Sample& b, const BallSearchPolicy& p,
                                        std::uint64_t seed) {
  const int d = a.d();
  RowMatrix all = stack_rows(a, b);
  RowMatrix centered = all.rowwise() - all.colwise().mean();
  const double trace = centered.squaredNorm() / static_cast<double>(all.rows());
  const double s = std::sqrt(trace / d);
  std::vector<Vector> centers;
  if (p.include_origin) centers.push_back(Vector::Zero(d));
  if (p.include_axes) {
    for (int j = 0; j < d; ++j) {
      centers.push_back(s * Vector::Unit(d, j));
      centers.push_back(-s * Vector::Unit(d, j));
    }
  }
  Rng rng(seed, "delta_B_hat.centers");
  for (int m = 0; m < p.random_centers; ++m) {
    Vector g(d);
    for (int j = 0; j < d; ++j) g(j) = rng.normal();
    centers.push_back(s * g);
  }
  if (centers.empty()) throw DomainError("delta_B_hat: empty center set");
  return centers;
}

// Uniform directions on the sphere, after the canonical axes.
inline std::vector<Vector> halfspace_directions(int d, int n_dirs, std::uint64_t seed) {
  std::vector<Vector> dirs;
  for (int j = 0; j < d; ++j) dirs.push_back(Vector::Unit(d, j));
  Rng rng(seed, "delta_H_hat.directions");
  for (int m = 0; m < n_dirs; ++m) {
    Vector g(d);
    for (int j = 0; j < d; ++j) g(j) = rng.normal();
    double nrm = g.norm();
    if (nrm == 0.0) g = Vector::Unit(d, 0); else g /= nrm;
    dirs.push_back(g);
  }
  return dirs;
}

enum class Reduction { ball, halfspace };

// KS statistic for every search point; rows selected by the index lists.
inline std::vector<KsResult> ks_over_points(const Sample& a, const Sample& b, const std::vector<Vector>& points,
                                            Reduction kind, const std::vector<Eigen::Index>* ia,
                                            const std::vector<Eigen::Index>* ib) {
  std::vector<KsResult> out(points.size());
  parallel_for(points.size(), [&](std::size_t p) {
    const Vector& v = points[p];
    auto project = [&](const Sample& s, const std::vector<Eigen::Index>* idx) {
      const Eigen::Index m = idx ? static_cast<Eigen::Index>(idx->size()) : s.n();
      std::vector<double> vals(static_cast<std::size_t>(m));
      for (Eigen::Index i = 0; i < m; ++i) {
        auto row = s.data().row(idx ? (*idx)[i] : i);
        vals[i] = kind == Reduction::ball ? (row.transpose() - v).squaredNorm() : row.dot(v);
      }
      std::sort(vals.begin(), vals.end());
      return vals;
    };
    out[p] = ks_sorted(project(a, ia), project(b, ib));
  });
  return out;
}

inline DistanceEstimate estimate_over_points(const Sample& a, const Sample& b, const std::vector<Vector>& points,
                                             Reduction kind, int stderr_reps, std::uint64_t seed) {
  if (a.d() != b.d()) throw DomainError("distance estimate: dimension mismatch");
  if (stderr_reps < 0) throw DomainError("distance estimate: stderr_reps must be >= 0");
  std::vector<KsResult> ks = ks_over_points(a, b, points, kind, nullptr, nullptr);
  DistanceEstimate est;
  est.kind = kind == Reduction::ball ? "ball" : "halfspace";
  est.n_a = a.n();
  est.n_b = b.n();
  est.search_size = points.size();
  for (std::size_t p = 0; p < ks.size(); ++p) {
    if (ks[p].stat > est.value) {
      est.value = ks[p].stat;
      est.argmax = p;
    }
  }
  if (stderr_reps == 0) {
    const KsResult& k = ks[est.argmax];
    est.stderr_ = std::sqrt(k.fa * (1.0 - k.fa) / a.n() + k.fb * (1.0 - k.fb) / b.n());
    est.stderr_method = "plugin_binomial";
    return est;
  }
  std::vector<double> reps(static_cast<std::size_t>(stderr_reps));
  for (int r = 0; r < stderr_reps; ++r) {
    Rng rng(seed, "distance.stderr", static_cast<std::uint64_t>(r));
    std::vector<Eigen::Index> ia(a.n()), ib(b.n());
    for (auto& i : ia) i = static_cast<Eigen::Index>(rng.index(a.n()));
    for (auto& i : ib) i = static_cast<Eigen::Index>(rng.index(b.n()));
    std::vector<KsResult> kr = ks_over_points(a, b, points, kind, &ia, &ib);
    double m = 0.0;
    for (const auto& k : kr) m = std::max(m, k.stat);
    reps[r] = m;
  }
  const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / stderr_reps;
  double ss = 0.0;
  for (double v : reps) ss += (v - mean) * (v - mean);
  est.stderr_ = stderr_reps > 1 ? std::sqrt(ss / (stderr_reps - 1)) : 0.0;
  est.stderr_method = "bootstrap";
  est.stderr_reps = stderr_reps;
  return est;
}

}  // namespace detail

// Lower estimate of the uniform distance over Euclidean balls.
inline DistanceEstimate delta_B_hat(const Sample& a, const Sample& b, const BallSearchPolicy& policy,
                                    std::uint64_t seed) {
  if (a.d() != b.d()) throw DomainError("delta_B_hat: dimension mismatch");
  std::vector<Vector> centers = detail::ball_centers(a, b, policy, seed);
  DistanceEstimate est = detail::estimate_over_points(a, b, centers, detail::Reduction::ball, policy.stderr_reps, seed);
  est.search_description = std::string(policy.include_origin ? "origin + " : "") +
                           (policy.include_axes ? "+-axes + " : "") + std::to_string(policy.random_centers) +
                           " gaussian centers scaled by sqrt(trace/d)";
  return est;
}

// Lower estimate of the uniform distance over half-spaces.
inline DistanceEstimate delta_H_hat(const Sample& a, const Sample& b, int n_dirs, std::uint64_t seed,
                                    int stderr_reps = 20) {
  if (a.d() != b.d()) throw DomainError("delta_H_hat: dimension mismatch");
  if (n_dirs < 0) throw DomainError("delta_H_hat: n_dirs must be >= 0");
  std::vector<Vector> dirs = detail::halfspace_directions(a.d(), n_dirs, seed);
  DistanceEstimate est = detail::estimate_over_points(a, b, dirs, detail::Reduction::halfspace, stderr_reps, seed);
  est.search_description = "axes + " + std::to_string(n_dirs) + " uniform sphere directions";
  return est;
}

// M rows of n^-1/2 (X_1 + ... + X_n), X_i drawn from spec; replicate r uses
// its own substream.
inline Sample sum_replicates(const DistributionSpec& spec, Eigen::Index n, Eigen::Index reps, std::uint64_t seed) {
  spec.validate();
  RowMatrix out(reps, spec.d);
  const Eigen::Index chunk = std::min<Eigen::Index>(n, 4096);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Vector acc = Vector::Zero(spec.d);
    Eigen::Index done = 0, part = 0;
    while (done < n) {
      const Eigen::Index m = std::max<Eigen::Index>(2, std::min(chunk, n - done));
      Sample s = draw(spec, m, derive_seed(seed, "sum_replicates", r * 1000003u + part));
      const Eigen::Index used = std::min<Eigen::Index>(m, n - done);
      acc += s.data().topRows(used).colwise().sum().transpose();
      done += used;
      ++part;
    }
    out.row(static_cast<Eigen::Index>(r)) = acc.transpose() / std::sqrt(static_cast<double>(n));
  });
  return Sample(std::move(out), {seed, "sum_replicates:" + spec.family});
}

struct NullCalibration {
  std::string kind;
  Eigen::Index n_cal = 0;
  int runs = 0;
  double quantile = 0.99;
  double scaled_quantile = 0.0;  // quantile of sqrt(n/2) * estimate

  // Null threshold for two samples of n rows each.
  double threshold(Eigen::Index n) const { return scaled_quantile / std::sqrt(0.5 * static_cast<double>(n)); }
};

// Empirical null law of the estimator from same-law pairs of n_cal rows,
// stored on the sqrt(n/2) scale on which the KS null is asymptotically
// free of n.
inline NullCalibration calibrate_null(const std::string& kind, const DistributionSpec& spec, Eigen::Index n_cal,
                                      int runs, double quantile, const BallSearchPolicy& policy, int n_dirs,
                                      std::uint64_t seed) {
  if (kind != "ball" && kind != "halfspace") throw DomainError("calibrate_null: kind must be ball or halfspace");
  if (runs < 20) throw DomainError("calibrate_null: need at least 20 runs");
  if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("calibrate_null: quantile must be in (0, 1)");
  std::vector<double> scaled(static_cast<std::size_t>(runs));
  BallSearchPolicy p = policy;
  p.stderr_reps = 0;
  for (int r = 0; r < runs; ++r) {
    Sample a = draw(spec, n_cal, derive_seed(seed, "calibrate.a", r));
    Sample b = draw(spec, n_cal, derive_seed(seed, "calibrate.b", r));
    std::uint64_t s = derive_seed(seed, "calibrate.search", r);
    DistanceEstimate e = kind == "ball" ? delta_B_hat(a, b, p, s) : delta_H_hat(a, b, n_dirs, s, 0);
    scaled[r] = e.value * std::sqrt(0.5 * static_cast<double>(n_cal));
  }
  std::sort(scaled.begin(), scaled.end());
  const auto k = static_cast<std::size_t>(std::ceil(quantile * runs));
  NullCalibration cal;
  cal.kind = kind;
  cal.n_cal = n_cal;
  cal.runs = runs;
  cal.quantile = quantile;
  cal.scaled_quantile = scaled[std::min<std::size_t>(k, runs) - 1];
  return cal;
}

// sup over r in the grid of [F(r + eps) - F(r)] / eps for F the chi_d CDF.
inline double anti_concentration_probe(int d, double eps, const std::vector<double>& r_grid) {
  if (d < 1) throw DomainError("anti_concentration_probe: d must be >= 1");
  if (!(eps > 0.0)) throw DomainError("anti_concentration_probe: eps must be > 0");
  if (r_grid.empty()) throw DomainError("anti_concentration_probe: empty grid");
  double best = 0.0;
  for (double r : r_grid) {
    if (r < 0.0) throw DomainError("anti_concentration_probe: radii must be >= 0");
    best = std::max(best, (chi_cdf(r + eps, d) - chi_cdf(r, d)) / eps);
  }
  return best;
}

// Default grid: 4001 radii covering [0, sqrt(d) + 8].
inline std::vector<double> default_radius_grid(int d) {
  const double top = std::sqrt(static_cast<double>(d)) + 8.0;
  std::vector<double> grid(4001);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = top * i / (grid.size() - 1);
  return grid;
}

struct PortnoyRow {
  int d = 0;
  Eigen::Index n = 0;
  int reps = 0;
  double median_abs_D = 0.0;       // conditional coupling, see portnoy_scaling_experiment
  double median_abs_D_indep = 0.0;  // |S_n|^2 - |Z|^2 with Z independent
  double median_abs_null = 0.0;     // |Z1|^2 - |Z2|^2, both Gaussian
  double null_excess = 0.0;         // median_abs_D_indep - median_abs_null
  double mean_norm_sq = 0.0;        // mean of |S_n|^2, should be d
};

struct SlopeFit {
  double slope = 0.0, intercept = 0.0, slope_stderr = 0.0;
};

inline SlopeFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  if (x.size() < 2) throw DomainError("ols_fit: need at least two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      ssr += r * r;
    }
    f.slope_stderr = std::sqrt(ssr / (k - 2.0) / sxx);
  }
  return f;
}

struct PortnoyResult {
  std::vector<PortnoyRow> rows;
  SlopeFit fit;  // log median_abs_D on log d
};

// Conditionally on Z_1..Z_n, S_n ~ N(0, W) with W = n^-1 sum Z_i Z_i'. With
// g ~ N(0, I_d) the pair (W^1/2 g, g) couples S_n with Z exactly in law, and
// D_n = g'Wg - |g|^2 = |Zg|^2 / n - |g|^2. The fit uses this coupled
// remainder; the independent-draw estimate and its Gaussian null are
// reported alongside.
inline PortnoyResult portnoy_scaling_experiment(const std::vector<int>& d_list, Eigen::Index n, int reps,
                                                std::uint64_t seed) {
  if (reps < 30) throw DomainError("portnoy_scaling_experiment: reps must be >= 30");
  if (d_list.empty()) throw DomainError("portnoy_scaling_experiment: empty d list");
  for (std::size_t i = 0; i < d_list.size(); ++i) {
    if (d_list[i] < 1 || d_list[i] > n) throw DomainError("portnoy_scaling_experiment: need 1 <= d <= n");
    if (i > 0 && d_list[i] <= d_list[i - 1]) throw DomainError("portnoy_scaling_experiment: d list must ascend");
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  };
  PortnoyResult res;
  std::vector<double> lx, ly;
  for (int d : d_list) {
    std::vector<double> coupled(reps), indep(reps), null(reps), norm_sq(reps);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
      Rng rng(seed, "portnoy.d" + std::to_string(d), r);
      Vector g(d), z(d), z2(d), s = Vector::Zero(d);
      for (int j = 0; j < d; ++j) g(j) = rng.normal();
      double quad = 0.0;  // |Zg|^2
      Vector row(d);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) row(j) = rng.normal();
        const double proj = row.dot(g);
        quad += proj * proj;
        s += row * rng.normal();  // X_i = Z_i u_i, an independent draw of S_n
      }
      s /= std::sqrt(static_cast<double>(n));
      for (int j = 0; j < d; ++j) z(j) = rng.normal();
      for (int j = 0; j < d; ++j) z2(j) = rng.normal();
      coupled[r] = std::abs(quad / static_cast<double>(n) - g.squaredNorm());
      indep[r] = std::abs(s.squaredNorm() - z.squaredNorm());
      null[r] = std::abs(z2.squaredNorm() - z.squaredNorm());
      norm_sq[r] = s.squaredNorm();
    });
    PortnoyRow row;
    row.d = d;
    row.n = n;
    row.reps = reps;
    row.median_abs_D = median(coupled);
    row.median_abs_D_indep = median(indep);
    row.median_abs_null = median(null);
    row.null_excess = row.median_abs_D_indep - row.median_abs_null;
    row.mean_norm_sq = std::accumulate(norm_sq.begin(), norm_sq.end(), 0.0) / reps;
    res.rows.push_back(row);
    lx.push_back(std::log(static_cast<double>(d)));
    ly.push_back(std::log(row.median_abs_D));
  }
  if (lx.size() >= 2) res.fit = ols_fit(lx, ly);
  return res;
}

}  // namespace edgebound
