#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "edgebound/errors.hpp"
#include "edgebound/rng.hpp"
#include "edgebound/sample.hpp"

namespace edgebound {

// Dense symmetric tensor of order k over R^d, all d^k entries stored
// row-major (last index fastest).
class MomentTensor {
 public:
  static constexpr std::size_t kMaxEntries = std::size_t{1} << 28;

  MomentTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 1) throw DomainError("MomentTensor: order must be >= 1");
    if (dim < 1) throw DomainError("MomentTensor: dim must be >= 1");
    std::size_t size = 1;
    for (int i = 0; i < order; ++i) {
      size *= static_cast<std::size_t>(dim);
      if (size > kMaxEntries) throw DomainError("MomentTensor: d^k exceeds 2^28 entries");
    }
    entries_.assign(size, 0.0);
  }

  // Builds from a full entry array; rejects arrays that are not exactly symmetric.
  static MomentTensor from_entries(int order, int dim, std::vector<double> entries) {
    MomentTensor t(order, dim);
    if (entries.size() != t.entries_.size()) throw DomainError("MomentTensor: wrong entry count");
    t.entries_ = std::move(entries);
    std::vector<int> idx(order);
    for (std::size_t flat = 0; flat < t.entries_.size(); ++flat) {
      if (!std::isfinite(t.entries_[flat])) throw DomainError("MomentTensor: non-finite entry");
      t.unflatten(flat, idx);
      std::sort(idx.begin(), idx.end());
      if (t.entries_[t.flatten(idx)] != t.entries_[flat])
        throw DomainError("MomentTensor: entries are not symmetric");
    }
    return t;
  }

  // Fills each canonical (sorted) index from f, then copies to every permutation.
  template <class F>
  static MomentTensor from_symmetric_function(int order, int dim, F f) {
    MomentTensor t(order, dim);
    std::vector<int> idx(order);
    for (std::size_t flat = 0; flat < t.entries_.size(); ++flat) {
      t.unflatten(flat, idx);
      if (std::is_sorted(idx.begin(), idx.end())) t.entries_[flat] = f(std::span<const int>(idx));
    }
    t.symmetrize_from_canonical();
    return t;
  }

  // v tensor-power k.
  static MomentTensor rank_one(const Vector& v, int order) {
    return from_symmetric_function(order, static_cast<int>(v.size()), [&](std::span<const int> idx) {
      double p = 1.0;
      for (int i : idx) p *= v(i);
      return p;
    });
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<double>& entries() const { return entries_; }

  double at(std::span<const int> idx) const { return entries_[flatten(idx)]; }
  double at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }

  std::size_t flatten(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int i : idx) flat = flat * dim_ + static_cast<std::size_t>(i);
    return flat;
  }

  void unflatten(std::size_t flat, std::vector<int>& idx) const {
    for (int p = order_ - 1; p >= 0; --p) {
      idx[p] = static_cast<int>(flat % dim_);
      flat /= dim_;
    }
  }

  MomentTensor operator-(const MomentTensor& other) const {
    require_same_shape(other);
    MomentTensor out = *this;
    for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] -= other.entries_[i];
    return out;
  }

  MomentTensor scaled(double c) const {
    MomentTensor out = *this;
    for (double& e : out.entries_) e *= c;
    return out;
  }

  // A applied to x in all but the first slot: (A x^{k-1})_i.
  Vector contract_all_but_one(const Vector& x) const {
    Vector out = Vector::Zero(dim_);
    const std::size_t block = entries_.size() / dim_;
    std::vector<double> weights(block);
    fill_power_weights(x, order_ - 1, weights);
    for (int i = 0; i < dim_; ++i) {
      const double* row = entries_.data() + static_cast<std::size_t>(i) * block;
      double s = 0.0;
      for (std::size_t j = 0; j < block; ++j) s += row[j] * weights[j];
      out(i) = s;
    }
    return out;
  }

  // <A, x^k>.
  double evaluate(const Vector& x) const { return contract_all_but_one(x).dot(x); }

  void require_same_shape(const MomentTensor& other) const {
    if (order_ != other.order_ || dim_ != other.dim_) throw DomainError("MomentTensor: shape mismatch");
  }

  // Internal: used by the moment estimator after writing canonical slots.
  std::vector<double>& mutable_entries() { return entries_; }

  void symmetrize_from_canonical() {
    std::vector<int> idx(order_);
    for (std::size_t flat = 0; flat < entries_.size(); ++flat) {
      unflatten(flat, idx);
      if (std::is_sorted(idx.begin(), idx.end())) continue;
      std::sort(idx.begin(), idx.end());
      entries_[flat] = entries_[flatten(idx)];
    }
  }

 private:
  // weights[flat over m indices] = prod x_{i_j}, m = power.
  void fill_power_weights(const Vector& x, int power, std::vector<double>& weights) const {
    weights[0] = 1.0;
    std::size_t len = 1;
    for (int p = 0; p < power; ++p) {
      for (std::size_t j = len; j-- > 0;) {
        double w = weights[j];
        for (int i = dim_ - 1; i >= 0; --i) weights[j * dim_ + i] = w * x(i);
      }
      len *= dim_;
    }
  }

  int order_;
  int dim_;
  std::vector<double> entries_;
};

inline double frobenius_norm(const MomentTensor& a) {
  double s = 0.0;
  for (double e : a.entries()) s += e * e;
  return std::sqrt(s);
}

inline double max_norm(const MomentTensor& a) {
  double m = 0.0;
  for (double e : a.entries()) m = std::max(m, std::abs(e));
  return m;
}

inline std::size_t nonzero_count(const MomentTensor& a, double tol) {
  if (tol < 0.0) throw DomainError("nonzero_count: tol must be >= 0");
  return static_cast<std::size_t>(
      std::count_if(a.entries().begin(), a.entries().end(), [tol](double e) { return std::abs(e) > tol; }));
}

inline std::size_t nonzero_count(const MomentTensor& a) { return nonzero_count(a, 1e-12 * max_norm(a)); }

struct OperatorNormOptions {
  int restarts = 8;
  int iters = 1000;
  double tol = 1e-12;
  std::uint64_t seed = 0x5eed;
};

struct OperatorNormResult {
  double value = 0.0;
  bool converged = true;
  bool lower_estimate = true;
  Vector argmax;
};

// Shifted symmetric higher-order power iteration (monotone for the convex
// shift), run from random and canonical starts for both A and -A. The
// reported value is max(best |A x^k|, max_norm(A)); both are lower bounds of
// the operator norm.
inline OperatorNormResult operator_norm_detail(const MomentTensor& a, const OperatorNormOptions& opt = {}) {
  if (opt.restarts < 8) throw DomainError("operator_norm: restarts must be >= 8");
  const int d = a.dim();
  const int k = a.order();
  OperatorNormResult best;
  best.argmax = Vector::Zero(d);
  best.argmax(0) = 1.0;
  const double fro = frobenius_norm(a);
  if (fro == 0.0) return best;
  const double shift = (k - 1) * fro;

  std::vector<Vector> starts;
  Rng rng(opt.seed);
  for (int r = 0; r < opt.restarts; ++r) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    starts.push_back(v.normalized());
  }
  for (int i = 0; i < d; ++i) starts.push_back(Vector::Unit(d, i));

  bool all_converged = true;
  for (int sign : {1, -1}) {
    for (const Vector& start : starts) {
      Vector x = start;
      bool converged = false;
      for (int it = 0; it < opt.iters; ++it) {
        Vector g = sign * a.contract_all_but_one(x) + shift * x;
        double gn = g.norm();
        if (gn == 0.0) {
          converged = true;
          break;
        }
        Vector next = g / gn;
        double change = (next - x).norm();
        x = std::move(next);
        if (change < opt.tol) {
          converged = true;
          break;
        }
      }
      all_converged = all_converged && converged;
      double value = std::abs(a.evaluate(x));
      if (value > best.value) {
        best.value = value;
        best.argmax = x;
      }
    }
  }
  best.value = std::min(std::max(best.value, max_norm(a)), fro);
  best.converged = all_converged;
  return best;
}

inline double operator_norm(const MomentTensor& a, const OperatorNormOptions& opt = {}) {
  return operator_norm_detail(a, opt).value;
}

enum class Center { none, mean };

namespace detail {

inline void accumulate_canonical(const double* x, int d, int depth, int order, int start, double prod,
                                 std::size_t offset, double* sums, double* squares) {
  if (depth == order) {
    sums[offset] += prod;
    if (squares) squares[offset] += prod * prod;
    return;
  }
  for (int j = start; j < d; ++j)
    accumulate_canonical(x, d, depth + 1, order, j, prod * x[j], offset * d + j, sums, squares);
}

inline void require_supported_order(int k) {
  if (k != 2 && k != 3 && k != 4 && k != 6) throw DomainError("empirical_moment: order must be 2, 3, 4 or 6");
}

}  // namespace detail

struct MomentWithError {
  MomentTensor mean;
  MomentTensor stderr_;  // MC standard error of each entry
};

// Sample average of (X_i - c)^k with its entrywise Monte Carlo standard error.
// Each canonical entry is computed once and copied to its permutations, so
// the result is symmetric bit for bit.
inline MomentWithError empirical_moment_with_error(const Sample& s, int k, Center center) {
  detail::require_supported_order(k);
  const int d = s.d();
  const Eigen::Index n = s.n();
  Vector c = center == Center::mean ? s.mean() : Vector::Zero(d);
  MomentTensor sums(k, d), squares(k, d);
  std::vector<double> x(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x[j] = s.data()(i, j) - c(j);
    detail::accumulate_canonical(x.data(), d, 0, k, 0, 1.0, 0, sums.mutable_entries().data(),
                                 squares.mutable_entries().data());
  }
  const double nn = static_cast<double>(n);
  auto& m = sums.mutable_entries();
  auto& q = squares.mutable_entries();
  for (std::size_t f = 0; f < m.size(); ++f) {
    m[f] /= nn;
    double var = std::max(0.0, q[f] / nn - m[f] * m[f]);
    q[f] = std::sqrt(var / nn);
  }
  sums.symmetrize_from_canonical();
  squares.symmetrize_from_canonical();
  return {std::move(sums), std::move(squares)};
}

inline MomentTensor empirical_moment(const Sample& s, int k, Center center) {
  detail::require_supported_order(k);
  const int d = s.d();
  Vector c = center == Center::mean ? s.mean() : Vector::Zero(d);
  MomentTensor sums(k, d);
  std::vector<double> x(d);
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    for (int j = 0; j < d; ++j) x[j] = s.data()(i, j) - c(j);
    detail::accumulate_canonical(x.data(), d, 0, k, 0, 1.0, 0, sums.mutable_entries().data(), nullptr);
  }
  for (double& e : sums.mutable_entries()) e /= static_cast<double>(s.n());
  sums.symmetrize_from_canonical();
  return sums;
}

}  // namespace edgebound
