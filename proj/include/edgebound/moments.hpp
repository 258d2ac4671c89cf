#pragma once

#include <cmath>

#include "edgebound/bounds.hpp"
#include "edgebound/sample.hpp"
#include "edgebound/spd_matrix.hpp"
#include "edgebound/tensor.hpp"

namespace edgebound {

namespace detail {

inline double mean_norm_power(const RowMatrix& rows, int power) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) acc += std::pow(rows.row(i).squaredNorm(), 0.5 * power);
  return acc / static_cast<double>(rows.rows());
}

inline void fill_covariance(MomentSummary& ms, const SpdMatrix& sigma) {
  ms.sigma_op = sigma.op_norm();
  ms.sigma_inv_op = sigma.inverse_op_norm();
  ms.sigma_fro = sigma.frobenius();
  ms.lambda_min = sigma.lambda_min();
}

}  // namespace detail

// Plug-in moments of one sample, centered at its mean, for the normal and
// bootstrap bounds.
inline MomentSummary summarize_sample(const Sample& x, const OperatorNormOptions& opt = {}) {
  MomentSummary ms;
  ms.d = x.d();
  ms.n = static_cast<double>(x.n());
  SpdMatrix sigma(x.covariance());
  detail::fill_covariance(ms, sigma);
  RowMatrix centered = x.data().rowwise() - x.data().colwise().mean();
  Sample c(centered, x.provenance(), x.columns());
  Sample w = whiten(c, sigma);
  ms.whitened_fourth_norm = detail::mean_norm_power(w.data(), 4);
  MomentTensor t3 = empirical_moment(w, 3, Center::none);
  ms.third_fro = frobenius_norm(t3);
  ms.third_op = operator_norm(t3, opt);
  ms.third_max = max_norm(t3);
  ms.third_nnz = static_cast<double>(nonzero_count(t3));
  ms.fourth_op = operator_norm(empirical_moment(w, 4, Center::none), opt);
  ms.centered_third_fro = frobenius_norm(empirical_moment(c, 3, Center::none));
  ms.centered_fourth_norm = detail::mean_norm_power(centered, 4);
  return ms;
}

// Plug-in moments comparing samples of X and T. With same_cov both are
// whitened with the covariance of X; otherwise raw centered moments are used.
inline MomentSummary summarize_pair(const Sample& x, const Sample& t, bool same_cov,
                                    const OperatorNormOptions& opt = {}) {
  if (x.d() != t.d()) throw DomainError("summarize_pair: dimension mismatch");
  MomentSummary ms = summarize_sample(x, opt);
  RowMatrix cx = x.data().rowwise() - x.data().colwise().mean();
  RowMatrix ct = t.data().rowwise() - t.data().colwise().mean();
  Sample sx(cx), st(ct);
  SpdMatrix sig_x(x.covariance());
  SpdMatrix sig_t(t.covariance());
  if (same_cov) {
    Sample wx = whiten(sx, sig_x), wt = whiten(st, sig_x);
    MomentTensor diff = empirical_moment(wx, 3, Center::none) - empirical_moment(wt, 3, Center::none);
    ms.third_diff_fro = frobenius_norm(diff);
    ms.third_diff_op = operator_norm(diff, opt);
    ms.third_diff_max = max_norm(diff);
    ms.third_diff_nnz = static_cast<double>(nonzero_count(diff));
    ms.Vbar4 = detail::mean_norm_power(wx.data(), 4) + detail::mean_norm_power(wt.data(), 4);
    ms.VbarT4 = operator_norm(empirical_moment(wx, 4, Center::none), opt) +
                operator_norm(empirical_moment(wt, 4, Center::none), opt);
  } else {
    ms.lambda0_sq = std::min(sig_x.lambda_min(), sig_t.lambda_min());
    ms.cov_diff_fro = (sig_x.matrix() - sig_t.matrix()).norm();
    ms.cov_diff_op = (sig_x.matrix() - sig_t.matrix()).jacobiSvd().singularValues()(0);
    MomentTensor diff = empirical_moment(sx, 3, Center::none) - empirical_moment(st, 3, Center::none);
    ms.third_raw_diff_fro = frobenius_norm(diff);
    ms.third_raw_diff_op = operator_norm(diff, opt);
    ms.V4 = detail::mean_norm_power(cx, 4) + detail::mean_norm_power(ct, 4);
    ms.VT4 = operator_norm(empirical_moment(sx, 4, Center::none), opt) +
             operator_norm(empirical_moment(st, 4, Center::none), opt);
    ms.v4 = sig_x.op_norm() * sig_x.op_norm() + sig_t.op_norm() * sig_t.op_norm();
  }
  return ms;
}

// E|X|^4 for X ~ N(0, S): (tr S)^2 + 2 tr(S^2).
inline double gaussian_fourth_norm(const Matrix& s) {
  double tr = s.trace();
  return tr * tr + 2.0 * (s * s).trace();
}

// Exact population summary of N(0, S) for the normal-approximation bounds.
inline MomentSummary gaussian_population_summary(const SpdMatrix& sigma, double n) {
  MomentSummary ms;
  ms.d = sigma.dim();
  ms.n = n;
  detail::fill_covariance(ms, sigma);
  const double d = ms.d;
  ms.whitened_fourth_norm = d * d + 2.0 * d;
  ms.third_fro = 0.0;
  ms.third_op = 0.0;
  ms.third_max = 0.0;
  ms.third_nnz = 0.0;
  ms.fourth_op = 3.0;
  ms.centered_third_fro = 0.0;
  ms.centered_fourth_norm = gaussian_fourth_norm(sigma.matrix());
  return ms;
}

// Exact population summary comparing N(0, S) with N(0, S_T).
inline MomentSummary gaussian_pair_population_summary(const SpdMatrix& s, const SpdMatrix& s_t, double n) {
  if (s.dim() != s_t.dim()) throw DomainError("gaussian_pair_population_summary: dimension mismatch");
  MomentSummary ms = gaussian_population_summary(s, n);
  ms.lambda0_sq = std::min(s.lambda_min(), s_t.lambda_min());
  Matrix diff = s.matrix() - s_t.matrix();
  ms.cov_diff_fro = diff.norm();
  ms.cov_diff_op = diff.jacobiSvd().singularValues()(0);
  ms.third_raw_diff_fro = 0.0;
  ms.third_raw_diff_op = 0.0;
  ms.V4 = gaussian_fourth_norm(s.matrix()) + gaussian_fourth_norm(s_t.matrix());
  ms.VT4 = 3.0 * s.op_norm() * s.op_norm() + 3.0 * s_t.op_norm() * s_t.op_norm();
  ms.v4 = s.op_norm() * s.op_norm() + s_t.op_norm() * s_t.op_norm();
  return ms;
}

}  // namespace edgebound
