#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "edgebound/errors.hpp"

namespace edgebound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric positive-definite matrix with its eigendecomposition computed
// once at construction. Eigenvalues are stored in decreasing order.
class SpdMatrix {
 public:
  static constexpr double kMaxCondition = 1e12;

  explicit SpdMatrix(const Matrix& m, double symmetry_tol = 1e-10) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw DomainError("SpdMatrix: matrix must be square and non-empty");
    if (!m.allFinite()) throw DomainError("SpdMatrix: non-finite entries");
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale)
      throw DomainError("SpdMatrix: matrix is not symmetric");
    entries_ = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_);
    if (solver.info() != Eigen::Success) throw SingularMatrixError("SpdMatrix: eigendecomposition failed");
    const Eigen::Index d = entries_.rows();
    values_.resize(d);
    vectors_.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      values_(i) = solver.eigenvalues()(d - 1 - i);
      vectors_.col(i) = solver.eigenvectors().col(d - 1 - i);
    }
    if (!(values_(d - 1) > 0.0))
      throw DomainError("SpdMatrix: matrix is not positive definite (lambda_min = " +
                        std::to_string(values_(d - 1)) + ")");
  }

  static SpdMatrix identity(int d) { return SpdMatrix(Matrix::Identity(d, d)); }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  const Vector& eigenvalues() const { return values_; }
  const Matrix& eigenvectors() const { return vectors_; }
  double lambda_max() const { return values_(0); }
  double lambda_min() const { return values_(values_.size() - 1); }
  double op_norm() const { return lambda_max(); }
  double inverse_op_norm() const { return 1.0 / lambda_min(); }
  double condition() const { return lambda_max() / lambda_min(); }
  double frobenius() const { return entries_.norm(); }
  double trace() const { return entries_.trace(); }

  Matrix reconstruct() const { return vectors_ * values_.asDiagonal() * vectors_.transpose(); }

  Matrix sqrt() const { return apply([](double v) { return std::sqrt(v); }); }

  Matrix inverse_sqrt() const {
    require_well_conditioned("inverse_sqrt");
    return apply([](double v) { return 1.0 / std::sqrt(v); });
  }

  Matrix inverse() const {
    require_well_conditioned("inverse");
    return apply([](double v) { return 1.0 / v; });
  }

 private:
  template <class F>
  Matrix apply(F f) const {
    Vector fv = values_.unaryExpr(f);
    Matrix out = vectors_ * fv.asDiagonal() * vectors_.transpose();
    return 0.5 * (out + out.transpose());
  }

  void require_well_conditioned(const char* what) const {
    if (lambda_min() < lambda_max() / kMaxCondition)
      throw SingularMatrixError(std::string(what) + ": condition number exceeds 1e12");
  }

  Matrix entries_;
  Vector values_;
  Matrix vectors_;
};

}  // namespace edgebound
