#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "cdg/error.hpp"

namespace cdg::math {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Lower-triangular L with L·Lᵀ = a. Only the lower triangle of `a` is read.
// Throws FactorizationError naming the first non-positive pivot.
inline Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix must be square");
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw FactorizationError(static_cast<std::size_t>(j), d);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Symmetric, unit-diagonal, positive semi-definite matrix with entries in [-1,1].
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;

  // Identity of dimension n.
  explicit CorrelationMatrix(Eigen::Index n) : m_(Matrix::Identity(n, n)) {}

  // Validates the invariants; PSD is checked with eigenvalue tolerance `psd_tol`.
  explicit CorrelationMatrix(Matrix m, double psd_tol = 1e-10) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw DimensionError("correlation matrix must be square and non-empty");
    const Eigen::Index n = m_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::fabs(m_(i, i) - 1.0) > 1e-12)
        throw DomainError("correlation matrix: diagonal entry " + std::to_string(i) + " is not 1");
      m_(i, i) = 1.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        if (!std::isfinite(m_(i, j)) || std::fabs(m_(i, j) - m_(j, i)) > 1e-12)
          throw DomainError("correlation matrix: not symmetric");
        if (std::fabs(m_(i, j)) > 1.0) throw DomainError("correlation matrix: entry outside [-1,1]");
        m_(j, i) = m_(i, j);
      }
    }
    if (n > 1 && min_eigenvalue(m_) < -psd_tol)
      throw DomainError("correlation matrix: not positive semi-definite");
  }

  // 2x2 with off-diagonal rho.
  static CorrelationMatrix bivariate(double rho) {
    Matrix m(2, 2);
    m << 1.0, rho, rho, 1.0;
    return CorrelationMatrix(std::move(m));
  }

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  // Principal 2x2 block for the pair (i, j).
  CorrelationMatrix pair(Eigen::Index i, Eigen::Index j) const { return bivariate(m_(i, j)); }

 private:
  Matrix m_;
};

struct RepairResult {
  CorrelationMatrix matrix;
  bool repaired = false;
  double min_eigenvalue = 0.0;  // before repair
};

// Clip eigenvalues below `floor`, rebuild, rescale to unit diagonal. Matrices
// that are already PD (min eigenvalue >= floor) pass through unchanged.
inline RepairResult repair_correlation(const Matrix& a, double floor = 1e-10) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimensionError("repair_correlation: matrix must be square and non-empty");
  Matrix sym = 0.5 * (a + a.transpose());
  sym.diagonal().setOnes();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const double lambda_min = es.eigenvalues().minCoeff();
  if (lambda_min >= floor) {
    for (Eigen::Index i = 0; i < sym.rows(); ++i)
      for (Eigen::Index j = 0; j < sym.cols(); ++j)
        if (i != j) sym(i, j) = std::clamp(sym(i, j), -1.0, 1.0);
    return {CorrelationMatrix(std::move(sym)), false, lambda_min};
  }
  const Vector clipped = es.eigenvalues().cwiseMax(floor);
  Matrix rebuilt = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  const Vector scale = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
  rebuilt = scale.asDiagonal() * rebuilt * scale.asDiagonal();
  rebuilt = 0.5 * (rebuilt + rebuilt.transpose());
  for (Eigen::Index i = 0; i < rebuilt.rows(); ++i) {
    rebuilt(i, i) = 1.0;
    for (Eigen::Index j = 0; j < rebuilt.cols(); ++j)
      if (i != j) rebuilt(i, j) = std::clamp(rebuilt(i, j), -1.0, 1.0);
  }
  return {CorrelationMatrix(std::move(rebuilt), 1e-8), true, lambda_min};
}

// Cholesky factor of a correlation matrix, repairing tiny indefiniteness first.
inline Matrix correlation_factor(const CorrelationMatrix& c) {
  try {
    return cholesky(c.matrix());
  } catch (const FactorizationError&) {
    return cholesky(repair_correlation(c.matrix()).matrix.matrix());
  }
}

// Rescale a covariance-like matrix to unit diagonal.
inline Matrix normalize_to_correlation(const Matrix& q) {
  const Vector inv = q.diagonal().cwiseSqrt().cwiseInverse();
  Matrix r = inv.asDiagonal() * q * inv.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

// Log-determinant from a Cholesky factor.
inline double log_det_from_factor(const Matrix& l) {
  return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace cdg::math
