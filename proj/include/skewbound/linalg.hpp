#pragma once

// Dense complex Hermitian matrix foundation: validated operator types,
// principal square root, Hilbert-Schmidt pairing and unitary evolution.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "skewbound/error.hpp"

namespace skewbound {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// ‖A − A†‖_max
inline double hermitian_residual(const Matrix& a) {
  return max_abs(a - a.adjoint());
}

inline bool all_finite(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

/// tr(AB) without forming the product.
inline Complex trace_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows())
    throw Error(ErrorCode::DimMismatch, "trace_product: incompatible shapes");
  return (a.transpose().cwiseProduct(b)).sum();
}

/// Square complex matrix that is Hermitian to within 1e-12·(1 + ‖A‖_max).
///
/// The stored matrix is the exact Hermitian part (A + A†)/2 of the input, so
/// every downstream pairing of two operators has an exactly vanishing
/// imaginary part.
class HermitianOperator {
 public:
  static constexpr double kHermitianTol = 1e-12;

  HermitianOperator() = default;

  explicit HermitianOperator(const Matrix& m) {
    check_shape(m);
    const double tol = kHermitianTol * (1.0 + max_abs(m));
    const double res = hermitian_residual(m);
    if (res > tol)
      throw Error(ErrorCode::NotHermitian,
                  "residual " + format_value(res) + " exceeds " + format_value(tol));
    m_ = hermitian_part(m);
  }

  /// Takes the Hermitian part of an operator whose Hermiticity the caller has
  /// already established under its own, scale-aware tolerance.
  static HermitianOperator symmetrized(const Matrix& m) {
    check_shape(m);
    HermitianOperator h;
    h.m_ = hermitian_part(m);
    return h;
  }

  static HermitianOperator identity(Eigen::Index dim) {
    return symmetrized(Matrix::Identity(dim, dim));
  }

  static HermitianOperator zero(Eigen::Index dim) {
    return symmetrized(Matrix::Zero(dim, dim));
  }

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  static void check_shape(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw Error(ErrorCode::NotSquare, "matrix must be square and non-empty");
    if (!all_finite(m)) throw Error(ErrorCode::NonFinite, "matrix has NaN or Inf entries");
  }

  static Matrix hermitian_part(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
    return h;
  }

  Matrix m_;
};

inline void require_same_dim(const HermitianOperator& a, const HermitianOperator& b,
                             const char* where) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimMismatch, std::string(where) + ": dimension " +
                                            std::to_string(a.dim()) + " vs " +
                                            std::to_string(b.dim()));
}

inline HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "operator+");
  return HermitianOperator::symmetrized(a.matrix() + b.matrix());
}

inline HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "operator-");
  return HermitianOperator::symmetrized(a.matrix() - b.matrix());
}

inline HermitianOperator operator*(double s, const HermitianOperator& a) {
  return HermitianOperator::symmetrized(s * a.matrix());
}

/// A + c·I
inline HermitianOperator shifted(const HermitianOperator& a, double c) {
  return HermitianOperator::symmetrized(a.matrix() +
                                        c * Matrix::Identity(a.dim(), a.dim()));
}

/// U A U† for a unitary U.
inline HermitianOperator conjugated(const HermitianOperator& a, const Matrix& u) {
  return HermitianOperator::symmetrized(u * a.matrix() * u.adjoint());
}

/// Re tr(AB). Throws NotHermitian if the imaginary part exceeds 1e-12·(1 + |Re|).
inline double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "hs_inner");
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  // Pair (i,j) with (j,i) so that conjugate products cancel exactly.
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    acc += x(i, i) * y(i, i);
    for (Eigen::Index j = i + 1; j < x.cols(); ++j) acc += x(i, j) * y(j, i) + x(j, i) * y(i, j);
  }
  if (std::abs(acc.imag()) > 1e-12 * (1.0 + std::abs(acc.real())))
    throw Error(ErrorCode::NotHermitian,
                "hs_inner: imaginary part " + format_value(acc.imag()));
  return acc.real();
}

inline double hs_norm_sq(const HermitianOperator& a) { return hs_inner(a, a); }

/// Eigenvalues in ascending order with orthonormal eigenvectors.
struct EigenSystem {
  RealVector values;
  Matrix vectors;
};

inline EigenSystem eigen_system(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NonFinite, "eigendecomposition did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Largest absolute eigenvalue.
inline double spectral_norm(const HermitianOperator& a) {
  const RealVector ev = eigen_system(a).values;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Positive semidefinite, unit-trace Hermitian operator.
class DensityMatrix {
 public:
  static constexpr double kNegativeTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kPureTol = 1e-12;

  explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
    eig_ = eigen_system(op_);
    if (eig_.values(0) < -kNegativeTol)
      throw Error(ErrorCode::NotPositive,
                  "eigenvalue " + format_value(eig_.values(0)) + " is negative");
    const double tr = op_.matrix().trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
      throw Error(ErrorCode::NotNormalized, "trace " + format_value(tr) + " differs from 1");
  }

  explicit DensityMatrix(const Matrix& m) : DensityMatrix(HermitianOperator(m)) {}

  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Eigen::Index dim() const noexcept { return op_.dim(); }
  const EigenSystem& eigen() const noexcept { return eig_; }

  /// tr(ρ²)
  double purity() const { return hs_inner(op_, op_); }
  bool is_pure() const { return purity() > 1.0 - kPureTol; }

 private:
  HermitianOperator op_;
  EigenSystem eig_;
};

/// Hermitian square root ξ of a density matrix, normalized so tr(ξ²) = 1.
class SqrtState {
 public:
  static constexpr double kNormTol = 1e-10;

  /// Accepts any Hermitian root, not only the principal one.
  explicit SqrtState(HermitianOperator op) : op_(std::move(op)) {
    const double n = hs_norm_sq(op_);
    if (std::abs(n - 1.0) > kNormTol)
      throw Error(ErrorCode::NotNormalized, "tr(xi^2) = " + format_value(n));
  }

  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Eigen::Index dim() const noexcept { return op_.dim(); }

  DensityMatrix squared() const {
    return DensityMatrix(HermitianOperator::symmetrized(op_.matrix() * op_.matrix()));
  }

 private:
  HermitianOperator op_;
};

/// Principal (positive semidefinite) square root. Eigenvalues below
/// 1e-14·λ_max are treated as exact zeros.
inline SqrtState principal_sqrt(const DensityMatrix& rho) {
  const EigenSystem& e = rho.eigen();
  const double lmax = e.values(e.values.size() - 1);
  RealVector roots(e.values.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double l = e.values(i);
    roots(i) = l < 1e-14 * lmax ? 0.0 : std::sqrt(l);
  }
  const Matrix xi = e.vectors * roots.asDiagonal() * e.vectors.adjoint();
  return SqrtState(HermitianOperator::symmetrized(xi));
}

/// e^{-iHt}, reusing one eigendecomposition of H for any number of times t.
class Propagator {
 public:
  explicit Propagator(const HermitianOperator& h) : eig_(eigen_system(h)) {}

  Matrix unitary(double t) const {
    Eigen::VectorXcd phases(eig_.values.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(-kI * eig_.values(i) * t);
    return eig_.vectors * phases.asDiagonal() * eig_.vectors.adjoint();
  }

  /// e^{-iHt} ξ e^{iHt}
  SqrtState apply(const SqrtState& xi, double t) const {
    const Matrix u = unitary(t);
    return SqrtState(HermitianOperator::symmetrized(u * xi.matrix() * u.adjoint()));
  }

  HermitianOperator apply(const HermitianOperator& a, double t) const {
    return conjugated(a, unitary(t));
  }

 private:
  EigenSystem eig_;
};

inline SqrtState evolve(const SqrtState& xi0, const HermitianOperator& h, double t) {
  require_same_dim(xi0.op(), h, "evolve");
  return Propagator(h).apply(xi0, t);
}

/// Re tr(Aρ)
inline double expectation(const HermitianOperator& a, const DensityMatrix& rho) {
  require_same_dim(a, rho.op(), "expectation");
  return hs_inner(a, rho.op());
}

}  // namespace skewbound
