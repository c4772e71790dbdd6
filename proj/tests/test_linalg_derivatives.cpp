#include <gtest/gtest.h>

#include <cmath>

#include "skewbound/derivatives.hpp"
#include "skewbound/linalg.hpp"
#include "skewbound/random.hpp"

using namespace skewbound;

namespace {

const Complex I1{0.0, 1.0};

Matrix m2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

HermitianOperator sigma_x() { return HermitianOperator(m2(0, 1, 1, 0)); }
HermitianOperator sigma_y() { return HermitianOperator(m2(0, -I1, I1, 0)); }
HermitianOperator sigma_z() { return HermitianOperator(m2(1, 0, 0, -1)); }

HermitianOperator diag(std::initializer_list<double> v) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return HermitianOperator(m);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Parse;
}

}  // namespace

TEST(HermitianOperator, RejectsNonSquareNonFiniteAndNonHermitian) {
  EXPECT_EQ(code_of([] { HermitianOperator(Matrix::Zero(2, 3)); }), ErrorCode::NotSquare);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  EXPECT_EQ(code_of([&] { HermitianOperator{nan}; }), ErrorCode::NonFinite);
  EXPECT_EQ(code_of([] { HermitianOperator(m2(0, 1, 2, 0)); }), ErrorCode::NotHermitian);
}

TEST(HermitianOperator, AcceptsRoundingLevelAsymmetry) {
  const HermitianOperator a(m2(1, Complex(1, 1e-14), Complex(1, -1e-14 + 1e-15), 2));
  EXPECT_EQ(hermitian_residual(a.matrix()), 0.0);
  EXPECT_EQ(a.matrix()(0, 0).imag(), 0.0);
}

TEST(DensityMatrix, ValidatesPositivityAndTrace) {
  EXPECT_EQ(code_of([] { DensityMatrix(diag({1.1, -0.1})); }), ErrorCode::NotPositive);
  EXPECT_EQ(code_of([] { DensityMatrix(diag({0.6, 0.3})); }), ErrorCode::NotNormalized);
  EXPECT_NO_THROW(DensityMatrix(diag({1.0 + 5e-13, -5e-13})));
}

TEST(PrincipalSqrt, WorkedExamples) {
  const SqrtState a = principal_sqrt(DensityMatrix(diag({0.5, 0.5})));
  EXPECT_LT(max_abs(a.matrix() - Matrix::Identity(2, 2) / std::sqrt(2.0)), 1e-15);
  const SqrtState b = principal_sqrt(DensityMatrix(diag({1.0, 0.0})));
  EXPECT_LT(max_abs(b.matrix() - diag({1.0, 0.0}).matrix()), 1e-15);
  const SqrtState c = principal_sqrt(DensityMatrix(diag({0.64, 0.36})));
  EXPECT_LT(max_abs(c.matrix() - diag({0.8, 0.6}).matrix()), 1e-15);
}

TEST(PrincipalSqrt, SquaresBackOnRandomStates) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const int d = 2 + static_cast<int>(seed % 7);
    const DensityMatrix rho = random_density(rng, d, 1 + static_cast<int>(seed % d));
    const SqrtState xi = principal_sqrt(rho);
    EXPECT_LT(max_abs(xi.matrix() * xi.matrix() - rho.matrix()), 1e-10);
    EXPECT_GE(eigen_system(xi.op()).values.minCoeff(), -1e-14);
  }
}

TEST(PrincipalSqrt, ClampsTinyEigenvalues) {
  const SqrtState xi = principal_sqrt(DensityMatrix(diag({1.0 - 1e-16, 1e-16})));
  EXPECT_EQ(xi.matrix()(1, 1).real(), 0.0);
}

TEST(SqrtState, AcceptsNonPrincipalRootAndRejectsBadNorm) {
  EXPECT_NO_THROW(SqrtState(diag({0.8, -0.6})));
  EXPECT_EQ(code_of([] { SqrtState(diag({0.8, 0.7})); }), ErrorCode::NotNormalized);
}

TEST(HsInner, WorkedExamples) {
  EXPECT_DOUBLE_EQ(hs_inner(HermitianOperator::identity(3), HermitianOperator::identity(3)), 3.0);
  EXPECT_EQ(hs_inner(sigma_x(), sigma_z()), 0.0);
  Rng rng(7);
  const HermitianOperator a = random_hermitian(rng, 4);
  EXPECT_NEAR(hs_inner(a, a), a.matrix().cwiseAbs2().sum(), 1e-12 * a.matrix().cwiseAbs2().sum());
}

TEST(HsInner, DimMismatch) {
  EXPECT_EQ(code_of([] { hs_inner(sigma_x(), HermitianOperator::identity(3)); }),
            ErrorCode::DimMismatch);
}

TEST(HsInner, SymmetricBilinearPositive) {
  Rng rng(3);
  const auto a = random_hermitian(rng, 5), b = random_hermitian(rng, 5), c = random_hermitian(rng, 5);
  EXPECT_NEAR(hs_inner(a, b), hs_inner(b, a), 1e-13);
  EXPECT_NEAR(hs_inner(2.0 * a + c, b), 2.0 * hs_inner(a, b) + hs_inner(c, b), 1e-12);
  EXPECT_GE(hs_inner(a, a), 0.0);
}

TEST(Evolve, WorkedExamples) {
  const SqrtState xi0(diag({0.8, 0.6}));
  EXPECT_LT(max_abs(evolve(xi0, sigma_x(), 0.0).matrix() - xi0.matrix()), 1e-15);
  EXPECT_LT(max_abs(evolve(xi0, diag({1.0, -0.4}), 2.3).matrix() - xi0.matrix()), 1e-14);

  // 30-term Taylor series of e^{−iHt}.
  const double t = 0.3;
  Matrix u = Matrix::Identity(2, 2), term = Matrix::Identity(2, 2);
  for (int k = 1; k <= 30; ++k) {
    term = term * (-I1 * t * sigma_x().matrix()) / static_cast<double>(k);
    u += term;
  }
  const Matrix expected = u * xi0.matrix() * u.adjoint();
  const SqrtState xt = evolve(xi0, sigma_x(), t);
  EXPECT_LT(max_abs(xt.matrix() - expected), 1e-14);
  EXPECT_NEAR(hs_norm_sq(xt.op()), 1.0, 1e-12);
}

TEST(Evolve, RoundTripAndSpectrum) {
  const Instance inst = random_instance(21, 5, 3);
  const SqrtState xi = principal_sqrt(inst.state);
  const SqrtState back = evolve(evolve(xi, inst.hamiltonian, 1.3), inst.hamiltonian, -1.3);
  EXPECT_LT(max_abs(back.matrix() - xi.matrix()), 1e-10);
  const auto e0 = eigen_system(xi.op()).values;
  const auto e1 = eigen_system(evolve(xi, inst.hamiltonian, 0.9).op()).values;
  EXPECT_LT((e0 - e1).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Expectation, WorkedExamples) {
  const DensityMatrix rho(diag({0.7, 0.3}));
  EXPECT_DOUBLE_EQ(expectation(HermitianOperator::identity(2), rho), 1.0);
  EXPECT_EQ(expectation(sigma_z(), DensityMatrix(diag({0.5, 0.5}))), 0.0);
  EXPECT_NEAR(expectation(sigma_z(), rho), 0.4, 1e-15);
}

TEST(Binomial, ExactInWideIntegers) {
  EXPECT_EQ(Binomial::exact(16, 8), 12870u);
  EXPECT_EQ(Binomial::exact(62, 31), 465428353255261088ULL);
  EXPECT_EQ(Binomial::exact(5, 0), 1u);
}

TEST(StateDerivative, WorkedExamples) {
  const SqrtState xi(diag({0.8, 0.6}));
  EXPECT_LT(max_abs(state_derivative(xi, sigma_x(), 0).matrix() - xi.matrix()), 1e-15);
  const Matrix d1 = state_derivative(xi, sigma_x(), 1).matrix();
  EXPECT_LT(max_abs(d1 + 0.2 * sigma_y().matrix()), 1e-15);
  for (int n = 1; n <= 6; ++n)
    EXPECT_LT(max_abs(state_derivative(xi, diag({1.0, 3.0}), n).matrix()), 1e-12);
}

TEST(StateDerivative, SecondDerivativeExplicitForm) {
  const Instance inst = random_instance(4, 4, 2);
  const SqrtState xi = principal_sqrt(inst.state);
  const Matrix& h = inst.hamiltonian.matrix();
  const Matrix& x = xi.matrix();
  const Matrix expected = -h * h * x + 2.0 * h * x * h - x * h * h;
  EXPECT_LT(max_abs(state_derivative(xi, inst.hamiltonian, 2).matrix() - expected), 1e-12);
}

TEST(StateDerivative, OrderCap) {
  const SqrtState xi(diag({0.8, 0.6}));
  EXPECT_EQ(code_of([&] { state_derivative(xi, sigma_x(), 17); }), ErrorCode::OrderTooLarge);
  EXPECT_EQ(code_of([&] { state_derivative(xi, sigma_x(), 5, 4); }), ErrorCode::OrderTooLarge);
}

TEST(DerivativeSet, InvariantsAndInnerProducts) {
  const Instance inst = random_instance(11, 5, 4);
  const SqrtState xi = principal_sqrt(inst.state);
  const DerivativeSet d(xi, inst.hamiltonian, 13);
  const Matrix& h = inst.hamiltonian.matrix();
  const Matrix first = -I1 * (h * xi.matrix() - xi.matrix() * h);
  EXPECT_LT(max_abs(d.derivative(1).matrix() - first), 1e-12 * d.scale(1));
  EXPECT_NEAR(derivative_inner(d, 0, 0), 1.0, 1e-14);
  EXPECT_LT(std::abs(derivative_inner(d, 0, 1)), 1e-14);
  EXPECT_LT(std::abs(derivative_inner(d, 2, 3)), 1e-10 * d.scale(5));
  for (int m = 0; m <= 13; ++m)
    for (int n = 0; m + n <= 13; ++n)
      if ((m + n) % 2 == 1) {
        EXPECT_LT(std::abs(derivative_inner(d, m, n)), 1e-10 * d.scale(m + n));
      }
  for (int m = 0; m <= 10; ++m)
    for (int n = 2; m + n <= 12; n += 2)
      if ((m + n) % 2 == 0) {
        EXPECT_NEAR(std::abs(derivative_inner(d, m, n)), std::abs(derivative_inner(d, m + 2, n - 2)),
                    1e-9 * d.scale(m + n));
      }
  EXPECT_EQ(code_of([&] { d.derivative(14); }), ErrorCode::OrderTooLarge);
}

TEST(DerivativeSet, CenteringLeavesDerivativesUnchanged) {
  const Instance inst = random_instance(2, 4, 4);
  const SqrtState xi = principal_sqrt(inst.state);
  const DerivativeSet a(xi, inst.hamiltonian, 6);
  const DerivativeSet b(xi, shifted(inst.hamiltonian, 3.0), 6);
  for (int n = 0; n <= 6; ++n)
    EXPECT_LT(max_abs(a.derivative(n).matrix() - b.derivative(n).matrix()), 1e-10 * a.scale(n));
  EXPECT_NEAR(expectation(a.centered_hamiltonian(), inst.state), 0.0, 1e-12);
}

TEST(DerivativeSet, TimeShiftConsistency) {
  const Instance inst = random_instance(8, 4, 3);
  const SqrtState xi = principal_sqrt(inst.state);
  const double t = 0.7;
  const Propagator prop(inst.hamiltonian);
  const SqrtState xt = prop.apply(xi, t);
  for (int n = 1; n <= 6; ++n) {
    const HermitianOperator lhs = state_derivative(xt, inst.hamiltonian, n);
    const HermitianOperator rhs = prop.apply(state_derivative(xi, inst.hamiltonian, n), t);
    EXPECT_LT(max_abs(lhs.matrix() - rhs.matrix()),
              1e-9 * derivative_scale(spectral_norm(inst.hamiltonian), n));
  }
}

TEST(FiniteDifference, QuadraticConvergence) {
  const Instance inst = random_instance(11, 3, 3);
  const SqrtState xi = principal_sqrt(inst.state);
  for (int n : {1, 2}) {
    const double coarse = finite_difference_check(xi, inst.hamiltonian, n, 2e-3);
    const double fine = finite_difference_check(xi, inst.hamiltonian, n, 1e-3);
    EXPECT_GT(coarse / fine, 3.5) << "n=" << n;
    EXPECT_LT(coarse / fine, 4.5) << "n=" << n;
  }
}

TEST(FiniteDifference, CommutingAndValidation) {
  const SqrtState xi(diag({0.8, 0.6}));
  EXPECT_LE(finite_difference_check(xi, diag({1.0, 2.0}), 3, 1e-2), 1e-12);
  EXPECT_EQ(code_of([&] { finite_difference_check(xi, sigma_x(), 5, 1e-2); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { finite_difference_check(xi, sigma_x(), 1, 1.0); }),
            ErrorCode::InvalidArgument);
}
