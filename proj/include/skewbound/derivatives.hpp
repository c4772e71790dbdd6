#pragma once

// Time derivatives of the unitary curve ξ_t = e^{-iHt} ξ e^{iHt}, evaluated in
// closed form as (−i)^n Σ_k (−1)^k C(n,k) H^{n−k} ξ H^k.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skewbound/linalg.hpp"

namespace skewbound {

inline constexpr int kMaxDerivativeOrder = 16;

/// Exact binomial coefficients C(n,k) for 0 ≤ k ≤ n ≤ 62.
class Binomial {
 public:
  static constexpr int kMaxN = 62;

  static std::uint64_t exact(int n, int k) {
    if (n < 0 || n > kMaxN || k < 0 || k > n)
      throw Error(ErrorCode::InvalidArgument,
                  "binomial(" + std::to_string(n) + "," + std::to_string(k) + ")");
    return table()[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
  }

  static double of(int n, int k) { return static_cast<double>(exact(n, k)); }

 private:
  using Table = std::array<std::array<std::uint64_t, kMaxN + 1>, kMaxN + 1>;

  static const Table& table() {
    static const Table t = [] {
      Table r{};
      for (int n = 0; n <= kMaxN; ++n) {
        r[n][0] = r[n][n] = 1;
        for (int k = 1; k < n; ++k) r[n][k] = r[n - 1][k - 1] + r[n - 1][k];
      }
      return r;
    }();
    return t;
  }
};

/// H^0 … H^max
inline std::vector<Matrix> power_table(const HermitianOperator& h, int max_power) {
  std::vector<Matrix> powers;
  powers.reserve(static_cast<std::size_t>(max_power) + 1);
  powers.push_back(Matrix::Identity(h.dim(), h.dim()));
  for (int p = 1; p <= max_power; ++p) powers.push_back(powers.back() * h.matrix());
  return powers;
}

/// (−i)^n as an exact complex unit.
inline Complex minus_i_pow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

/// Tolerance scale (1 + ‖H‖₂)^order.
inline double derivative_scale(double h_norm, int order) {
  return std::pow(1.0 + h_norm, order);
}

namespace detail {

inline void check_order(int n, int cap) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative derivative order");
  if (n > cap)
    throw Error(ErrorCode::OrderTooLarge,
                "order " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
}

}  // namespace detail

/// ξ^(n) before symmetrization; powers must hold H^0 … H^n.
inline Matrix raw_state_derivative(const Matrix& xi, const std::vector<Matrix>& powers, int n) {
  Matrix acc = Matrix::Zero(xi.rows(), xi.cols());
  for (int k = 0; k <= n; ++k) {
    const double c = (k % 2 == 0 ? 1.0 : -1.0) * Binomial::of(n, k);
    acc += c * (powers[static_cast<std::size_t>(n - k)] * xi * powers[static_cast<std::size_t>(k)]);
  }
  return minus_i_pow(n) * acc;
}

namespace detail {

inline HermitianOperator checked_derivative(const Matrix& raw, double h_norm, int n) {
  const double tol = 1e-10 * derivative_scale(h_norm, n);
  const double res = hermitian_residual(raw);
  if (res > tol)
    throw Error(ErrorCode::NotHermitian, "derivative of order " + std::to_string(n) +
                                             " has Hermiticity residual " + format_value(res));
  return HermitianOperator::symmetrized(raw);
}

/// H − tr(Hξ²)·I. Derivatives depend on H only through commutators, so the
/// centered operator gives the same ξ^(n) with far less cancellation when the
/// mean of H dominates its spread.
inline HermitianOperator centered(const HermitianOperator& h, const SqrtState& xi) {
  return shifted(h, -hs_inner(h, HermitianOperator::symmetrized(xi.matrix() * xi.matrix())));
}

}  // namespace detail

inline HermitianOperator state_derivative(const SqrtState& xi, const HermitianOperator& h, int n,
                                          int cap = kMaxDerivativeOrder) {
  require_same_dim(xi.op(), h, "state_derivative");
  detail::check_order(n, cap);
  const HermitianOperator hc = detail::centered(h, xi);
  const auto powers = power_table(hc, n);
  return detail::checked_derivative(raw_state_derivative(xi.matrix(), powers, n),
                                    spectral_norm(hc), n);
}

/// ξ, H and the derivatives ξ^(0) … ξ^(max_order), computed once from the
/// centered Hamiltonian.
class DerivativeSet {
 public:
  DerivativeSet(SqrtState xi, HermitianOperator h, int max_order)
      : xi_(std::move(xi)), h_(std::move(h)), hc_(h_), max_order_(max_order) {
    require_same_dim(xi_.op(), h_, "DerivativeSet");
    detail::check_order(max_order, kMaxDerivativeOrder);
    hc_ = detail::centered(h_, xi_);
    h_norm_ = spectral_norm(hc_);
    powers_ = power_table(hc_, max_order);
    derivatives_.reserve(static_cast<std::size_t>(max_order) + 1);
    derivatives_.push_back(xi_.op());
    for (int n = 1; n <= max_order; ++n)
      derivatives_.push_back(
          detail::checked_derivative(raw_state_derivative(xi_.matrix(), powers_, n), h_norm_, n));
  }

  const SqrtState& xi() const noexcept { return xi_; }
  const HermitianOperator& hamiltonian() const noexcept { return h_; }
  /// H − tr(Hρ)·I
  const HermitianOperator& centered_hamiltonian() const noexcept { return hc_; }
  int max_order() const noexcept { return max_order_; }
  /// ‖H − tr(Hρ)·I‖₂
  double hamiltonian_norm() const noexcept { return h_norm_; }
  double scale(int order) const { return derivative_scale(h_norm_, order); }

  /// (H − tr(Hρ)·I)^p for 0 ≤ p ≤ max_order.
  const Matrix& power(int p) const {
    detail::check_order(p, max_order_);
    return powers_[static_cast<std::size_t>(p)];
  }

  const HermitianOperator& derivative(int n) const {
    detail::check_order(n, max_order_);
    return derivatives_[static_cast<std::size_t>(n)];
  }

  const std::vector<HermitianOperator>& derivatives() const noexcept { return derivatives_; }

 private:
  SqrtState xi_;
  HermitianOperator h_;
  HermitianOperator hc_;
  int max_order_;
  double h_norm_ = 0.0;
  std::vector<Matrix> powers_;
  std::vector<HermitianOperator> derivatives_;
};

/// tr(ξ^(m) ξ^(n))
inline double derivative_inner(const DerivativeSet& d, int m, int n) {
  return hs_inner(d.derivative(m), d.derivative(n));
}

/// ‖ξ^(n)_closed-form − ξ^(n)_central-difference‖_max using O(h²) stencils
/// over evolve() samples.
inline double finite_difference_check(const SqrtState& xi0, const HermitianOperator& h, int n,
                                      double step) {
  if (n < 1 || n > 4) throw Error(ErrorCode::InvalidArgument, "finite differences need 1 <= n <= 4");
  if (!(step >= 1e-4 && step <= 1e-1))
    throw Error(ErrorCode::InvalidArgument, "step must lie in [1e-4, 1e-1]");
  const Propagator prop(h);
  auto f = [&](int k) -> Matrix { return prop.apply(xi0, k * step).matrix(); };
  Matrix fd;
  switch (n) {
    case 1: fd = (f(1) - f(-1)) / (2.0 * step); break;
    case 2: fd = (f(1) - 2.0 * f(0) + f(-1)) / (step * step); break;
    case 3: fd = (f(2) - 2.0 * f(1) + 2.0 * f(-1) - f(-2)) / (2.0 * std::pow(step, 3)); break;
    default: fd = (f(2) - 4.0 * f(1) + 6.0 * f(0) - 4.0 * f(-1) + f(-2)) / std::pow(step, 4); break;
  }
  return max_abs(state_derivative(xi0, h, n).matrix() - fd);
}

}  // namespace skewbound
