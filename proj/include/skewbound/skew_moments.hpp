#pragma once

// Skew information quantities and the even-order quantum skew moments S_{2m}.

#include <cmath>
#include <string>
#include <vector>

#include "skewbound/derivatives.hpp"
#include "skewbound/linalg.hpp"

namespace skewbound {

inline constexpr int kMaxMomentOrder = 16;
inline constexpr int kDefaultMomentOrder = 12;

namespace detail {

inline double real_trace_product(const Matrix& a, const Matrix& b) {
  return trace_product(a, b).real();
}

}  // namespace detail

/// Wigner-Yanase skew information tr(H²ρ) − tr(H√ρ H√ρ).
inline double wy_skew_information(const HermitianOperator& h, const SqrtState& xi) {
  require_same_dim(h, xi.op(), "wy_skew_information");
  const Matrix& hm = h.matrix();
  const Matrix& x = xi.matrix();
  const Matrix hx = hm * x;
  return detail::real_trace_product(hm * hm, x * x) - detail::real_trace_product(hx, hx);
}

inline double wy_skew_information(const HermitianOperator& h, const DensityMatrix& rho) {
  return wy_skew_information(h, principal_sqrt(rho));
}

/// Skew information of the second kind: tr(T²ρ) + tr(T√ρ T√ρ) − 2 (tr Tρ)².
inline double skew_info_second_kind(const HermitianOperator& t, const SqrtState& xi) {
  require_same_dim(t, xi.op(), "skew_info_second_kind");
  const Matrix& tm = t.matrix();
  const Matrix& x = xi.matrix();
  const Matrix rho = x * x;
  const Matrix tx = tm * x;
  const double mean = detail::real_trace_product(tm, rho);
  return detail::real_trace_product(tm * tm, rho) + detail::real_trace_product(tx, tx) -
         2.0 * mean * mean;
}

inline double skew_info_second_kind(const HermitianOperator& t, const DensityMatrix& rho) {
  return skew_info_second_kind(t, principal_sqrt(rho));
}

/// |∇t|² = 2[tr(T²ξ²) + tr(TξTξ) − 2(tr Tξ²)²], the squared length of the
/// level-surface normal of t(ξ) = tr(Tξ²).
inline double grad_norm_sq(const HermitianOperator& t, const SqrtState& xi) {
  require_same_dim(t, xi.op(), "grad_norm_sq");
  const Matrix& tm = t.matrix();
  const Matrix& x = xi.matrix();
  const Matrix x2 = x * x;
  const Matrix tx = tm * x;
  const double mean = detail::real_trace_product(tm, x2);
  return 2.0 * (detail::real_trace_product(tm * tm, x2) + detail::real_trace_product(tx, tx) -
                2.0 * mean * mean);
}

/// tr((H − ⟨H⟩)^n ρ)
inline double central_moment(const HermitianOperator& h, const DensityMatrix& rho, int n) {
  require_same_dim(h, rho.op(), "central_moment");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "central moment order must be >= 1");
  const HermitianOperator centered = shifted(h, -expectation(h, rho));
  Matrix p = centered.matrix();
  for (int k = 1; k < n; ++k) p = p * centered.matrix();
  return detail::real_trace_product(p, rho.matrix());
}

namespace detail {

inline void check_moment_order(int order, int cap) {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "negative moment order");
  if (order % 2 != 0)
    throw Error(ErrorCode::OddOrder, "skew moments exist for even orders only, got " +
                                         std::to_string(order));
  if (order > cap)
    throw Error(ErrorCode::OrderTooLarge,
                "moment order " + std::to_string(order) + " exceeds cap " + std::to_string(cap));
}

/// Closed form with precomputed products hx[a] = H^a ξ.
inline double closed_form_from_products(const std::vector<Matrix>& hx, int order) {
  if (order == 0) return 1.0;
  const int half = order / 2;
  auto mixed = [&](int a, int b) {
    return real_trace_product(hx[static_cast<std::size_t>(a)], hx[static_cast<std::size_t>(b)]);
  };
  // Terms below the middle index appear twice by the symmetry of C(order, k).
  // The middle term carries −1 for order = 4L+2 and +1 for order = 4L.
  double acc = 0.0;
  for (int k = 0; k < half; ++k)
    acc += (k % 2 == 0 ? 1.0 : -1.0) * Binomial::of(order, k) * mixed(order - k, k);
  const double middle = (half % 2 == 0 ? 1.0 : -1.0) * Binomial::of(order, half) * mixed(half, half);
  return 2.0 * acc + middle;
}

inline std::vector<Matrix> power_times_xi(const HermitianOperator& h, const SqrtState& xi,
                                          int max_power) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(max_power) + 1);
  out.push_back(xi.matrix());
  for (int p = 1; p <= max_power; ++p) out.push_back(h.matrix() * out.back());
  return out;
}

}  // namespace detail

/// S_order from the closed-form mixed-trace expansion. S_0 = 1.
inline double skew_moment_closed_form(const HermitianOperator& h, const SqrtState& xi, int order,
                                      int cap = kMaxMomentOrder) {
  require_same_dim(h, xi.op(), "skew_moment_closed_form");
  detail::check_moment_order(order, cap);
  return detail::closed_form_from_products(detail::power_times_xi(h, xi, order), order);
}

/// Sign s with S_{n+m} = s · tr(ξ^(n) ξ^(m)) under the rule "+ if n+m ≡ 2
/// (mod 4), − if n+m ≡ 0 (mod 4)". This rule is only split-independent when
/// both n and m are odd.
inline double odd_split_sign(int order_sum) { return order_sum % 4 == 2 ? 1.0 : -1.0; }

/// Sign s with S_{n+m} = s · tr(ξ^(n) ξ^(m)) for every split: (−1)^{(n−m)/2}.
/// Equals odd_split_sign(n+m) whenever n and m are both odd.
inline double split_sign(int n, int m) {
  const int half = (n - m) / 2;
  return half % 2 == 0 ? 1.0 : -1.0;
}

/// S_{n+m} from the derivative inner product tr(ξ^(n) ξ^(m)).
inline double skew_moment_oracle(const DerivativeSet& d, int n, int m) {
  if (n < 0 || m < 0) throw Error(ErrorCode::InvalidArgument, "negative derivative order");
  if ((n + m) % 2 != 0)
    throw Error(ErrorCode::OddOrderSum, "n + m = " + std::to_string(n + m) + " is odd");
  return split_sign(n, m) * derivative_inner(d, n, m);
}

struct MomentOptions {
  int max_order = kDefaultMomentOrder;
  /// Replace H by H − tr(Hρ)·I before expanding; the moments are unchanged in
  /// exact arithmetic and the high powers are better conditioned.
  bool preshift = true;
};

/// S_0 … S_{max_order} for one (H, ξ) pair.
class SkewMomentTable {
 public:
  SkewMomentTable(const HermitianOperator& h, const SqrtState& xi, MomentOptions opts = {})
      : max_order_(opts.max_order), preshift_(opts.preshift) {
    require_same_dim(h, xi.op(), "SkewMomentTable");
    detail::check_moment_order(max_order_, kMaxMomentOrder);
    const double mean = hs_inner(h, HermitianOperator::symmetrized(xi.matrix() * xi.matrix()));
    const HermitianOperator centered = shifted(h, -mean);
    scale_ = spectral_norm(centered);
    shift_ = preshift_ ? mean : 0.0;
    const auto hx = detail::power_times_xi(preshift_ ? centered : h, xi, max_order_);
    moments_.reserve(static_cast<std::size_t>(max_order_ / 2) + 1);
    for (int order = 0; order <= max_order_; order += 2)
      moments_.push_back(detail::closed_form_from_products(hx, order));
  }

  SkewMomentTable(const HermitianOperator& h, const DensityMatrix& rho, MomentOptions opts = {})
      : SkewMomentTable(h, principal_sqrt(rho), opts) {}

  /// S_order; MissingMoment beyond max_order.
  double operator[](int order) const {
    if (order < 0 || order % 2 != 0)
      throw Error(ErrorCode::OddOrder, "moment order " + std::to_string(order));
    if (order > max_order_)
      throw Error(ErrorCode::MissingMoment, "table holds orders up to " +
                                                std::to_string(max_order_) + ", asked for " +
                                                std::to_string(order));
    return moments_[static_cast<std::size_t>(order / 2)];
  }

  int max_order() const noexcept { return max_order_; }
  bool preshifted() const noexcept { return preshift_; }
  double shift() const noexcept { return shift_; }

  /// ‖H − tr(Hρ)·I‖₂, the scale against which moment-derived quantities of a
  /// given homogeneity degree are compared.
  double scale() const noexcept { return scale_; }

  /// Indexed by m, holding S_{2m}.
  const std::vector<double>& moments() const noexcept { return moments_; }

 private:
  int max_order_;
  bool preshift_;
  double scale_ = 0.0;
  double shift_ = 0.0;
  std::vector<double> moments_;
};

}  // namespace skewbound
