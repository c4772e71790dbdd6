#pragma once

// Higher-order uncertainty bound assembled from skew moments: Hankel
// determinants D_{2n}, frame norms N_n, projection coefficients F_{n,k},
// numerators U_n, and the truncated sums (1/2) Σ_{n odd} U_n² / N_n.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "skewbound/derivatives.hpp"
#include "skewbound/skew_moments.hpp"

namespace skewbound {

inline constexpr double kRankTol = 1e-10;
/// Orders whose new squared norm N_n is at most this fraction of
/// ‖ξ^(n)‖² = S_{2n} count as saturated.
inline constexpr double kRelativeRankTol = 1e-5;
inline constexpr int kDefaultLadderDepth = 5;
inline constexpr int kMaxLadderDepth = 7;

namespace detail {

inline void check_odd_order(int n, const char* what) {
  if (n < 1 || n % 2 == 0)
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " needs a positive odd order, got " + std::to_string(n));
}

}  // namespace detail

/// Homogeneity degree of D_{2n} in the spectrum of H: the sum of the moment
/// orders along its diagonal. D_{-2} has degree 0.
constexpr int determinant_degree(int n) {
  if (n < 1) return 0;
  const int k = (n + 1) / 2;
  return 2 * n * k - 2 * k * (k - 1);
}

/// 1e-10 · scale^degree, the threshold below which a moment polynomial of
/// the given degree counts as zero.
inline double rank_tolerance(const SkewMomentTable& table, int degree) {
  return kRankTol * std::pow(table.scale(), degree);
}

/// ((n+1)/2)² matrix with entry (i,j) = S_{2n − 2i − 2j}.
inline Eigen::MatrixXd hankel_matrix(const SkewMomentTable& table, int n) {
  detail::check_odd_order(n, "hankel_matrix");
  const int k = (n + 1) / 2;
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = table[2 * n - 2 * i - 2 * j];
  return m;
}

/// D_{2n} by full-pivot LU. D_{-2} = 1 (n = −1).
inline double hankel_determinant(const SkewMomentTable& table, int n) {
  if (n == -1) return 1.0;
  return hankel_matrix(table, n).fullPivLu().determinant();
}

namespace detail {

inline double checked_determinant(const SkewMomentTable& table, int n) {
  const double d = hankel_determinant(table, n);
  if (d <= rank_tolerance(table, determinant_degree(n)))
    throw Error(ErrorCode::RankSaturated,
                "D_" + std::to_string(2 * n) + " = " + format_value(d) + " is below tolerance");
  return d;
}

}  // namespace detail

namespace detail {

/// D_{2n} at or below its rank tolerance, or N_n = D_{2n}/D_{2n−4} at or
/// below kRelativeRankTol · S_{2n}.
inline bool saturated(const SkewMomentTable& table, int n, double d, double below) {
  if (d <= rank_tolerance(table, determinant_degree(n))) return true;
  return n > 1 && d / below <= kRelativeRankTol * table[2 * n];
}

}  // namespace detail

/// N_n = D_{2n} / D_{2n−4}. RankSaturated if either determinant is at or
/// below its rank tolerance or N_n is a negligible part of S_{2n}.
inline double frame_norm(const SkewMomentTable& table, int n) {
  detail::check_odd_order(n, "frame_norm");
  const double below = n == 1 ? 1.0 : detail::checked_determinant(table, n - 2);
  const double d = hankel_determinant(table, n);
  if (detail::saturated(table, n, d, below))
    throw Error(ErrorCode::RankSaturated, "order " + std::to_string(n) + " is saturated");
  return d / below;
}

/// F_{n,k}: coefficient of Ψ_k in the Gram-Schmidt expansion of Ψ_n.
inline double projection_coefficient(const SkewMomentTable& table, int n, int k) {
  detail::check_odd_order(n, "projection_coefficient");
  detail::check_odd_order(k, "projection_coefficient");
  if (k > n - 2)
    throw Error(ErrorCode::InvalidArgument, "projection coefficient needs k <= n - 2");
  const double dk = detail::checked_determinant(table, k);
  Eigen::MatrixXd m = hankel_matrix(table, k);
  for (int j = 0; j < m.cols(); ++j) m(0, j) = table[n + k - 2 * j];
  const double sign = (((n + k) / 2 - 1) % 2 == 0) ? 1.0 : -1.0;
  return sign * m.fullPivLu().determinant() / dk;
}

/// U_1, U_3, …, U_n from the recursion U_n = (−1)^{(n−1)/2} n S_{n−1} − Σ_k F_{n,k} U_k.
/// Index i holds U_{2i+1}.
inline std::vector<double> numerators(const SkewMomentTable& table, int n) {
  detail::check_odd_order(n, "numerators");
  std::vector<double> u{1.0};
  for (int order = 3; order <= n; order += 2) {
    const double sign = (((order - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    double value = sign * order * table[order - 1];
    for (int k = 1; k <= order - 2; k += 2)
      value -= projection_coefficient(table, order, k) * u[static_cast<std::size_t>(k / 2)];
    u.push_back(value);
  }
  return u;
}

inline double numerator(const SkewMomentTable& table, int n) {
  return numerators(table, n).back();
}

struct LadderRow {
  int order = 0;
  double determinant = 0.0;  // D_{2n}
  double norm = 0.0;         // N_n
  double numerator = 0.0;    // U_n
  double term = 0.0;         // U_n² / N_n
  double cumulative = 0.0;   // (1/2) Σ_{k ≤ n} U_k² / N_k
};

struct BoundLadder {
  std::vector<LadderRow> rows;
  int requested_order = 0;
  int truncation_order = 0;
  /// Set when a row was dropped because its determinant fell below the rank
  /// tolerance.
  bool saturated = false;

  double bound() const { return rows.empty() ? 0.0 : rows.back().cumulative; }
};

/// Lower bound on ΔT² + δT² truncated at odd order K. Rows stop before the
/// first saturated order; such rows are never divided through.
inline BoundLadder uncertainty_bound(const SkewMomentTable& table, int max_order) {
  detail::check_odd_order(max_order, "uncertainty_bound");
  if (2 * max_order > table.max_order())
    throw Error(ErrorCode::MissingMoment, "ladder depth " + std::to_string(max_order) +
                                              " needs moments through order " +
                                              std::to_string(2 * max_order));
  if (table[2] <= rank_tolerance(table, 2))
    throw Error(ErrorCode::ZeroFisherInformation,
                "S_2 = " + format_value(table[2]) + ": H and rho commute");

  BoundLadder ladder;
  ladder.requested_order = max_order;
  double previous = 1.0;
  double cumulative = 0.0;
  std::vector<double> u;
  for (int n = 1; n <= max_order; n += 2) {
    const double d = hankel_determinant(table, n);
    if (detail::saturated(table, n, d, previous)) {
      ladder.saturated = true;
      break;
    }
    const double sign = (((n - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    double un = n == 1 ? 1.0 : sign * n * table[n - 1];
    for (int k = 1; k <= n - 2; k += 2)
      un -= projection_coefficient(table, n, k) * u[static_cast<std::size_t>(k / 2)];
    u.push_back(un);

    LadderRow row;
    row.order = n;
    row.determinant = d;
    row.norm = d / previous;
    row.numerator = un;
    row.term = un * un / row.norm;
    cumulative += 0.5 * row.term;
    row.cumulative = cumulative;
    ladder.rows.push_back(row);
    ladder.truncation_order = n;
    previous = d;
  }
  return ladder;
}

/// (1/(2 S_2)) [1 + (S_4 − 3 S_2²)² / (S_6 S_2 − S_4²)], where 2 S_2 equals
/// four times the Wigner-Yanase skew information.
inline double third_order_bound(const SkewMomentTable& table) {
  const double s2 = table[2];
  const double s4 = table[4];
  const double s6 = table[6];
  if (s2 <= rank_tolerance(table, 2))
    throw Error(ErrorCode::ZeroFisherInformation, "S_2 vanishes");
  const double denom = s6 * s2 - s4 * s4;
  if (detail::saturated(table, 3, denom, s2))
    throw Error(ErrorCode::RankSaturated, "S_6 S_2 - S_4^2 is below tolerance");
  const double excess = s4 - 3.0 * s2 * s2;
  return (1.0 + excess * excess / denom) / (2.0 * s2);
}

/// The same third-order structure built from ordinary central moments μ_k of H:
/// (1/(4μ_2)) [1 + (μ_4 − 3μ_2²)² / (μ_6 μ_2 − μ_4²)].
inline double central_moment_third_order_bound(const HermitianOperator& h,
                                               const DensityMatrix& rho) {
  const double mu2 = central_moment(h, rho, 2);
  const double mu4 = central_moment(h, rho, 4);
  const double mu6 = central_moment(h, rho, 6);
  const double scale = spectral_norm(shifted(h, -expectation(h, rho)));
  if (mu2 <= kRankTol * scale * scale)
    throw Error(ErrorCode::ZeroFisherInformation, "variance of H vanishes");
  const double denom = mu6 * mu2 - mu4 * mu4;
  if (denom <= kRankTol * std::pow(scale, 8))
    throw Error(ErrorCode::RankSaturated, "mu_6 mu_2 - mu_4^2 is below tolerance");
  const double excess = mu4 - 3.0 * mu2 * mu2;
  return (1.0 + excess * excess / denom) / (4.0 * mu2);
}

struct PairingCheck {
  double lhs = 0.0;  // estimator-free trace expansion
  double rhs = 0.0;  // (−1)^{m+2} (2m+1) S_{2m}
};

/// Both sides of tr(ξ^(2m+1)(ξT + Tξ)) = (−1)^{m+2}(2m+1) S_{2m}, with the
/// left side written out as the T-free sum over α = 0..m of
/// (−1)^{m+1−α} C(2m+1, α) [α tr(H^{α−1}ξH^{2m+1−α}ξ) − (2m+1−α) tr(H^{2m−α}ξH^αξ)].
inline PairingCheck pairing_identity_check(const DerivativeSet& d, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "pairing identity needs m >= 0");
  if (2 * m + 1 > kMaxDerivativeOrder)
    throw Error(ErrorCode::OrderTooLarge, "2m+1 exceeds the derivative cap");
  const auto hx = detail::power_times_xi(d.centered_hamiltonian(), d.xi(), 2 * m + 1);
  auto mixed = [&](int a, int b) {
    return detail::real_trace_product(hx[static_cast<std::size_t>(a)],
                                      hx[static_cast<std::size_t>(b)]);
  };
  const int top = 2 * m + 1;
  double lhs = 0.0;
  for (int alpha = 0; alpha <= m; ++alpha) {
    const double sign = ((m + 1 - alpha) % 2 == 0) ? 1.0 : -1.0;
    const double first = alpha == 0 ? 0.0 : alpha * mixed(alpha - 1, top - alpha);
    const double second = (top - alpha) * mixed(2 * m - alpha, alpha);
    lhs += sign * Binomial::of(top, alpha) * (first - second);
  }
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  const double s2m = detail::closed_form_from_products(hx, 2 * m);
  return {lhs, sign * top * s2m};
}

/// s(t) = √S_2 · t
inline double arc_length(const SkewMomentTable& table, double t) {
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "arc length needs t >= 0");
  return std::sqrt(std::max(table[2], 0.0)) * t;
}

struct GeometricReport {
  double arc_length = 0.0;
  double angle = 0.0;         // arccos(1 / (2 √((ΔT²+δT²)(ΔH²−δH²))))
  double direct_angle = 0.0;  // arccos(n̂ · ê₁)
  double residual = 0.0;      // |angle − direct_angle|
  double raw_cosine = 0.0;    // unclamped argument of the first arccos
  double estimator_spread = 0.0;    // ΔT² + δT²
  double hamiltonian_skew = 0.0;    // ΔH² − δH²
  HermitianOperator normal;
  HermitianOperator tangent;
};

inline constexpr double kGeometryClampTol = 1e-9;

namespace detail {

inline double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

}  // namespace detail

/// Angle between the unit normal of the level surface tr(Tξ²) = t and the
/// unit tangent of the curve, evaluated at the state rho with t as the
/// mean-adjustment value.
inline GeometricReport estimation_angle(const HermitianOperator& t_op, const DensityMatrix& rho,
                                        const HermitianOperator& h, double t) {
  require_same_dim(t_op, rho.op(), "estimation_angle");
  require_same_dim(h, rho.op(), "estimation_angle");
  const SqrtState xi = principal_sqrt(rho);
  const Matrix& x = xi.matrix();
  const Matrix& tm = t_op.matrix();

  const double t_scale = 1.0 + spectral_norm(t_op);
  const double h_scale = 1.0 + spectral_norm(h);
  const double mean = expectation(t_op, rho);
  const Matrix tx = tm * x;
  const double spread = detail::real_trace_product(tm * tm, rho.matrix()) +
                        detail::real_trace_product(tx, tx) - 2.0 * t * mean;
  const double skew = wy_skew_information(h, xi);
  if (spread <= 1e-12 * t_scale * t_scale)
    throw Error(ErrorCode::DegenerateSurface, "estimator dispersion vanishes");
  if (skew <= 1e-12 * h_scale * h_scale)
    throw Error(ErrorCode::DegenerateSurface, "Wigner-Yanase skew information vanishes");

  const HermitianOperator grad = HermitianOperator::symmetrized(x * tm + tm * x - 2.0 * t * x);
  const double grad_norm = std::sqrt(hs_norm_sq(grad));
  if (grad_norm <= 1e-12 * t_scale)
    throw Error(ErrorCode::DegenerateSurface, "level-surface normal vanishes");
  const HermitianOperator velocity =
      HermitianOperator::symmetrized(-kI * (h.matrix() * x - x * h.matrix()));

  GeometricReport r;
  r.estimator_spread = spread;
  r.hamiltonian_skew = skew;
  r.arc_length = std::sqrt(2.0 * skew) * std::abs(t);
  r.normal = (1.0 / grad_norm) * grad;
  r.tangent = (1.0 / std::sqrt(2.0 * skew)) * velocity;
  r.raw_cosine = 1.0 / (2.0 * std::sqrt(spread * skew));
  if (r.raw_cosine > 1.0 + kGeometryClampTol)
    throw Error(ErrorCode::InvalidGeometry,
                "(dT^2 + deltaT^2)(dH^2 - deltaH^2) < 1/4: the estimator is not locally "
                "unbiased for this family");
  r.angle = detail::clamped_acos(r.raw_cosine);
  r.direct_angle = detail::clamped_acos(hs_inner(r.normal, r.tangent));
  r.residual = std::abs(r.angle - r.direct_angle);
  return r;
}

inline GeometricReport estimation_angle(const HermitianOperator& t_op, const DensityMatrix& rho,
                                        const HermitianOperator& h) {
  return estimation_angle(t_op, rho, h, expectation(t_op, rho));
}

/// Affine rescaling T → (T − ⟨T⟩)/g + t·I with g = tr((ξT + Tξ) ξ'), so that
/// tr(T ξ²) = t and d/dt tr(T ξ_t²) = 1 at the given state.
inline HermitianOperator locally_unbiased_estimator(const HermitianOperator& t_op,
                                                    const SqrtState& xi,
                                                    const HermitianOperator& h, double t) {
  require_same_dim(t_op, xi.op(), "locally_unbiased_estimator");
  require_same_dim(h, xi.op(), "locally_unbiased_estimator");
  const Matrix& x = xi.matrix();
  const Matrix& tm = t_op.matrix();
  const Matrix velocity = -kI * (h.matrix() * x - x * h.matrix());
  const double g = detail::real_trace_product(x * tm + tm * x, velocity);
  const double scale = (1.0 + spectral_norm(t_op)) * (1.0 + spectral_norm(h));
  if (std::abs(g) <= 1e-12 * scale)
    throw Error(ErrorCode::DegenerateSurface,
                "the expectation of T does not move along the curve at this state");
  const double mean = detail::real_trace_product(tm, x * x);
  return shifted((1.0 / g) * shifted(t_op, -mean), t);
}

}  // namespace skewbound
