#pragma once

// Brute-force verification path. Hermitian operators are mapped to real
// coordinate vectors in an orthonormal Hermitian basis, the derivative
// sequence is orthogonalized explicitly, and frame-level quantities are
// compared with their moment-determinant counterparts.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "skewbound/bound_ladder.hpp"
#include "skewbound/derivatives.hpp"
#include "skewbound/random.hpp"
#include "skewbound/skew_moments.hpp"

namespace skewbound {

/// Orthonormal basis of the d² real-dimensional space of d×d Hermitian
/// matrices: the diagonal units E_ii, then for each i < j in row-major order
/// (E_ij + E_ji)/√2 followed by i(E_ij − E_ji)/√2.
class RealVectorization {
 public:
  explicit RealVectorization(Eigen::Index dim) : dim_(dim) {
    if (dim < 1) throw Error(ErrorCode::InvalidArgument, "vectorization needs dim >= 1");
  }

  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index size() const noexcept { return dim_ * dim_; }

  RealVector coords(const HermitianOperator& a) const {
    if (a.dim() != dim_) throw Error(ErrorCode::DimMismatch, "vectorization dimension");
    const Matrix& m = a.matrix();
    RealVector c(size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < dim_; ++i) c(k++) = m(i, i).real();
    for (Eigen::Index i = 0; i < dim_; ++i)
      for (Eigen::Index j = i + 1; j < dim_; ++j) {
        c(k++) = std::numbers::sqrt2 * m(i, j).real();
        c(k++) = std::numbers::sqrt2 * m(i, j).imag();
      }
    return c;
  }

  HermitianOperator from_coords(const RealVector& c) const {
    if (c.size() != size()) throw Error(ErrorCode::DimMismatch, "coordinate vector length");
    Matrix m = Matrix::Zero(dim_, dim_);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < dim_; ++i) m(i, i) = c(k++);
    const double r = 1.0 / std::numbers::sqrt2;
    for (Eigen::Index i = 0; i < dim_; ++i)
      for (Eigen::Index j = i + 1; j < dim_; ++j) {
        const double re = c(k++);
        const double im = c(k++);
        m(i, j) = Complex(re * r, im * r);
        m(j, i) = Complex(re * r, -im * r);
      }
    return HermitianOperator::symmetrized(m);
  }

  HermitianOperator basis(Eigen::Index a) const {
    if (a < 0 || a >= size()) throw Error(ErrorCode::InvalidArgument, "basis index");
    return from_coords(RealVector::Unit(size(), a));
  }

 private:
  Eigen::Index dim_;
};

inline constexpr int kCompletionOrder = -1;
inline constexpr double kDefaultSaturationTol = 1e-20;

struct FrameVector {
  /// Derivative order this vector was built from, or kCompletionOrder.
  int source_order = kCompletionOrder;
  HermitianOperator psi;
  RealVector coords;
  double norm_sq = 0.0;
  /// Ψ = Σ_j coefficients[j] ξ^(j); empty for completion vectors.
  std::vector<double> coefficients;
};

struct OrthogonalFrame {
  Eigen::Index dim = 0;
  std::vector<FrameVector> vectors;
  /// Orders dropped because their residual after orthogonalization vanished.
  std::vector<int> saturated_orders;
  /// max |⟨ξ^(n), Ψ_k⟩| / (‖ξ^(n)‖‖Ψ_k‖) over odd n and even k.
  double parity_leakage = 0.0;

  const FrameVector* find(int order) const {
    for (const auto& v : vectors)
      if (v.source_order == order) return &v;
    return nullptr;
  }

  bool is_saturated(int order) const {
    return std::find(saturated_orders.begin(), saturated_orders.end(), order) !=
           saturated_orders.end();
  }

  std::vector<int> source_orders() const {
    std::vector<int> out;
    for (const auto& v : vectors) out.push_back(v.source_order);
    return out;
  }
};

/// Modified Gram-Schmidt with one full reorthogonalization pass over
/// ξ^(0) = ξ, then ξ^(1) … ξ^(max_n) (odd orders only when odd_only is set).
/// A derivative is dropped as saturated when its residual norm² is at most
/// tol times its original norm², or when the derivative itself is at most
/// tol · (1 + ‖H‖₂)^{2n} (a derivative that vanishes identically).
inline OrthogonalFrame build_frame(const DerivativeSet& d, int max_n, bool odd_only = true,
                                   double tol = kDefaultSaturationTol) {
  if (max_n < 0 || max_n > d.max_order())
    throw Error(ErrorCode::OrderTooLarge, "frame order exceeds the derivative set");
  const RealVectorization vec(d.xi().dim());
  OrthogonalFrame frame;
  frame.dim = d.xi().dim();
  const auto ncoef = static_cast<std::size_t>(max_n) + 1;

  {
    FrameVector v0;
    v0.source_order = 0;
    v0.psi = d.xi().op();
    v0.coords = vec.coords(v0.psi);
    v0.norm_sq = v0.coords.squaredNorm();
    v0.coefficients.assign(ncoef, 0.0);
    v0.coefficients[0] = 1.0;
    frame.vectors.push_back(std::move(v0));
  }

  for (int n = 1; n <= max_n; ++n) {
    if (odd_only && n % 2 == 0) continue;
    RealVector w = vec.coords(d.derivative(n));
    const double pre = w.squaredNorm();
    std::vector<double> c(ncoef, 0.0);
    c[static_cast<std::size_t>(n)] = 1.0;

    if (n % 2 == 1 && pre > 0.0) {
      for (const auto& p : frame.vectors)
        if (p.source_order % 2 == 0)
          frame.parity_leakage = std::max(
              frame.parity_leakage, std::abs(w.dot(p.coords)) / std::sqrt(pre * p.norm_sq));
    }

    for (int pass = 0; pass < 2; ++pass)
      for (const auto& p : frame.vectors) {
        const double f = w.dot(p.coords) / p.norm_sq;
        w -= f * p.coords;
        for (std::size_t j = 0; j < ncoef; ++j) c[j] -= f * p.coefficients[j];
      }

    const double post = w.squaredNorm();
    const double floor = tol * std::pow(d.scale(n), 2);
    if (post <= tol * pre || pre <= floor) {
      frame.saturated_orders.push_back(n);
      continue;
    }
    FrameVector v;
    v.source_order = n;
    v.coords = std::move(w);
    v.psi = vec.from_coords(v.coords);
    v.norm_sq = post;
    v.coefficients = std::move(c);
    frame.vectors.push_back(std::move(v));
  }
  return frame;
}

/// Extends the frame to d² mutually orthogonal vectors by appending the
/// vectorization basis in its fixed order and keeping what survives
/// orthogonalization. Completion vectors have unit norm.
inline OrthogonalFrame complete_frame(const OrthogonalFrame& frame, const RealVectorization& vec) {
  if (frame.dim != 0 && frame.dim != vec.dim())
    throw Error(ErrorCode::DimMismatch, "frame and vectorization dimensions differ");
  OrthogonalFrame out = frame;
  out.dim = vec.dim();
  std::vector<RealVector> unit;
  for (const auto& v : frame.vectors) unit.push_back(v.coords / std::sqrt(v.norm_sq));

  for (Eigen::Index a = 0; a < vec.size() && static_cast<Eigen::Index>(unit.size()) < vec.size();
       ++a) {
    RealVector w = RealVector::Unit(vec.size(), a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : unit) w -= w.dot(u) * u;
    const double n2 = w.squaredNorm();
    if (n2 <= 1e-8) continue;
    w /= std::sqrt(n2);
    unit.push_back(w);
    FrameVector fv;
    fv.source_order = kCompletionOrder;
    fv.coords = w;
    fv.psi = vec.from_coords(w);
    fv.norm_sq = 1.0;
    out.vectors.push_back(std::move(fv));
  }
  return out;
}

/// Σ_a ⟨A, Ψ_a⟩² / ‖Ψ_a‖², which equals ‖A‖² exactly for a complete frame.
inline double frame_projection_sum(const OrthogonalFrame& frame, const RealVector& a) {
  double acc = 0.0;
  for (const auto& v : frame.vectors) {
    const double p = a.dot(v.coords);
    acc += p * p / v.norm_sq;
  }
  return acc;
}

namespace detail {

/// Fixed-seed probes; relative Parseval residual above 1e-10 means incomplete.
inline void require_complete(const OrthogonalFrame& frame, const RealVectorization& vec) {
  if (static_cast<Eigen::Index>(frame.vectors.size()) != vec.size())
    throw Error(ErrorCode::IncompleteFrame, "frame has " + std::to_string(frame.vectors.size()) +
                                                " vectors, expected " +
                                                std::to_string(vec.size()));
  Rng rng(0x5EED5EED5EEDULL);
  for (int probe = 0; probe < 3; ++probe) {
    const RealVector a = vec.coords(random_hermitian(rng, vec.dim()));
    const double full = a.squaredNorm();
    if (std::abs(frame_projection_sum(frame, a) - full) > 1e-10 * full)
      throw Error(ErrorCode::IncompleteFrame, "completeness probe failed");
  }
}

}  // namespace detail

struct ParsevalTerm {
  int source_order = kCompletionOrder;
  double value = 0.0;  // (1/2) [tr((ξT + Tξ − 2tξ) Ψ)]² / tr(ΨΨ)
};

struct ParsevalDecomposition {
  std::vector<ParsevalTerm> terms;
  double total = 0.0;
  double mean = 0.0;  // t = tr(T ξ²)
};

/// Resolves ΔT² + δT² = (1/2) Σ_n [tr(∇t Ψ_n)]² / tr(Ψ_n Ψ_n) over a
/// complete frame, with ∇t = ξT + Tξ − 2tξ and t = tr(Tξ²).
inline ParsevalDecomposition parseval_decomposition(const HermitianOperator& t_op,
                                                    const SqrtState& xi,
                                                    const OrthogonalFrame& full_frame) {
  require_same_dim(t_op, xi.op(), "parseval_decomposition");
  const RealVectorization vec(xi.dim());
  detail::require_complete(full_frame, vec);
  const Matrix& x = xi.matrix();
  const Matrix& tm = t_op.matrix();
  ParsevalDecomposition out;
  out.mean = detail::real_trace_product(tm, x * x);
  const RealVector g =
      vec.coords(HermitianOperator::symmetrized(x * tm + tm * x - 2.0 * out.mean * x));
  for (const auto& v : full_frame.vectors) {
    const double p = g.dot(v.coords);
    const double term = 0.5 * p * p / v.norm_sq;
    out.terms.push_back({v.source_order, term});
    out.total += term;
  }
  return out;
}

/// U_{2m+1} rebuilt from the frame: Ψ_{2m+1} = Σ_j c_j ξ^(j), and each odd
/// pairing tr(ξ^(j)(ξT + Tξ)) is replaced by the estimator-free expansion of
/// pairing_identity_check. Even coefficients vanish up to rounding and are
/// not used.
inline double numerator_oracle(const DerivativeSet& d, const OrthogonalFrame& frame, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "numerator oracle needs m >= 0");
  const int n = 2 * m + 1;
  if (frame.is_saturated(n))
    throw Error(ErrorCode::RankSaturated, "frame saturated at order " + std::to_string(n));
  const FrameVector* v = frame.find(n);
  if (v == nullptr)
    throw Error(ErrorCode::InvalidArgument, "frame was not built through order " +
                                                std::to_string(n));
  double u = 0.0;
  for (int j = 1; j <= n; j += 2) {
    const double c = v->coefficients[static_cast<std::size_t>(j)];
    if (c != 0.0) u += c * pairing_identity_check(d, (j - 1) / 2).lhs;
  }
  return u;
}

struct DeterminantCrossCheck {
  double worst_norm_deviation = 0.0;         // N_n vs ‖Ψ_n‖², relative
  double worst_determinant_deviation = 0.0;  // D_{2n} vs Π_{k ≤ n} ‖Ψ_k‖², relative
  int compared_rows = 0;
  bool saturation_agrees = true;
};

/// Compares every ladder row against the odd-order frame.
inline DeterminantCrossCheck cross_check_determinants(const BoundLadder& ladder,
                                                      const OrthogonalFrame& odd_frame) {
  DeterminantCrossCheck out;
  double product = 1.0;
  for (const auto& row : ladder.rows) {
    const FrameVector* v = odd_frame.find(row.order);
    if (v == nullptr) {
      out.saturation_agrees = false;
      break;
    }
    product *= v->norm_sq;
    out.worst_norm_deviation =
        std::max(out.worst_norm_deviation, std::abs(row.norm - v->norm_sq) / v->norm_sq);
    out.worst_determinant_deviation =
        std::max(out.worst_determinant_deviation, std::abs(row.determinant - product) / product);
    ++out.compared_rows;
  }
  if (ladder.saturated && odd_frame.find(ladder.truncation_order + 2) != nullptr)
    out.saturation_agrees = false;
  return out;
}

}  // namespace skewbound
