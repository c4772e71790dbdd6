#pragma once

// Seeded instance generation with a fixed algorithm, so that a seed names the
// same instance on every platform:
//
//   * splitmix64 expands a 64-bit seed into the four words of xoshiro256**;
//   * uniform doubles are (next() >> 11) · 2^-53, in [0, 1);
//   * normals come in Box-Muller pairs from u1 = 1 − uniform(), u2 = uniform():
//     r = √(−2 ln u1), z0 = r cos 2πu2, z1 = r sin 2πu2 (z0 first);
//   * a standard complex Gaussian has independent real and imaginary parts of
//     variance 1/2 (real part drawn first);
//   * matrices are filled row by row.
//
// A random instance of dimension d and rank r draws, in this order, G (d×r),
// A (d×d) and optionally B (d×d), and sets ρ = GG†/tr(GG†), H = (A + A†)/2,
// T = (B + B†)/2.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "skewbound/linalg.hpp"

namespace skewbound {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

/// Seed of trial `index` under master seed `master`: output index+1 of a
/// splitmix64 stream started at `master`.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64_mix(master + kGoldenGamma * (index + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (cached_) {
      const double z = *cached_;
      cached_.reset();
      return z;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phase = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(phase);
    return r * std::cos(phase);
  }

  Complex complex_normal() {
    const double re = normal() * std::numbers::sqrt2 / 2.0;
    const double im = normal() * std::numbers::sqrt2 / 2.0;
    return {re, im};
  }

  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
  std::optional<double> cached_;
};

/// (A + A†)/2 with A standard complex Gaussian.
inline HermitianOperator random_hermitian(Rng& rng, Eigen::Index dim) {
  const Matrix a = rng.gaussian_matrix(dim, dim);
  return HermitianOperator::symmetrized(a);
}

/// GG†/tr(GG†) with G a dim×rank standard complex Gaussian.
inline DensityMatrix random_density(Rng& rng, Eigen::Index dim, Eigen::Index rank) {
  const Matrix g = rng.gaussian_matrix(dim, rank);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(HermitianOperator::symmetrized(rho));
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian
/// matrix, with the phases of R's diagonal absorbed into Q.
inline Matrix random_unitary(Rng& rng, Eigen::Index dim) {
  const Matrix z = rng.gaussian_matrix(dim, dim);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

struct Instance {
  std::string label;
  HermitianOperator hamiltonian;
  DensityMatrix state;
  std::optional<HermitianOperator> estimator;
};

inline Instance random_instance(std::uint64_t seed, Eigen::Index dim, Eigen::Index rank,
                                bool with_estimator = false) {
  if (dim < 1 || rank < 1 || rank > dim)
    throw Error(ErrorCode::InvalidArgument, "random instance needs 1 <= rank <= dim");
  Rng rng(seed);
  DensityMatrix rho = random_density(rng, dim, rank);
  HermitianOperator h = random_hermitian(rng, dim);
  std::optional<HermitianOperator> t;
  if (with_estimator) t = random_hermitian(rng, dim);
  return {"random-d" + std::to_string(dim) + "-r" + std::to_string(rank) + "-s" +
              std::to_string(seed),
          std::move(h), std::move(rho), std::move(t)};
}

}  // namespace skewbound
