#pragma once

#include <cmath>
#include <string>

#include <covmiss/cov_estimate.hpp>

namespace covmiss {

// Contiguous blocks of k consecutive variables; the last block is truncated
// when k does not divide p.
class BlockPartition {
 public:
  BlockPartition(Index p, Index k) : p_(p), k_(k) {
    if (p < 1) throw std::invalid_argument("partition needs at least one variable");
    if (k < 1 || k > p)
      throw std::invalid_argument("block size must lie in [1, p], got " + std::to_string(k));
  }

  Index vars() const { return p_; }
  Index block() const { return k_; }
  Index count() const { return (p_ + k_ - 1) / k_; }
  Index blockOf(Index i) const { return i / k_; }
  // Offset and length of block j.
  std::pair<Index, Index> range(Index j) const {
    const Index begin = j * k_;
    return {begin, std::min(k_, p_ - begin)};
  }

 private:
  Index p_;
  Index k_;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> block_tridiagonal_apply(Matrix<Scalar> a, Index k) {
  const BlockPartition part(a.rows(), k);
  for (Index j = 0; j < a.cols(); ++j) {
    const Index bj = part.blockOf(j);
    for (Index i = 0; i < a.rows(); ++i) {
      const Index bi = part.blockOf(i);
      if (bi > bj + 1 || bj > bi + 1) a(i, j) = Scalar(0);
    }
  }
  return a;
}

template <typename Scalar>
Matrix<Scalar> taper_apply(Matrix<Scalar> a, Index k) {
  if (k < 2 || k % 2 != 0) {
    // Suggest the nearest valid bandwidths; both clamp to 2 so a negative or
    // zero input never yields an invalid suggestion.
    const Index up = std::max<Index>(2, k % 2 != 0 ? k + 1 : k);
    const Index down = std::max<Index>(2, k - 1);
    const std::string hint =
        up == down ? std::to_string(up) : std::to_string(up) + " or " + std::to_string(down);
    throw std::invalid_argument("tapering bandwidth must be even and >= 2, got " +
                                std::to_string(k) + " (try " + hint + ")");
  }
  const double kh = static_cast<double>(k) / 2.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const double d = static_cast<double>(i > j ? i - j : j - i);
      if (d <= kh) continue;
      a(i, j) = d < static_cast<double>(k) ? a(i, j) * Scalar(2.0 - d / kh) : Scalar(0);
    }
  }
  return a;
}

template <typename Scalar>
Matrix<Scalar> band_apply(Matrix<Scalar> a, Index k) {
  if (k < 0) throw std::invalid_argument("band width must be nonnegative");
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if ((i > j ? i - j : j - i) > k) a(i, j) = Scalar(0);
  return a;
}

}  // namespace detail

// Keeps the k x k diagonal blocks and their immediate neighbors, zeroing
// every block pair further than one step apart.
template <typename Scalar>
CovEstimate<Scalar> blockwise_tridiagonal(const SymmetricMatrix<Scalar>& s, Index k) {
  return {SymmetricMatrix<Scalar>(detail::block_tridiagonal_apply(Matrix<Scalar>(s.matrix()), k)),
          Method::BlockTridiagonal, static_cast<double>(k)};
}

// Entrywise taper: full weight up to k/2 off the diagonal, linear decay to
// zero at k. Only even bandwidths keep the half-width integral.
template <typename Scalar>
CovEstimate<Scalar> tapering(const SymmetricMatrix<Scalar>& s, Index k) {
  return {SymmetricMatrix<Scalar>(detail::taper_apply(Matrix<Scalar>(s.matrix()), k)),
          Method::Tapering, static_cast<double>(k)};
}

// Hard band: keep |i-j| <= k, zero the rest. k = p-1 is the identity
// transform.
template <typename Scalar>
CovEstimate<Scalar> banding(const SymmetricMatrix<Scalar>& s, Index k) {
  return {SymmetricMatrix<Scalar>(detail::band_apply(Matrix<Scalar>(s.matrix()), k)),
          Method::Banding, static_cast<double>(k)};
}

// Rate-optimal bandwidth for an alpha-smooth bandable target given the
// smallest pairwise count: nMin^(1/(2 alpha + 1)), rounded half up and
// clamped to at least 1.
inline Index oracle_bandwidth(std::int64_t nMin, double alpha) {
  if (nMin < 1) throw std::invalid_argument("bandwidth needs a positive sample count");
  if (!(alpha > 0)) throw std::invalid_argument("smoothness exponent must be positive");
  const double k = std::floor(std::pow(static_cast<double>(nMin), 1.0 / (2.0 * alpha + 1.0)) + 0.5);
  return std::max<Index>(1, static_cast<Index>(k));
}

}  // namespace covmiss
