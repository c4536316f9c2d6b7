#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace covmiss {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Observation counts are exact integers; they are cast to Scalar only at the
// point of division.
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

// Copies the lower triangle onto the upper one so symmetric results of
// rank updates are symmetric to the bit, not just up to GEMM rounding.
template <typename Scalar>
inline void mirror_lower(Matrix<Scalar>& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = j + 1; i < a.rows(); ++i) a(j, i) = a(i, j);
}

}  // namespace detail
}  // namespace covmiss
