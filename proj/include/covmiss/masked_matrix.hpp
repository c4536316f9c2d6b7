#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <covmiss/errors.hpp>
#include <covmiss/types.hpp>

namespace covmiss {

// Incomplete data set: p variables by n samples plus a 0/1 observation mask
// of the same shape. Masked-out cells of values() are canonicalized to zero
// on construction, so sums over observed cells can run over the whole matrix
// and two inputs that differ only in unobserved garbage compare equal.
template <typename Scalar>
class MaskedMatrix {
 public:
  MaskedMatrix(Matrix<Scalar> values, Matrix<Scalar> mask)
      : values_(std::move(values)), mask_(std::move(mask)) {
    if (values_.rows() == 0 || values_.cols() == 0)
      throw DataError("masked matrix needs at least one variable and one sample");
    if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols())
      throw DataError("values and mask dimensions differ");
    for (Index k = 0; k < mask_.cols(); ++k) {
      for (Index i = 0; i < mask_.rows(); ++i) {
        const Scalar s = mask_(i, k);
        if (s != Scalar(0) && s != Scalar(1))
          throw DataError("mask entries must be exactly 0 or 1 (variable " +
                          std::to_string(i) + ", sample " + std::to_string(k) + ")");
        if (s == Scalar(1) && !std::isfinite(static_cast<double>(values_(i, k))))
          throw DataError("observed value is not finite (variable " +
                          std::to_string(i) + ", sample " + std::to_string(k) + ")");
        if (s == Scalar(0)) values_(i, k) = Scalar(0);
      }
    }
  }

  // Fully observed data.
  static MaskedMatrix complete(Matrix<Scalar> values) {
    Matrix<Scalar> ones = Matrix<Scalar>::Ones(values.rows(), values.cols());
    return MaskedMatrix(std::move(values), std::move(ones));
  }

  Index vars() const { return values_.rows(); }
  Index samples() const { return values_.cols(); }

  const Matrix<Scalar>& values() const { return values_; }
  const Matrix<Scalar>& mask() const { return mask_; }

  // Column (= sample) subset, order preserved. Used by cross-validation.
  template <typename IndexVec>
  MaskedMatrix columns(const IndexVec& idx) const {
    return MaskedMatrix(values_(Eigen::all, idx), mask_(Eigen::all, idx));
  }

 private:
  Matrix<Scalar> values_;
  Matrix<Scalar> mask_;
};

// Pairwise observation counts n_ij = #{k : variables i and j both observed
// in sample k}. The diagonal holds the per-variable counts.
class PairwiseCounts {
 public:
  explicit PairwiseCounts(CountMatrix counts) : counts_(std::move(counts)) {
    if (counts_.rows() != counts_.cols())
      throw std::invalid_argument("pairwise counts must be square");
  }

  Index vars() const { return counts_.rows(); }
  std::int64_t operator()(Index i, Index j) const { return counts_(i, j); }
  std::int64_t perVariable(Index i) const { return counts_(i, i); }
  std::int64_t min() const { return counts_.minCoeff(); }
  const CountMatrix& counts() const { return counts_; }

 private:
  CountMatrix counts_;
};

// n_ij as the Gram matrix of the mask. One rank update plus a mirror keeps
// the result exactly symmetric.
template <typename Scalar>
PairwiseCounts pairwise_counts(const MaskedMatrix<Scalar>& m) {
  const Index p = m.vars();
  Matrix<Scalar> g = Matrix<Scalar>::Zero(p, p);
  g.template selfadjointView<Eigen::Lower>().rankUpdate(m.mask());
  detail::mirror_lower(g);
  CountMatrix counts(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i)
      counts(i, j) = static_cast<std::int64_t>(std::llround(static_cast<double>(g(i, j))));
  return PairwiseCounts(std::move(counts));
}

}  // namespace covmiss
