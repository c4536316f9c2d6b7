#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <covmiss/masked_matrix.hpp>

namespace covmiss {

// First and second generalized moments of an incomplete data set. cov is the
// per-pair average of cross products over co-observed samples; it reduces to
// the divisor-n sample covariance under a full mask but is in general not
// positive semidefinite. entryVar holds the per-entry variance of those
// cross products (filled on demand, see ensure_entry_variance).
template <typename Scalar>
struct GeneralizedMoments {
  Vector<Scalar> mean;
  Matrix<Scalar> cov;
  // Pairs (i <= j) with no co-observed sample. Their cov entries are set to
  // zero; they carry no evidence and never enter a support.
  std::vector<std::pair<Index, Index>> zeroCountPairs;
  std::optional<Matrix<Scalar>> entryVar;
};

// Per-variable mean over the observed samples. A variable that is never
// observed has no mean, which is an error here and not a zero.
template <typename Scalar>
Vector<Scalar> generalized_mean(const MaskedMatrix<Scalar>& m) {
  const Vector<Scalar> counts = m.mask().rowwise().sum();
  for (Index i = 0; i < m.vars(); ++i)
    if (counts(i) == Scalar(0))
      throw DataError("variable " + std::to_string(i) + " is never observed");
  // Masked cells are canonical zeros, so the full row sum is the observed sum.
  return m.values().rowwise().sum().cwiseQuotient(counts);
}

namespace detail {

// Centered values with the mask re-applied: zero wherever unobserved,
// X_ik - mean_i wherever observed.
template <typename Scalar>
Matrix<Scalar> centered_observed(const MaskedMatrix<Scalar>& m, const Vector<Scalar>& mean) {
  return (m.values().colwise() - mean).cwiseProduct(m.mask());
}

}  // namespace detail

template <typename Scalar>
GeneralizedMoments<Scalar> generalized_covariance(const MaskedMatrix<Scalar>& m,
                                                  const PairwiseCounts& counts) {
  if (counts.vars() != m.vars())
    throw std::invalid_argument("pairwise counts do not match the data");
  const Index p = m.vars();
  GeneralizedMoments<Scalar> out;
  out.mean = generalized_mean(m);
  const Matrix<Scalar> y = detail::centered_observed(m, out.mean);
  Matrix<Scalar> g = Matrix<Scalar>::Zero(p, p);
  g.template selfadjointView<Eigen::Lower>().rankUpdate(y);
  detail::mirror_lower(g);
  out.cov.resize(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) {
      const std::int64_t c = counts(i, j);
      out.cov(i, j) = c > 0 ? g(i, j) / Scalar(c) : Scalar(0);
      if (c == 0 && i <= j) out.zeroCountPairs.emplace_back(i, j);
    }
  }
  return out;
}

template <typename Scalar>
GeneralizedMoments<Scalar> generalized_covariance(const MaskedMatrix<Scalar>& m) {
  return generalized_covariance(m, pairwise_counts(m));
}

// Per-entry variance of the centered cross products over co-observed
// samples: the average of (product - cov_ij)^2. Computed via the square
// identity; tiny negative rounding is clamped since a variance cannot be
// negative. Pairs without evidence get zero.
template <typename Scalar>
const Matrix<Scalar>& ensure_entry_variance(const MaskedMatrix<Scalar>& m,
                                            const PairwiseCounts& counts,
                                            GeneralizedMoments<Scalar>& moments) {
  if (moments.entryVar) return *moments.entryVar;
  const Index p = m.vars();
  const Matrix<Scalar> y = detail::centered_observed(m, moments.mean);
  const Matrix<Scalar> q = y.cwiseProduct(y);
  Matrix<Scalar> t = Matrix<Scalar>::Zero(p, p);
  t.template selfadjointView<Eigen::Lower>().rankUpdate(q);
  detail::mirror_lower(t);
  Matrix<Scalar> theta(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) {
      const std::int64_t c = counts(i, j);
      if (c > 0) {
        const Scalar mean2 = moments.cov(i, j) * moments.cov(i, j);
        theta(i, j) = std::max(Scalar(0), t(i, j) / Scalar(c) - mean2);
      } else {
        theta(i, j) = Scalar(0);
      }
    }
  }
  moments.entryVar = std::move(theta);
  return *moments.entryVar;
}

template <typename Scalar>
Matrix<Scalar> entry_variance(const MaskedMatrix<Scalar>& m, const PairwiseCounts& counts,
                              const GeneralizedMoments<Scalar>& moments) {
  GeneralizedMoments<Scalar> copy{moments.mean, moments.cov, moments.zeroCountPairs, std::nullopt};
  return ensure_entry_variance(m, counts, copy);
}

}  // namespace covmiss
