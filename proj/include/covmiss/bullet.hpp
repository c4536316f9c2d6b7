#pragma once

#include <stdexcept>
#include <string>

#include <covmiss/banding.hpp>
#include <covmiss/moments.hpp>
#include <covmiss/thresholding.hpp>

namespace covmiss {

// Fraction of samples in which each variable is observed.
template <typename Scalar>
Vector<Scalar> observed_fractions(const MaskedMatrix<Scalar>& m) {
  return m.mask().rowwise().mean();
}

// Baseline covariance computed from the zero-filled data matrix: missing
// cells stay zero, the column means are taken over all n samples, and the
// centered products are summed over all n samples, so a cell observed in
// only one of the two variables still contributes a (-mean) noise term.
// That construction, not just the divisors, is what separates the baseline
// from the pairwise-complete covariance:
//   off-diagonal (i, j):  sum_k Zc_ik Zc_jk / (n rho_i rho_j)
//   diagonal     (i, i):  sum_k Zc_ik^2     / (n rho_i)
// with Z the zero-filled values and Zc = Z - rowmean(Z). Under a full mask
// this is again the divisor-n sample covariance. printedNormalization =
// true swaps every rho factor for (1 - rho), reproducing a published
// variant of the formula verbatim; that variant divides by zero for a
// fully observed variable, which is reported as a data error.
template <typename Scalar>
SymmetricMatrix<Scalar> bullet_covariance(const MaskedMatrix<Scalar>& m,
                                          bool printedNormalization = false) {
  const Index p = m.vars();
  const Index n = m.samples();
  const Vector<Scalar> rho = observed_fractions(m);
  Vector<Scalar> f(p);
  for (Index i = 0; i < p; ++i) {
    f(i) = printedNormalization ? Scalar(1) - rho(i) : rho(i);
    if (f(i) == Scalar(0)) {
      if (printedNormalization)
        throw DataError("printed normalization divides by zero for fully observed variable " +
                        std::to_string(i));
      throw DataError("variable " + std::to_string(i) + " is never observed");
    }
  }
  // Masked cells hold canonical zeros, so values() is the zero-filled matrix.
  const Vector<Scalar> mean = m.values().rowwise().mean();
  const Matrix<Scalar> y = m.values().colwise() - mean;
  Matrix<Scalar> g = Matrix<Scalar>::Zero(p, p);
  g.template selfadjointView<Eigen::Lower>().rankUpdate(y);
  detail::mirror_lower(g);
  // Fill the lower triangle and mirror so the result is bit-exact symmetric;
  // (n * f_i) * f_j and (n * f_j) * f_i can round differently.
  Matrix<Scalar> cov(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = j; i < p; ++i) {
      const Scalar denom = i == j ? Scalar(n) * f(i) : Scalar(n) * (f(i) * f(j));
      cov(i, j) = g(i, j) / denom;
    }
  }
  detail::mirror_lower(cov);
  return SymmetricMatrix<Scalar>(std::move(cov));
}

// Known-rate form of the baseline for data whose cells were observed
// independently with one known probability rho: raw zero-filled products
// over all n samples with fixed divisors,
//   off-diagonal (i, j):  sum_k Z_ik Z_jk / (n rho^2)
//   diagonal     (i, i):  sum_k Z_ik^2    / (n rho)
// and no mean correction (the data are taken as centered). The fixed
// divisors keep the co-observation count jitter in the estimate, which the
// estimated-rate form above partially cancels; both behaviors are wanted
// depending on whether the rate is genuinely known. printedNormalization
// swaps rho for (1 - rho), which coincides at rho = 1/2 and divides by
// zero at rho = 1.
template <typename Scalar>
SymmetricMatrix<Scalar> bullet_covariance_known_rate(const MaskedMatrix<Scalar>& m, Scalar rho,
                                                     bool printedNormalization = false) {
  if (!(rho > Scalar(0)) || rho > Scalar(1))
    throw std::invalid_argument("observation rate must be in (0, 1]");
  const Scalar f = printedNormalization ? Scalar(1) - rho : rho;
  if (f == Scalar(0))
    throw DataError("printed normalization divides by zero at a unit observation rate");
  const Index p = m.vars();
  const Index n = m.samples();
  Matrix<Scalar> g = Matrix<Scalar>::Zero(p, p);
  g.template selfadjointView<Eigen::Lower>().rankUpdate(m.values());
  Matrix<Scalar> cov(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = j; i < p; ++i) {
      const Scalar denom = i == j ? Scalar(n) * f : Scalar(n) * f * f;
      cov(i, j) = g(i, j) / denom;
    }
  }
  detail::mirror_lower(cov);
  return SymmetricMatrix<Scalar>(std::move(cov));
}

template <typename Scalar>
CovEstimate<Scalar> bullet_block_tridiagonal(const MaskedMatrix<Scalar>& m, Index k,
                                             bool printedNormalization = false) {
  CovEstimate<Scalar> est = blockwise_tridiagonal(bullet_covariance(m, printedNormalization), k);
  est.method = Method::BulletBlockTridiagonal;
  est.nMin = pairwise_counts(m).min();
  return est;
}

// Thresholds the baseline covariance entrywise. The per-entry levels reuse
// the pairwise-count machinery (entry variances and n_ij), which is what
// calibrates the level to each entry's actual evidence.
template <typename Scalar>
CovEstimate<Scalar> bullet_adaptive_threshold(const MaskedMatrix<Scalar>& m, Scalar delta,
                                              const ThresholdRule<Scalar>& rule,
                                              bool printedNormalization = false,
                                              bool thresholdDiagonal = false) {
  const PairwiseCounts counts = pairwise_counts(m);
  GeneralizedMoments<Scalar> mom = generalized_covariance(m, counts);
  const Matrix<Scalar>& theta = ensure_entry_variance(m, counts, mom);
  const SymmetricMatrix<Scalar> base = bullet_covariance(m, printedNormalization);
  CovEstimate<Scalar> est =
      adaptive_threshold(base.matrix(), theta, counts, delta, rule, thresholdDiagonal);
  est.method = Method::BulletThreshold;
  return est;
}

}  // namespace covmiss
