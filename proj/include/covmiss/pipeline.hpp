#pragma once

#include <optional>
#include <utility>

#include <covmiss/cross_validation.hpp>

namespace covmiss {

// Full description of one estimator run: the family, a fixed tuning value
// or a cross-validation plan, and the knobs shared by the threshold and
// bullet families.
template <typename Scalar>
struct EstimatorSpec {
  Method method = Method::Threshold;
  std::optional<double> fixed;  // bandwidth or multiplier; empty = cross-validate
  ThresholdRule<Scalar> rule = ThresholdRule<Scalar>::soft();
  bool strictBullet = false;
  bool thresholdDiagonal = false;
  // Known uniform observation rate for the bullet families; empty means the
  // rates are estimated from the mask.
  std::optional<double> knownRate;
  CvPlan cv{};
};

template <typename Scalar>
struct FittedEstimate {
  CovEstimate<Scalar> estimate;
  double tuning = 0.0;
  bool tuned = false;  // true when cross-validation chose the value
};

// Ingredients of one data set, computed once and shared by every estimator
// fitted on it.
template <typename Scalar>
class DataCache {
 public:
  explicit DataCache(const MaskedMatrix<Scalar>& m)
      : data_(&m), counts_(pairwise_counts(m)), moments_(generalized_covariance(m, counts_)) {}

  const MaskedMatrix<Scalar>& data() const { return *data_; }
  const PairwiseCounts& counts() const { return counts_; }
  const GeneralizedMoments<Scalar>& moments() const { return moments_; }
  const Matrix<Scalar>& theta() { return ensure_entry_variance(*data_, counts_, moments_); }
  const Matrix<Scalar>& bulletCov(bool printed, const std::optional<double>& knownRate) {
    auto& slot = printed ? bulletPrinted_ : bullet_;
    auto& rate = printed ? bulletPrintedRate_ : bulletRate_;
    if (slot && rate != knownRate) slot.reset();
    if (!slot) {
      slot = knownRate
                 ? bullet_covariance_known_rate(*data_, Scalar(*knownRate), printed).matrix()
                 : bullet_covariance(*data_, printed).matrix();
      rate = knownRate;
    }
    return *slot;
  }

 private:
  const MaskedMatrix<Scalar>* data_;
  PairwiseCounts counts_;
  GeneralizedMoments<Scalar> moments_;
  std::optional<Matrix<Scalar>> bullet_;
  std::optional<Matrix<Scalar>> bulletPrinted_;
  std::optional<double> bulletRate_;
  std::optional<double> bulletPrintedRate_;
};

// Fits one family at a given tuning value from cached ingredients.
template <typename Scalar>
CovEstimate<Scalar> fit_at(DataCache<Scalar>& cache, Method method, double t,
                           const ThresholdRule<Scalar>& rule, bool strictBullet,
                           bool thresholdDiagonal,
                           const std::optional<double>& knownRate = std::nullopt) {
  const auto k = static_cast<Index>(t);
  switch (method) {
    case Method::BlockTridiagonal: {
      auto e = blockwise_tridiagonal(SymmetricMatrix<Scalar>(cache.moments().cov), k);
      e.nMin = cache.counts().min();
      return e;
    }
    case Method::Tapering: {
      auto e = tapering(SymmetricMatrix<Scalar>(cache.moments().cov), k);
      e.nMin = cache.counts().min();
      return e;
    }
    case Method::Banding: {
      auto e = banding(SymmetricMatrix<Scalar>(cache.moments().cov), k);
      e.nMin = cache.counts().min();
      return e;
    }
    case Method::Threshold:
      return adaptive_threshold(cache.moments().cov, cache.theta(), cache.counts(), Scalar(t),
                                rule, thresholdDiagonal);
    case Method::ThresholdPd: {
      auto e = adaptive_threshold(cache.moments().cov, cache.theta(), cache.counts(), Scalar(t),
                                  rule, thresholdDiagonal);
      e = pd_correct(e, cache.counts());
      e.method = Method::ThresholdPd;
      return e;
    }
    case Method::BulletBlockTridiagonal: {
      auto e = blockwise_tridiagonal(
          SymmetricMatrix<Scalar>(cache.bulletCov(strictBullet, knownRate)), k);
      e.method = Method::BulletBlockTridiagonal;
      e.nMin = cache.counts().min();
      return e;
    }
    case Method::BulletThreshold: {
      auto e = adaptive_threshold(cache.bulletCov(strictBullet, knownRate), cache.theta(),
                                  cache.counts(), Scalar(t), rule, thresholdDiagonal);
      e.method = Method::BulletThreshold;
      return e;
    }
  }
  throw std::logic_error("unreachable");
}

// Tunes (when no fixed value is given) and fits on the full data. The folds
// overload lets callers share one set of splits across several estimators.
template <typename Scalar>
FittedEstimate<Scalar> fit_estimator(DataCache<Scalar>& cache,
                                     std::vector<FoldContext<Scalar>>* folds,
                                     const EstimatorSpec<Scalar>& spec) {
  double t = 0.0;
  bool tuned = false;
  if (spec.fixed) {
    t = *spec.fixed;
  } else {
    const CvOptions<Scalar> opts{spec.rule, spec.strictBullet, spec.thresholdDiagonal,
                                 spec.knownRate};
    if (folds) {
      t = cv_select_on(*folds, cache.data().vars(), spec.method, spec.cv.resolution, opts)
              .selected;
    } else {
      t = cv_select(cache.data(), spec.method, spec.cv, opts).selected;
    }
    tuned = true;
  }
  return {fit_at(cache, spec.method, t, spec.rule, spec.strictBullet, spec.thresholdDiagonal,
                 spec.knownRate),
          t, tuned};
}

template <typename Scalar>
FittedEstimate<Scalar> fit_estimator(const MaskedMatrix<Scalar>& m,
                                     const EstimatorSpec<Scalar>& spec) {
  DataCache<Scalar> cache(m);
  return fit_estimator(cache, static_cast<std::vector<FoldContext<Scalar>>*>(nullptr), spec);
}

}  // namespace covmiss
