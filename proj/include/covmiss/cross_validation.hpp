#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <covmiss/bullet.hpp>

namespace covmiss {

// One tuning run: H independent random splits into a training part of
// roughly n (K-1)/K samples and a validation part of the remaining n/K.
struct CvPlan {
  int folds = 5;        // K
  int splits = 5;       // H
  int resolution = 20;  // N, grid fineness
  std::uint64_t seed = 0;
};

// Candidate bandwidths {1} plus ceil(p^(i/N)) for i = 1..N, deduplicated,
// ascending. Covers 1..p on a log-ish scale.
inline std::vector<Index> bandwidth_grid(Index p, int resolution) {
  if (p < 1) throw std::invalid_argument("grid needs a positive dimension");
  if (resolution < 1) throw std::invalid_argument("grid resolution must be positive");
  std::vector<Index> grid{1};
  for (int i = 1; i <= resolution; ++i) {
    const double e = static_cast<double>(i) / static_cast<double>(resolution);
    auto k = static_cast<Index>(std::ceil(std::pow(static_cast<double>(p), e)));
    k = std::min(std::max<Index>(1, k), p);
    if (k > grid.back()) grid.push_back(k);
  }
  return grid;
}

// Candidate threshold multipliers {0, 1/N, 2/N, ..., 4}.
inline std::vector<double> threshold_grid(int resolution) {
  if (resolution < 1) throw std::invalid_argument("grid resolution must be positive");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(4 * resolution + 1));
  for (int i = 0; i <= 4 * resolution; ++i)
    grid.push_back(static_cast<double>(i) / static_cast<double>(resolution));
  return grid;
}

template <typename Scalar>
struct CvOptions {
  ThresholdRule<Scalar> rule = ThresholdRule<Scalar>::soft();
  bool strictBullet = false;  // printed (1 - rho) normalization for bullet families
  bool thresholdDiagonal = false;
  // When set, bullet families use the known-rate baseline with this uniform
  // observation rate instead of estimated per-variable rates.
  std::optional<double> knownRate;
};

// Everything a tuning pass needs from one split, with the expensive pieces
// computed once and the family-specific ones filled on first use.
template <typename Scalar>
struct FoldContext {
  MaskedMatrix<Scalar> train;
  MaskedMatrix<Scalar> validate;
  PairwiseCounts trainCounts;
  GeneralizedMoments<Scalar> trainMoments;
  Matrix<Scalar> validateCov;
  std::optional<Matrix<Scalar>> trainBullet;
  std::optional<Matrix<Scalar>> trainBulletPrinted;
  std::optional<double> trainBulletRate;
  std::optional<double> trainBulletPrintedRate;

  const Matrix<Scalar>& trainTheta() {
    return ensure_entry_variance(train, trainCounts, trainMoments);
  }
  const Matrix<Scalar>& bulletCov(bool printed, const std::optional<double>& knownRate) {
    auto& slot = printed ? trainBulletPrinted : trainBullet;
    auto& rate = printed ? trainBulletPrintedRate : trainBulletRate;
    if (slot && rate != knownRate) slot.reset();
    if (!slot) {
      slot = knownRate
                 ? bullet_covariance_known_rate(train, Scalar(*knownRate), printed).matrix()
                 : bullet_covariance(train, printed).matrix();
      rate = knownRate;
    }
    return *slot;
  }
};

template <typename Scalar>
std::vector<FoldContext<Scalar>> build_fold_contexts(const MaskedMatrix<Scalar>& m,
                                                     const CvPlan& plan) {
  if (plan.folds < 2) throw std::invalid_argument("need at least two folds");
  if (plan.splits < 1) throw std::invalid_argument("need at least one split");
  const Index n = m.samples();
  if (n < plan.folds) throw DataError("fewer samples than folds");
  const Index nv = n / plan.folds;

  std::mt19937_64 rng(plan.seed);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));

  std::vector<FoldContext<Scalar>> out;
  out.reserve(static_cast<std::size_t>(plan.splits));
  for (int h = 0; h < plan.splits; ++h) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Index> tr(idx.begin(), idx.end() - nv);
    std::vector<Index> va(idx.end() - nv, idx.end());
    std::sort(tr.begin(), tr.end());
    std::sort(va.begin(), va.end());
    MaskedMatrix<Scalar> train = m.columns(tr);
    MaskedMatrix<Scalar> validate = m.columns(va);
    PairwiseCounts tc = pairwise_counts(train);
    GeneralizedMoments<Scalar> tm = generalized_covariance(train, tc);
    Matrix<Scalar> vc = generalized_covariance(validate).cov;
    out.push_back({std::move(train), std::move(validate), std::move(tc), std::move(tm),
                   std::move(vc), std::nullopt, std::nullopt});
  }
  return out;
}

struct CvSelection {
  double selected = 0.0;
  std::vector<double> grid;
  std::vector<double> risk;  // averaged over splits, aligned with grid
};

// Scores every grid value on every split against the validation fold's
// generalized covariance (squared Frobenius distance, the same target for
// all families) and picks the minimizer, smallest value first on ties.
template <typename Scalar>
CvSelection cv_select_on(std::vector<FoldContext<Scalar>>& folds, Index p, Method method,
                         int resolution, const CvOptions<Scalar>& opts) {
  if (folds.empty()) throw std::invalid_argument("no folds to tune on");

  std::vector<double> grid;
  if (is_banding_family(method)) {
    std::vector<Index> kGrid = bandwidth_grid(p, resolution);
    if (method == Method::Tapering) {
      // Tapering needs even bandwidths; push each candidate up to the next
      // even value and deduplicate.
      std::vector<Index> even;
      for (Index k : kGrid) {
        const Index e = k + (k % 2);
        if (even.empty() || e > even.back()) even.push_back(e);
      }
      kGrid = std::move(even);
    }
    grid.assign(kGrid.begin(), kGrid.end());
  } else {
    grid = threshold_grid(resolution);
  }

  const double logp = std::log(static_cast<double>(p));
  std::vector<double> risk(grid.size(), 0.0);
  for (auto& fold : folds) {
    const bool bullet = is_bullet_family(method);
    const Matrix<Scalar>& sigma =
        bullet ? fold.bulletCov(opts.strictBullet, opts.knownRate) : fold.trainMoments.cov;
    if (is_banding_family(method)) {
      for (std::size_t ti = 0; ti < grid.size(); ++ti) {
        const auto k = static_cast<Index>(grid[ti]);
        Matrix<Scalar> est;
        switch (method) {
          case Method::Tapering: est = detail::taper_apply(Matrix<Scalar>(sigma), k); break;
          case Method::Banding: est = detail::band_apply(Matrix<Scalar>(sigma), k); break;
          default: est = detail::block_tridiagonal_apply(Matrix<Scalar>(sigma), k); break;
        }
        risk[ti] += static_cast<double>((est - fold.validateCov).squaredNorm());
      }
    } else {
      const Matrix<Scalar>& theta = fold.trainTheta();
      // Per-entry base level sqrt(theta ln p / n); the grid scales it.
      Matrix<Scalar> level(p, p);
      for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < p; ++i) {
          const std::int64_t c = fold.trainCounts(i, j);
          level(i, j) =
              c > 0 ? Scalar(std::sqrt(static_cast<double>(theta(i, j)) * logp /
                                       static_cast<double>(c)))
                    : Scalar(0);
        }
      for (std::size_t ti = 0; ti < grid.size(); ++ti) {
        const auto t = Scalar(grid[ti]);
        double r = 0.0;
        for (Index j = 0; j < p; ++j)
          for (Index i = 0; i < p; ++i) {
            Scalar e;
            if (fold.trainCounts(i, j) == 0) e = Scalar(0);
            else if (i == j && !opts.thresholdDiagonal) e = sigma(i, j);
            else e = opts.rule.apply(sigma(i, j), t * level(i, j));
            const double d = static_cast<double>(e - fold.validateCov(i, j));
            r += d * d;
          }
        risk[ti] += r;
      }
    }
  }

  const double h = static_cast<double>(folds.size());
  std::size_t best = 0;
  for (std::size_t ti = 0; ti < risk.size(); ++ti) {
    risk[ti] /= h;
    if (risk[ti] < risk[best]) best = ti;
  }
  return {grid[best], std::move(grid), std::move(risk)};
}

template <typename Scalar>
CvSelection cv_select(const MaskedMatrix<Scalar>& m, Method method, const CvPlan& plan,
                      const CvOptions<Scalar>& opts = {}) {
  auto folds = build_fold_contexts(m, plan);
  return cv_select_on(folds, m.vars(), method, plan.resolution, opts);
}

}  // namespace covmiss
