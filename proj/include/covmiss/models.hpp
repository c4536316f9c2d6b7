#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include <covmiss/masked_matrix.hpp>
#include <covmiss/matrix_num.hpp>

namespace covmiss {

// Bandable target with linearly decaying entries, zero beyond lag 4:
// sigma_ij = max(0, 1 - |i-j|/5).
template <typename Scalar>
Matrix<Scalar> linear_decay_model(Index p) {
  if (p < 1) throw std::invalid_argument("model dimension must be positive");
  Matrix<Scalar> s(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) {
      const double d = static_cast<double>(i > j ? i - j : j - i);
      s(i, j) = Scalar(std::max(0.0, 1.0 - d / 5.0));
    }
  return s;
}

// Bandable target with polynomial tails: sigma_ij = (|i-j| + 1)^-2.
template <typename Scalar>
Matrix<Scalar> squared_decay_model(Index p) {
  if (p < 1) throw std::invalid_argument("model dimension must be positive");
  Matrix<Scalar> s(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) {
      const double d = static_cast<double>(i > j ? i - j : j - i);
      s(i, j) = Scalar(1.0 / ((d + 1.0) * (d + 1.0)));
    }
  return s;
}

// Bandable structure hidden by a random relabeling of the variables:
// sigma_ij = max(0, 1 - 0.2 |s(i) - s(j)|) for a uniform permutation s.
// Sparse but not bandable in the given order.
template <typename Scalar, typename Rng>
Matrix<Scalar> permutation_bandable_model(Index p, Rng& rng) {
  if (p < 1) throw std::invalid_argument("model dimension must be positive");
  std::vector<Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), Index(0));
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix<Scalar> s(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) {
      const double d = std::abs(static_cast<double>(perm[i] - perm[j]));
      s(i, j) = Scalar(std::max(0.0, 1.0 - 0.2 * d));
    }
  return s;
}

// Random sparse target: unit diagonal plus a normalized random symmetric
// perturbation. Off-diagonal slots of D take +1/-1 with probability 0.1
// each, and sigma = I + (D + D') / (|D + D'| + 0.01) with the spectral norm
// in the denominator, which keeps the result positive definite.
template <typename Scalar, typename Rng>
Matrix<Scalar> randomly_sparse_model(Index p, Rng& rng) {
  if (p < 1) throw std::invalid_argument("model dimension must be positive");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix<Scalar> d = Matrix<Scalar>::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) {
      if (i == j) continue;
      const double r = u(rng);
      if (r < 0.1) d(i, j) = Scalar(1);
      else if (r >= 0.9) d(i, j) = Scalar(-1);
    }
  Matrix<Scalar> a = d + d.transpose();
  const Scalar norm = a.cwiseAbs().maxCoeff() == Scalar(0) ? Scalar(0) : spectral_norm(a);
  Matrix<Scalar> s = a / (norm + Scalar(0.01));
  s.diagonal().array() += Scalar(1);
  return s;
}

// Draws Gaussian samples with the given covariance through its symmetric
// positive semidefinite square root. The square root (rather than a
// Cholesky factor) keeps singular targets usable; eigenvalues are clamped
// at zero and anything meaningfully negative rejects the matrix.
template <typename Scalar>
class GaussianSampler {
 public:
  explicit GaussianSampler(const Matrix<Scalar>& sigma, Vector<Scalar> mean = Vector<Scalar>())
      : mean_(std::move(mean)) {
    if (sigma.rows() != sigma.cols())
      throw std::invalid_argument("covariance must be square");
    if (mean_.size() == 0) mean_ = Vector<Scalar>::Zero(sigma.rows());
    if (mean_.size() != sigma.rows())
      throw std::invalid_argument("mean length does not match the covariance");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sigma);
    if (eig.info() != Eigen::Success)
      throw NumericError("eigendecomposition of the covariance failed");
    Vector<Scalar> vals = eig.eigenvalues();
    const Scalar scale = std::max(Scalar(1), vals.cwiseAbs().maxCoeff());
    for (Index i = 0; i < vals.size(); ++i) {
      if (vals(i) < Scalar(-1e-10) * scale)
        throw DataError("covariance is not positive semidefinite");
      vals(i) = std::max(Scalar(0), vals(i));
    }
    factor_ = eig.eigenvectors() * vals.cwiseSqrt().asDiagonal() *
              eig.eigenvectors().transpose();
  }

  Index vars() const { return factor_.rows(); }
  const Matrix<Scalar>& factor() const { return factor_; }

  // p x n, one sample per column. Standard normals are drawn column by
  // column, so the stream of draws is a fixed function of the generator
  // state.
  template <typename Rng>
  Matrix<Scalar> sample(Index n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("sample count must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix<Scalar> z(vars(), n);
    for (Index k = 0; k < n; ++k)
      for (Index i = 0; i < vars(); ++i) z(i, k) = Scalar(normal(rng));
    Matrix<Scalar> x = factor_ * z;
    if (!mean_.isZero(Scalar(0))) x.colwise() += mean_;
    return x;
  }

 private:
  Vector<Scalar> mean_;
  Matrix<Scalar> factor_;
};

// Cell-level missingness patterns. uniform: every cell is observed with the
// same probability. two_block: variables and samples are each split in half
// (first halves get the ceiling when odd); cells in the two diagonal
// variable-sample blocks are observed at rate rho, the off-diagonal blocks
// at rate rho2.
struct MissingMechanism {
  enum class Kind { Uniform, TwoBlock };

  Kind kind = Kind::Uniform;
  double rho = 1.0;
  double rho2 = 0.0;

  static MissingMechanism uniform(double rho) {
    if (!(rho > 0.0) || rho > 1.0)
      throw std::invalid_argument("observation rate must lie in (0, 1]");
    return {Kind::Uniform, rho, 0.0};
  }

  static MissingMechanism two_block(double rho1, double rho2) {
    if (!(rho1 > 0.0) || rho1 > 1.0 || !(rho2 > 0.0) || rho2 > 1.0)
      throw std::invalid_argument("observation rates must lie in (0, 1]");
    return {Kind::TwoBlock, rho1, rho2};
  }

  double rate(Index i, Index k, Index p, Index n) const {
    if (kind == Kind::Uniform) return rho;
    const bool topVar = i < (p + 1) / 2;
    const bool earlySample = k < (n + 1) / 2;
    return topVar == earlySample ? rho : rho2;
  }
};

// Draws a mask cell by cell. A variable that ends up with no observed
// sample is redrawn row by row (bounded retries) so every returned mask
// supports a generalized mean.
template <typename Scalar, typename Rng>
MaskedMatrix<Scalar> apply_missingness(const Matrix<Scalar>& x, const MissingMechanism& mech,
                                       Rng& rng) {
  const Index p = x.rows(), n = x.cols();
  if (p == 0 || n == 0) throw DataError("cannot mask an empty data set");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix<Scalar> mask(p, n);
  for (Index i = 0; i < p; ++i)
    for (Index k = 0; k < n; ++k)
      mask(i, k) = u(rng) < mech.rate(i, k, p, n) ? Scalar(1) : Scalar(0);
  constexpr int kMaxRetries = 100;
  for (Index i = 0; i < p; ++i) {
    int tries = 0;
    while (mask.row(i).sum() == Scalar(0)) {
      if (++tries > kMaxRetries)
        throw DataError("variable " + std::to_string(i) +
                        " could not be observed after bounded mask retries");
      for (Index k = 0; k < n; ++k)
        mask(i, k) = u(rng) < mech.rate(i, k, p, n) ? Scalar(1) : Scalar(0);
    }
  }
  return MaskedMatrix<Scalar>(x, std::move(mask));
}

// Average pairwise count over all ordered pairs, and average per-variable
// count. Both equal n under a full mask.
struct EffectiveSampleSizes {
  double pairAverage = 0.0;
  double perVariableAverage = 0.0;
};

inline EffectiveSampleSizes effective_sample_sizes(const PairwiseCounts& counts) {
  const Index p = counts.vars();
  double pairSum = 0.0, diagSum = 0.0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) pairSum += static_cast<double>(counts(i, j));
    diagSum += static_cast<double>(counts(j, j));
  }
  const double pd = static_cast<double>(p);
  return {pairSum / (pd * pd), diagSum / pd};
}

}  // namespace covmiss
