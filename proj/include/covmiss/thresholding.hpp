#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <covmiss/cov_estimate.hpp>
#include <covmiss/masked_matrix.hpp>
#include <covmiss/moments.hpp>

namespace covmiss {

// Scalar thresholding rule T(z, lambda). All rules kill |z| <= lambda and
// move z by at most lambda. Soft and adaptive-lasso additionally shrink:
// |T(z)| <= c |y| for every y within lambda of z, with c = 1 for soft and
// c = eta for adaptive-lasso (eta = 1 reproduces soft exactly). The hard
// rule keeps z unshrunk, so no such constant exists for it.
template <typename Scalar>
class ThresholdRule {
 public:
  enum class Kind { Soft, Hard, AdaptiveLasso };

  static ThresholdRule soft() { return ThresholdRule(Kind::Soft, Scalar(1)); }
  static ThresholdRule hard() { return ThresholdRule(Kind::Hard, Scalar(1)); }
  static ThresholdRule adaptive_lasso(Scalar eta) {
    if (!(eta >= Scalar(1)))
      throw std::invalid_argument("adaptive-lasso exponent must be >= 1");
    return ThresholdRule(Kind::AdaptiveLasso, eta);
  }

  // "soft" | "hard" | "alasso:<eta>"
  static ThresholdRule parse(const std::string& text) {
    if (text == "soft") return soft();
    if (text == "hard") return hard();
    if (text.rfind("alasso:", 0) == 0) {
      std::size_t used = 0;
      double eta = 0;
      try {
        eta = std::stod(text.substr(7), &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad threshold rule '" + text + "'");
      }
      if (used != text.size() - 7)
        throw std::invalid_argument("bad threshold rule '" + text + "'");
      return adaptive_lasso(Scalar(eta));
    }
    throw std::invalid_argument("unknown threshold rule '" + text +
                                "' (expected soft, hard, or alasso:<eta>)");
  }

  Scalar apply(Scalar z, Scalar lambda) const {
    if (!(lambda >= Scalar(0)))
      throw std::invalid_argument("threshold level must be nonnegative");
    const Scalar az = std::abs(z);
    if (az <= lambda) return Scalar(0);
    switch (kind_) {
      case Kind::Soft:
        return std::copysign(az - lambda, z);
      case Kind::Hard:
        return z;
      case Kind::AdaptiveLasso:
        return z * (Scalar(1) - std::pow(lambda / az, eta_));
    }
    throw std::logic_error("unreachable");
  }

  Kind kind() const { return kind_; }
  Scalar eta() const { return eta_; }

  bool shrinks() const { return kind_ != Kind::Hard; }

  // The constant c of the shrink property above. The hard rule violates the
  // property for any constant (T(z) = z while y may sit at z - lambda), so
  // asking for its constant is a logic error.
  Scalar shrink_constant() const {
    switch (kind_) {
      case Kind::Soft: return Scalar(1);
      case Kind::AdaptiveLasso: return eta_;
      case Kind::Hard:
        throw std::logic_error("the hard rule has no shrink constant");
    }
    throw std::logic_error("unreachable");
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Soft: return "soft";
      case Kind::Hard: return "hard";
      case Kind::AdaptiveLasso: return "alasso:" + std::to_string(static_cast<double>(eta_));
    }
    throw std::logic_error("unreachable");
  }

 private:
  ThresholdRule(Kind kind, Scalar eta) : kind_(kind), eta_(eta) {}
  Kind kind_;
  Scalar eta_;
};

namespace detail {

// Entrywise thresholding with per-entry levels
//   lambda_ij = delta * sqrt(entryVar_ij * ln(p) / n_ij).
// Pairs with no co-observed sample stay zero; the diagonal passes through
// untouched unless thresholdDiagonal is set.
template <typename Scalar>
Matrix<Scalar> threshold_apply(const Matrix<Scalar>& cov, const Matrix<Scalar>& entryVar,
                               const PairwiseCounts& counts, Scalar delta,
                               const ThresholdRule<Scalar>& rule, bool thresholdDiagonal) {
  const Index p = cov.rows();
  const Scalar logp = Scalar(std::log(static_cast<double>(p)));
  Matrix<Scalar> out(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) {
      const std::int64_t c = counts(i, j);
      if (c == 0) {
        out(i, j) = Scalar(0);
        continue;
      }
      if (i == j && !thresholdDiagonal) {
        out(i, j) = cov(i, j);
        continue;
      }
      const Scalar lambda = delta * std::sqrt(entryVar(i, j) * logp / Scalar(c));
      out(i, j) = rule.apply(cov(i, j), lambda);
    }
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
CovEstimate<Scalar> adaptive_threshold(const Matrix<Scalar>& cov, const Matrix<Scalar>& entryVar,
                                       const PairwiseCounts& counts, Scalar delta,
                                       const ThresholdRule<Scalar>& rule,
                                       bool thresholdDiagonal = false) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
  if (entryVar.rows() != cov.rows() || entryVar.cols() != cov.cols())
    throw std::invalid_argument("entry variances do not match the covariance");
  if (counts.vars() != cov.rows())
    throw std::invalid_argument("pairwise counts do not match the covariance");
  if (!(delta >= Scalar(0)))
    throw std::invalid_argument("threshold multiplier must be nonnegative");
  return {SymmetricMatrix<Scalar>(
              detail::threshold_apply(cov, entryVar, counts, delta, rule, thresholdDiagonal)),
          Method::Threshold, static_cast<double>(delta), counts.min()};
}

// Convenience overload working from the data directly.
template <typename Scalar>
CovEstimate<Scalar> adaptive_threshold(const MaskedMatrix<Scalar>& m, Scalar delta,
                                       const ThresholdRule<Scalar>& rule,
                                       bool thresholdDiagonal = false) {
  const PairwiseCounts counts = pairwise_counts(m);
  GeneralizedMoments<Scalar> mom = generalized_covariance(m, counts);
  const Matrix<Scalar>& theta = ensure_entry_variance(m, counts, mom);
  return adaptive_threshold(mom.cov, theta, counts, delta, rule, thresholdDiagonal);
}

// Exact nonzero pattern of a symmetric matrix: the diagonal positions plus
// the upper-triangle pairs (i < j).
class SupportSet {
 public:
  template <typename Scalar>
  static SupportSet of(const SymmetricMatrix<Scalar>& s) {
    SupportSet out;
    out.p_ = s.dim();
    const Matrix<Scalar>& a = s.matrix();
    for (Index i = 0; i < out.p_; ++i)
      if (a(i, i) != Scalar(0)) out.diag_.push_back(i);
    for (Index i = 0; i < out.p_; ++i)
      for (Index j = i + 1; j < out.p_; ++j)
        if (a(i, j) != Scalar(0)) out.offDiag_.emplace_back(i, j);
    return out;
  }

  Index vars() const { return p_; }
  const std::vector<Index>& diagonal() const { return diag_; }
  const std::vector<std::pair<Index, Index>>& offDiagonal() const { return offDiag_; }

  bool operator==(const SupportSet& other) const {
    return p_ == other.p_ && diag_ == other.diag_ && offDiag_ == other.offDiag_;
  }

 private:
  Index p_ = 0;
  std::vector<Index> diag_;
  std::vector<std::pair<Index, Index>> offDiag_;
};

// Matthews correlation between two supports over the off-diagonal upper
// triangle. Returns 0 when any confusion factor is empty, by convention.
inline double mcc(const SupportSet& a, const SupportSet& b, Index p) {
  if (a.vars() != p || b.vars() != p)
    throw std::invalid_argument("supports do not match the stated dimension");
  const auto& pa = a.offDiagonal();
  const auto& pb = b.offDiagonal();
  std::size_t ia = 0, ib = 0, tp = 0;
  while (ia < pa.size() && ib < pb.size()) {
    if (pa[ia] == pb[ib]) { ++tp; ++ia; ++ib; }
    else if (pa[ia] < pb[ib]) ++ia;
    else ++ib;
  }
  const double cells = static_cast<double>(p) * static_cast<double>(p - 1) / 2.0;
  const double fp = static_cast<double>(pa.size() - tp);
  const double fn = static_cast<double>(pb.size() - tp);
  const double tpd = static_cast<double>(tp);
  const double tn = cells - tpd - fp - fn;
  const double f1 = tpd + fp, f2 = tpd + fn, f3 = tn + fp, f4 = tn + fn;
  if (f1 == 0 || f2 == 0 || f3 == 0 || f4 == 0) return 0.0;
  return (tpd * tn - fp * fn) / std::sqrt(f1 * f2 * f3 * f4);
}

// Diagonal lift to positive definiteness: when the smallest eigenvalue is
// negative, add |min eig| + ln(p)/nMin to the diagonal; otherwise return the
// estimate untouched. Off-diagonal entries, and hence the off-diagonal
// support, never change.
template <typename Scalar>
CovEstimate<Scalar> pd_correct(const CovEstimate<Scalar>& est, const PairwiseCounts& counts,
                               PowerOptions opt = {}) {
  if (counts.vars() != est.matrix.dim())
    throw std::invalid_argument("pairwise counts do not match the estimate");
  const Scalar minEig = min_eigenvalue(est.matrix, opt);
  if (minEig >= Scalar(0)) return est;
  const std::int64_t nMin = counts.min();
  if (nMin < 1) throw DataError("positive-definite lift needs a positive pairwise count floor");
  const Index p = est.matrix.dim();
  const Scalar shift =
      -minEig + Scalar(std::log(static_cast<double>(p)) / static_cast<double>(nMin));
  Matrix<Scalar> a = est.matrix.matrix();
  a.diagonal().array() += shift;
  return {SymmetricMatrix<Scalar>(std::move(a)), est.method, est.tuning, counts.min()};
}

// Entrywise margin map for guaranteed support recovery: true where
// |sigma_ij| > (4 + gamma) sqrt(theta_ij ln(p) / n_ij), and vacuously true
// where sigma_ij = 0 (nothing to recover there). A nonzero entry of a pair
// that is never co-observed cannot be recovered, so it maps to false.
template <typename Scalar>
BoolMatrix recovery_condition(const Matrix<Scalar>& sigma, const Matrix<Scalar>& theta,
                              const PairwiseCounts& counts, double gamma) {
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("sigma must be square");
  if (theta.rows() != sigma.rows() || theta.cols() != sigma.cols() ||
      counts.vars() != sigma.rows())
    throw std::invalid_argument("recovery condition inputs do not match");
  const Index p = sigma.rows();
  const double logp = std::log(static_cast<double>(p));
  BoolMatrix out(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) {
      if (sigma(i, j) == Scalar(0)) {
        out(i, j) = true;
        continue;
      }
      const std::int64_t c = counts(i, j);
      if (c == 0) {
        out(i, j) = false;
        continue;
      }
      const double margin = (4.0 + gamma) *
          std::sqrt(static_cast<double>(theta(i, j)) * logp / static_cast<double>(c));
      out(i, j) = std::abs(static_cast<double>(sigma(i, j))) > margin;
    }
  }
  return out;
}

}  // namespace covmiss
