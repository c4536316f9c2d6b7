#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <covmiss/errors.hpp>
#include <covmiss/types.hpp>

namespace covmiss {

// Square matrix that is symmetric to the bit. Symmetrizing is the caller's
// job; construction only checks.
template <typename Scalar>
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(Matrix<Scalar> m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("symmetric matrix must be square");
    for (Index j = 0; j < m_.cols(); ++j)
      for (Index i = j + 1; i < m_.rows(); ++i)
        if (m_(i, j) != m_(j, i))
          throw std::invalid_argument("matrix is not exactly symmetric");
  }

  Index dim() const { return m_.rows(); }
  const Matrix<Scalar>& matrix() const& { return m_; }
  Matrix<Scalar> matrix() && { return std::move(m_); }

 private:
  Matrix<Scalar> m_;
};

// Shared knobs of the iterative extreme-value routines. Tolerances are
// relative to the matrix scale; the start vector is drawn from a fixed seed
// so every run of a build produces the same result.
struct PowerOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  std::uint64_t seed = 0x5EEDBA5Eu;
};

namespace detail {

template <typename Scalar>
Vector<Scalar> seeded_unit_vector(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(u(rng));
  const Scalar norm = v.norm();
  if (norm == Scalar(0)) {
    v.setZero();
    v(0) = Scalar(1);
    return v;
  }
  return v / norm;
}

}  // namespace detail

// Largest singular value by alternating products with A and its transpose.
// s = |Av| never exceeds the true value; the run stops once the two-sided
// residual |A'u - s v| certifies s to within tol * s. When the two leading
// singular values nearly tie, the residual decays too slowly to certify
// within the iteration cap even though the value itself is fine, so that
// case falls back to an exact dense decomposition.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& expr,
                                       PowerOptions opt = {}) {
  using Scalar = typename Derived::Scalar;
  if (!(opt.tol > 0.0 && opt.tol <= 1e-2))
    throw std::invalid_argument("tolerance must lie in (0, 1e-2]");
  const Matrix<Scalar> a = expr.derived();
  if (!a.allFinite()) throw NumericError("spectral norm of a non-finite matrix");
  if (a.size() == 0) return Scalar(0);
  if (a.cwiseAbs().maxCoeff() == Scalar(0)) return Scalar(0);

  std::mt19937_64 rng(opt.seed);
  Vector<Scalar> v = detail::seeded_unit_vector<Scalar>(a.cols(), rng);
  for (int it = 0; it < opt.max_iter; ++it) {
    Vector<Scalar> u = a * v;
    const Scalar s = u.norm();
    if (s == Scalar(0)) {
      // v landed in the null space; a is nonzero, so redraw.
      v = detail::seeded_unit_vector<Scalar>(a.cols(), rng);
      continue;
    }
    u /= s;
    const Vector<Scalar> w = a.transpose() * u;
    const Scalar resid = (w - s * v).norm();
    if (resid <= Scalar(opt.tol) * s) return s;
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) {
      v = detail::seeded_unit_vector<Scalar>(a.cols(), rng);
      continue;
    }
    v = w / wn;
  }
  return Eigen::BDCSVD<Matrix<Scalar>>(a).singularValues()(0);
}

template <typename Scalar>
Scalar spectral_norm(const SymmetricMatrix<Scalar>& s, PowerOptions opt = {}) {
  return spectral_norm(s.matrix(), opt);
}

// Matrix l1 norm: largest absolute column sum.
template <typename Derived>
typename Derived::Scalar operator_l1_norm(const Eigen::MatrixBase<Derived>& expr) {
  if (!expr.derived().allFinite())
    throw NumericError("l1 norm of a non-finite matrix");
  if (expr.size() == 0) return typename Derived::Scalar(0);
  return expr.derived().cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Derived>
typename Derived::Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& expr) {
  if (!expr.derived().allFinite())
    throw NumericError("Frobenius norm of a non-finite matrix");
  return expr.derived().norm();
}

// Smallest eigenvalue of a symmetric matrix. With s = spectral_norm(A), the
// shifted matrix B = sI - A is positive semidefinite, so plain power
// iteration finds its top eigenvalue and min eig A = s - max eig B. The
// Rayleigh residual gives an absolute certificate on the scale of |A|.
template <typename Scalar>
Scalar min_eigenvalue(const SymmetricMatrix<Scalar>& sym, PowerOptions opt = {}) {
  if (!(opt.tol > 0.0 && opt.tol <= 1e-2))
    throw std::invalid_argument("tolerance must lie in (0, 1e-2]");
  const Matrix<Scalar>& a = sym.matrix();
  const Scalar scale = spectral_norm(a, opt);
  if (scale == Scalar(0)) return Scalar(0);

  const Index p = a.rows();
  Matrix<Scalar> b = -a;
  b.diagonal().array() += scale;

  std::mt19937_64 rng(opt.seed + 1);
  Vector<Scalar> v = detail::seeded_unit_vector<Scalar>(p, rng);
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vector<Scalar> u = b * v;
    const Scalar lambda = v.dot(u);
    const Scalar resid = (u - lambda * v).norm();
    if (resid <= Scalar(opt.tol) * scale) return scale - lambda;
    const Scalar un = u.norm();
    if (un == Scalar(0)) {
      v = detail::seeded_unit_vector<Scalar>(p, rng);
      continue;
    }
    v = u / un;
  }
  // Near-degenerate smallest eigenvalues stall the residual the same way;
  // the dense solver settles those exactly.
  return Eigen::SelfAdjointEigenSolver<Matrix<Scalar>>(a, Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

// Rows x cols slice in the given index order. Indices may repeat.
template <typename Derived>
Matrix<typename Derived::Scalar> submatrix(const Eigen::MatrixBase<Derived>& expr,
                                           const std::vector<Index>& rows,
                                           const std::vector<Index>& cols) {
  if (rows.empty() || cols.empty())
    throw std::invalid_argument("submatrix index sets must be nonempty");
  for (Index r : rows)
    if (r < 0 || r >= expr.rows()) throw std::invalid_argument("row index out of range");
  for (Index c : cols)
    if (c < 0 || c >= expr.cols()) throw std::invalid_argument("column index out of range");
  return expr.derived()(rows, cols);
}

}  // namespace covmiss
