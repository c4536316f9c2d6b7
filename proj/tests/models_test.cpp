#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include <covmiss/covmiss.hpp>

using namespace covmiss;

TEST_CASE("linear decay model") {
  const Matrix<double> s = linear_decay_model<double>(3);
  Matrix<double> expected(3, 3);
  expected << 1, 0.8, 0.6, 0.8, 1, 0.8, 0.6, 0.8, 1;
  CHECK((s - expected).cwiseAbs().maxCoeff() <= 1e-15);

  const Matrix<double> big = linear_decay_model<double>(12);
  CHECK(big(0, 5) == 0.0);  // zero beyond lag 4
  CHECK(big(0, 11) == 0.0);
  CHECK(big.diagonal().minCoeff() == 1.0);
  CHECK_THROWS_AS(linear_decay_model<double>(0), std::invalid_argument);
}

TEST_CASE("squared decay model") {
  const Matrix<double> s = squared_decay_model<double>(3);
  CHECK(s(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s(0, 2) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(s.diagonal().maxCoeff() == 1.0);
  for (Index d = 1; d < 3; ++d) CHECK(s(0, d) < s(0, d - 1));
}

TEST_CASE("decay models have non-increasing column tail sums") {
  for (const auto& s : {linear_decay_model<double>(30), squared_decay_model<double>(30)}) {
    double prev = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < 30; ++k) {
      double tail = 0.0;
      for (Index j = 0; j < 30; ++j) {
        double colTail = 0.0;
        for (Index i = 0; i < 30; ++i)
          if (std::abs(i - j) > k) colTail += std::abs(s(i, j));
        tail = std::max(tail, colTail);
      }
      CHECK(tail <= prev + 1e-12);
      prev = tail;
    }
  }
}

TEST_CASE("permutation bandable model is a relabeled band matrix") {
  const Index p = 20;
  std::mt19937_64 rng(12);
  const Matrix<double> s = permutation_bandable_model<double>(p, rng);
  const Matrix<double> base = [&] {
    Matrix<double> b(p, p);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i)
        b(i, j) = std::max(0.0, 1.0 - 0.2 * std::abs(static_cast<double>(i - j)));
    return b;
  }();

  CHECK(s.diagonal().minCoeff() == 1.0);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Conjugation by a permutation preserves the entry multiset and spectrum.
  std::vector<double> se(s.data(), s.data() + p * p);
  std::vector<double> be(base.data(), base.data() + p * p);
  std::sort(se.begin(), se.end());
  std::sort(be.begin(), be.end());
  CHECK(se == be);

  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(s), eb(base);
  CHECK((es.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-10);

  // Band width survives relabeling: at most 8 off-diagonal nonzeros per row.
  for (Index i = 0; i < p; ++i) {
    int nz = 0;
    for (Index j = 0; j < p; ++j)
      if (j != i && s(i, j) != 0.0) ++nz;
    CHECK(nz <= 8);
  }
}

TEST_CASE("randomly sparse model is positive definite with unit diagonal") {
  std::mt19937_64 rng(99);
  for (int draw = 0; draw < 100; ++draw) {
    const Matrix<double> s = randomly_sparse_model<double>(20, rng);
    CHECK(s.diagonal().minCoeff() == 1.0);
    CHECK(s.diagonal().maxCoeff() == 1.0);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_eigenvalue(SymmetricMatrix<double>(s)) > 0.0);
  }
}

TEST_CASE("gaussian sampler factor squares back to the target") {
  for (const auto& sigma : {linear_decay_model<double>(40), squared_decay_model<double>(25)}) {
    const GaussianSampler<double> sampler(sigma);
    const Matrix<double> re = sampler.factor() * sampler.factor().transpose();
    CHECK((re - sigma).cwiseAbs().maxCoeff() <= 1e-10);
  }

  Matrix<double> notPsd = Matrix<double>::Identity(2, 2);
  notPsd(1, 1) = -0.1;
  CHECK_THROWS_AS((GaussianSampler<double>(notPsd)), DataError);
}

TEST_CASE("gaussian sampler moments") {
  const Index p = 10, n = 10000;
  const Matrix<double> eye = Matrix<double>::Identity(p, p);
  const GaussianSampler<double> sampler(eye);
  std::mt19937_64 rng(2718);
  const Matrix<double> x = sampler.sample(n, rng);
  const auto mom = generalized_covariance(MaskedMatrix<double>::complete(x));
  CHECK(spectral_norm(mom.cov - eye) <= 0.2);
  CHECK(mom.mean.cwiseAbs().maxCoeff() <= 0.1);

  const GaussianSampler<double> shifted(eye, Vector<double>::Constant(p, 5.0));
  std::mt19937_64 rng2(2718);
  const Matrix<double> xs = shifted.sample(n, rng2);
  CHECK((xs.rowwise().mean().array() - 5.0).abs().maxCoeff() <= 0.1);

  // Identical generator state gives identical output.
  std::mt19937_64 ra(5), rb(5);
  CHECK(sampler.sample(50, ra) == sampler.sample(50, rb));

  std::mt19937_64 rc(1);
  CHECK_THROWS_AS(sampler.sample(0, rc), std::invalid_argument);
}

TEST_CASE("missingness mechanisms") {
  CHECK_THROWS_AS(MissingMechanism::uniform(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MissingMechanism::uniform(1.5), std::invalid_argument);
  CHECK_THROWS_AS(MissingMechanism::two_block(0.5, 0.0), std::invalid_argument);

  // mucr(1) observes everything.
  std::mt19937_64 rng(7);
  const Matrix<double> x = Matrix<double>::Zero(5, 8);
  const auto full = apply_missingness(x, MissingMechanism::uniform(1.0), rng);
  CHECK(full.mask().minCoeff() == 1.0);

  // mucr(0.5) at a million cells: the observed fraction concentrates.
  const Matrix<double> big = Matrix<double>::Zero(1000, 1000);
  const auto half = apply_missingness(big, MissingMechanism::uniform(0.5), rng);
  CHECK(half.mask().mean() == doctest::Approx(0.5).epsilon(0.004));

  // Block mechanism: diagonal blocks at the first rate, off blocks at the
  // second. Odd sizes put the larger half first.
  const Index p = 201, n = 200;
  const Matrix<double> xb = Matrix<double>::Zero(p, n);
  const auto blocked = apply_missingness(xb, MissingMechanism::two_block(0.8, 0.2), rng);
  const Index pTop = (p + 1) / 2, nEarly = (n + 1) / 2;
  const double r11 = blocked.mask().topLeftCorner(pTop, nEarly).mean();
  const double r12 = blocked.mask().topRightCorner(pTop, n - nEarly).mean();
  const double r21 = blocked.mask().bottomLeftCorner(p - pTop, nEarly).mean();
  const double r22 = blocked.mask().bottomRightCorner(p - pTop, n - nEarly).mean();
  CHECK(r11 == doctest::Approx(0.8).epsilon(0.03));
  CHECK(r22 == doctest::Approx(0.8).epsilon(0.03));
  CHECK(r12 == doctest::Approx(0.2).epsilon(0.08));
  CHECK(r21 == doctest::Approx(0.2).epsilon(0.08));
}

TEST_CASE("masks never leave a variable unobserved and ignore data values") {
  // Low rate and few samples: unaided, all-missing rows would be common.
  std::mt19937_64 rng(123);
  const Matrix<double> x = Matrix<double>::Ones(30, 4);
  for (int rep = 0; rep < 200; ++rep) {
    const auto m = apply_missingness(x, MissingMechanism::uniform(0.15), rng);
    CHECK(pairwise_counts(m).counts().diagonal().minCoeff() >= 1);
  }

  // Same generator state, different values: identical mask.
  std::mt19937_64 ra(55), rb(55);
  const Matrix<double> zero = Matrix<double>::Zero(10, 20);
  const Matrix<double> one = Matrix<double>::Ones(10, 20);
  const auto ma = apply_missingness(zero, MissingMechanism::uniform(0.6), ra);
  const auto mb = apply_missingness(one, MissingMechanism::uniform(0.6), rb);
  CHECK(ma.mask() == mb.mask());
}

TEST_CASE("effective sample sizes") {
  const Matrix<double> x = Matrix<double>::Zero(4, 9);
  const auto full = effective_sample_sizes(pairwise_counts(MaskedMatrix<double>::complete(x)));
  CHECK(full.pairAverage == 9.0);
  CHECK(full.perVariableAverage == 9.0);

  const auto none =
      effective_sample_sizes(pairwise_counts(MaskedMatrix<double>(x, Matrix<double>::Zero(4, 9))));
  CHECK(none.pairAverage == 0.0);
  CHECK(none.perVariableAverage == 0.0);

  // mucr(rho): E single = rho n, E pair = ((p^2-p) rho^2 + p rho) n / p^2.
  const Index p = 200, n = 100;
  const double rho = 0.5;
  std::mt19937_64 rng(31415);
  const Matrix<double> blank = Matrix<double>::Zero(p, n);
  const auto m = apply_missingness(blank, MissingMechanism::uniform(rho), rng);
  const auto eff = effective_sample_sizes(pairwise_counts(m));
  const double pd = static_cast<double>(p);
  const double expPair = ((pd * pd - pd) * rho * rho + pd * rho) * n / (pd * pd);
  CHECK(eff.perVariableAverage == doctest::Approx(rho * n).epsilon(0.03));
  CHECK(eff.pairAverage == doctest::Approx(expPair).epsilon(0.03));
}
