// Acceptance gate: eleven statistical and numerical checks on the estimation
// pipeline, one line of output each. Tolerances and seeds are pinned here;
// a nonzero exit means at least one check failed.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <covmiss/covmiss.hpp>

using namespace covmiss;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%2d] %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

bool within(double v, double center, double slack) {
  return v >= center - slack && v <= center + slack;
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.tuning = "cv";
  cfg.K = 5;
  cfg.H = 5;
  cfg.N = 20;
  cfg.losses = {"spectral"};
  return cfg;
}

// Mean spectral loss of a cross-validated block-tridiagonal fit, used by the
// effective-sample-size comparison.
double bt_cv_loss(const MaskedMatrix<double>& m, const Matrix<double>& sigma,
                  std::uint64_t cvSeed) {
  EstimatorSpec<double> spec;
  spec.method = Method::BlockTridiagonal;
  spec.cv = CvPlan{5, 5, 20, cvSeed};
  const FittedEstimate<double> fit = fit_estimator(m, spec);
  return loss(fit.estimate.matrix.matrix(), sigma, LossKind::Spectral);
}

// 1. Bandable estimation under uniform missingness at (p, n) = (50, 200):
// cross-validated bt and bt* land in published bands and bt wins.
void check_1() {
  ExperimentConfig cfg = base_config();
  cfg.model = "linear-decay";
  cfg.p = 50;
  cfg.n = 200;
  cfg.mechanism = "mucr";
  cfg.rho = 0.5;
  cfg.replicates = 100;
  cfg.estimators = {"bt", "bt*"};
  cfg.seed = 101;
  const SimulationReport r = run_experiment(cfg);
  const double bt = r.rows[0].losses[0].mean;
  const double bb = r.rows[1].losses[0].mean;
  const bool pass = within(bt, 1.44, 0.20) && within(bb, 1.56, 0.20) && bt < bb;
  report(1, pass,
         "uniform-missing bandable: bt " + num(bt) + " in 1.44+-0.20, bt* " + num(bb) +
             " in 1.56+-0.20, bt < bt* " + (bt < bb ? "ok" : "violated"));
}

// 2. Same family under block-structured missingness at (200, 200), where the
// observation-fraction baseline pays for its miscalibrated normalization.
void check_2() {
  ExperimentConfig cfg = base_config();
  cfg.model = "linear-decay";
  cfg.p = 200;
  cfg.n = 200;
  cfg.mechanism = "mcr-block";
  cfg.rho1 = 0.8;
  cfg.rho2 = 0.2;
  cfg.replicates = 50;
  cfg.estimators = {"bt", "bt*"};
  cfg.seed = 202;
  const SimulationReport r = run_experiment(cfg);
  const double bt = r.rows[0].losses[0].mean;
  const double bb = r.rows[1].losses[0].mean;
  const bool pass = within(bt, 1.67, 0.25) && within(bb, 3.23, 0.45) && bt < bb;
  report(2, pass,
         "block-missing bandable: bt " + num(bt) + " in 1.67+-0.25, bt* " + num(bb) +
             " in 3.23+-0.45, bt < bt* " + (bt < bb ? "ok" : "violated"));
}

// 3. Sparse estimation under block-structured missingness at (200, 200):
// cross-validated at and at* in published bands, at wins. Soft thresholding
// cannot reach the reference values at any threshold scale; the hard rule
// reproduces the companion uniform-missingness value to three digits, so the
// reference run must have used a magnitude-preserving rule.
void check_3() {
  ExperimentConfig cfg = base_config();
  cfg.model = "permutation-bandable";
  cfg.p = 200;
  cfg.n = 200;
  cfg.mechanism = "mcr-block";
  cfg.rho1 = 0.8;
  cfg.rho2 = 0.2;
  cfg.replicates = 50;
  cfg.estimators = {"at", "at*"};
  cfg.rule = "hard";
  cfg.seed = 303;
  const SimulationReport r = run_experiment(cfg);
  const double at = r.rows[0].losses[0].mean;
  const double ab = r.rows[1].losses[0].mean;
  const bool pass = within(at, 2.00, 0.25) && within(ab, 3.22, 0.45) && at < ab;
  report(3, pass,
         "block-missing sparse: at " + num(at) + " in 2.00+-0.25, at* " + num(ab) +
             " in 3.22+-0.45, at < at* " + (at < ab ? "ok" : "violated"));
}

// 4. Effective-sample-size bracket at p = 100, n = 1000, half the cells
// observed: the missing-data risk lies between complete-data risks at the
// average pair count and the average single count, and complete data at the
// full n does best.
void check_4() {
  const Index p = 100, n = 1000;
  const int reps = 50;
  std::mt19937_64 rng(404);
  const Matrix<double> sigma = linear_decay_model<double>(p);
  const GaussianSampler<double> sampler(sigma);
  const MissingMechanism mech = MissingMechanism::uniform(0.5);

  double lossMissing = 0.0, pairAvg = 0.0, singleAvg = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Matrix<double> x = sampler.sample(n, rng);
    const MaskedMatrix<double> m = apply_missingness(x, mech, rng);
    const EffectiveSampleSizes eff = effective_sample_sizes(pairwise_counts(m));
    pairAvg += eff.pairAverage;
    singleAvg += eff.perVariableAverage;
    lossMissing += bt_cv_loss(m, sigma, rng());
  }
  lossMissing /= reps;
  const auto nPair = static_cast<Index>(std::llround(pairAvg / reps));
  const auto nSingle = static_cast<Index>(std::llround(singleAvg / reps));

  const auto completeLoss = [&](Index nc) {
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const Matrix<double> x = sampler.sample(nc, rng);
      const MaskedMatrix<double> m(x, Matrix<double>::Ones(p, nc));
      sum += bt_cv_loss(m, sigma, rng());
    }
    return sum / reps;
  };
  const double lossAtPair = completeLoss(nPair);
  const double lossAtSingle = completeLoss(nSingle);
  const double lossAtFull = completeLoss(n);

  const bool bracket = lossAtSingle <= lossMissing && lossMissing <= lossAtPair;
  const bool fullBest =
      lossAtFull < lossAtSingle && lossAtFull < lossMissing && lossAtFull < lossAtPair;
  report(4, bracket && fullBest,
         "effective sample size: missing " + num(lossMissing) + " in [complete@" +
             std::to_string(nSingle) + " " + num(lossAtSingle) + ", complete@" +
             std::to_string(nPair) + " " + num(lossAtPair) + "], complete@" +
             std::to_string(n) + " " + num(lossAtFull) + " smallest");
}

// 5. With nothing missing, the pairwise-count covariance and the baseline
// covariance both collapse to the textbook divisor-n sample covariance.
void check_5() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> gauss;
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index p = 2 + static_cast<Index>(rng() % 19);
    const Index n = 5 + static_cast<Index>(rng() % 46);
    Matrix<double> x(p, n);
    const double scale = std::exp(gauss(rng));
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < p; ++i) x(i, j) = scale * gauss(rng);
    const MaskedMatrix<double> m(x, Matrix<double>::Ones(p, n));

    const Matrix<double> centered = x.colwise() - x.rowwise().mean();
    const Matrix<double> textbook =
        centered * centered.transpose() / static_cast<double>(n);
    const double ref = textbook.norm();

    const Matrix<double> gen = generalized_covariance(m).cov;
    const Matrix<double> bullet = bullet_covariance(m).matrix();
    const double errGen = (gen - textbook).norm() / ref;
    const double errBullet = (bullet - textbook).norm() / ref;
    worst = std::max({worst, errGen, errBullet});
    if (errGen > 1e-12 || errBullet > 1e-12) ++bad;
  }
  report(5, bad == 0,
         "complete-data reduction: " + std::to_string(bad) +
             "/200 instances off, worst relative error " + num(worst));
}

// 6. Submatrix norm bound: for random PSD matrices and index sets,
// the cross block never beats the geometric mean of the diagonal blocks.
void check_6() {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> gauss;
  int bad = 0;
  double worstGap = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Index p = 2 + static_cast<Index>(rng() % 14);
    const Index r = 1 + static_cast<Index>(rng() % (p + 2));
    Matrix<double> g(p, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < p; ++i) g(i, j) = gauss(rng);
    Matrix<double> sigma = Matrix<double>::Zero(p, p);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(g);
    sigma = ((sigma + sigma.transpose()) / 2.0).eval();

    const auto draw_set = [&] {
      const Index len = 1 + static_cast<Index>(rng() % (p + 3));
      std::vector<Index> s(static_cast<std::size_t>(len));
      for (Index& v : s) v = static_cast<Index>(rng() % p);
      return s;
    };
    const std::vector<Index> a = draw_set();
    const std::vector<Index> b = draw_set();
    const double cross = spectral_norm(submatrix(sigma, a, b));
    const double na = spectral_norm(submatrix(sigma, a, a));
    const double nb = spectral_norm(submatrix(sigma, b, b));
    const double gap = cross - std::sqrt(na * nb);
    worstGap = std::max(worstGap, gap);
    if (gap > 1e-9) ++bad;
  }
  report(6, bad == 0,
         "positive semidefinite submatrix bound: " + std::to_string(bad) +
             "/1000 violations, worst excess " + num(worstGap));
}

// 7. Thresholding-rule axioms on 1e5 randomized triples: kill-below-level
// and bounded-shift hold for every rule; the bounded-output condition with
// unit constant holds for soft and unit-exponent adaptive lasso (larger
// exponents satisfy it with constant eta instead, checked as well).
void check_7() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> zDist(-8.0, 8.0);
  std::uniform_real_distribution<double> lDist(0.0, 5.0);
  const ThresholdRule<double> soft = ThresholdRule<double>::soft();
  const ThresholdRule<double> hard = ThresholdRule<double>::hard();
  const ThresholdRule<double> al1 = ThresholdRule<double>::parse("alasso:1");
  const ThresholdRule<double> al2 = ThresholdRule<double>::parse("alasso:2");
  int bad = 0;
  for (int t = 0; t < 100000; ++t) {
    const double z = zDist(rng);
    const double lambda = lDist(rng);
    for (const ThresholdRule<double>* rule : {&soft, &hard, &al1, &al2}) {
      const double y = rule->apply(z, lambda);
      if (std::abs(z) <= lambda && y != 0.0) ++bad;                       // kill below level
      if (std::abs(y - z) > lambda + 1e-12) ++bad;                       // bounded shift
    }
    const double cap = std::max(std::abs(z) - lambda, 0.0);
    if (std::abs(soft.apply(z, lambda)) > cap + 1e-12) ++bad;            // unit constant
    if (std::abs(al1.apply(z, lambda)) > cap + 1e-12) ++bad;
    if (std::abs(al2.apply(z, lambda)) > 2.0 * cap + 1e-12) ++bad;       // eta constant
  }
  report(7, bad == 0,
         "threshold-rule axioms: " + std::to_string(bad) +
             " violations in 1e5 triples (unit constant for soft and alasso:1; "
             "alasso:2 meets the eta constant)");
}

// 8. Support recovery when every true nonzero clears the (4+gamma) margin
// with gamma = 1: sparse matched-pair covariance, p = 50, n = 400, 80%
// observation, threshold scale 2.
void check_8() {
  const Index p = 50, n = 400;
  const int reps = 50;
  const double a = 0.95, gamma = 1.0;
  std::mt19937_64 rng(0xC8C8C8);
  int recovered = 0, premiseHolds = 0;
  for (int r = 0; r < reps; ++r) {
    // Ten disjoint correlated pairs; the rest of the variables are isolated.
    std::vector<Index> order(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Matrix<double> sigma = Matrix<double>::Identity(p, p);
    for (int t = 0; t < 10; ++t) {
      const Index u = order[static_cast<std::size_t>(2 * t)];
      const Index v = order[static_cast<std::size_t>(2 * t + 1)];
      const double s = (rng() & 1) ? a : -a;
      sigma(u, v) = s;
      sigma(v, u) = s;
    }
    const GaussianSampler<double> sampler(sigma);
    const Matrix<double> x = sampler.sample(n, rng);
    const MaskedMatrix<double> m = apply_missingness(x, MissingMechanism::uniform(0.8), rng);

    // The design margin uses the true entry noise level theta = 1 + a^2 and
    // the realized pairwise counts.
    const PairwiseCounts counts = pairwise_counts(m);
    bool margin = true;
    const double theta = 1.0 + a * a;
    for (int t = 0; t < 10; ++t) {
      const Index u = order[static_cast<std::size_t>(2 * t)];
      const Index v = order[static_cast<std::size_t>(2 * t + 1)];
      const double level = (4.0 + gamma) * std::sqrt(theta * std::log(static_cast<double>(p)) /
                                                     static_cast<double>(counts(u, v)));
      if (a <= level) margin = false;
    }
    premiseHolds += margin ? 1 : 0;

    const CovEstimate<double> est = adaptive_threshold(m, 2.0, ThresholdRule<double>::soft());
    if (SupportSet::of(est.matrix) == SupportSet::of(SymmetricMatrix<double>(sigma)))
      ++recovered;
  }
  report(8, recovered >= 45,
         "support recovery: " + std::to_string(recovered) + "/50 exact (need >= 45); margin "
         "premise held in " + std::to_string(premiseHolds) + "/50 replicates");
}

// 9. Entrywise self-normalized deviations at scale 3 with full observation:
// few replicates show any entry outside its adaptive band.
void check_9() {
  const Index p = 50, n = 400;
  const int reps = 200;
  std::mt19937_64 rng(909);
  const Matrix<double> sigma = linear_decay_model<double>(p);
  const GaussianSampler<double> sampler(sigma);
  const double logp = std::log(static_cast<double>(p));
  int violating = 0;
  for (int r = 0; r < reps; ++r) {
    const Matrix<double> x = sampler.sample(n, rng);
    const MaskedMatrix<double> m(x, Matrix<double>::Ones(p, n));
    DataCache<double> cache(m);
    const Matrix<double>& cov = cache.moments().cov;
    const Matrix<double>& theta = cache.theta();
    bool bad = false;
    for (Index j = 0; j < p && !bad; ++j)
      for (Index i = 0; i < p; ++i) {
        const double band = 3.0 * std::sqrt(theta(i, j) * logp / static_cast<double>(n));
        if (std::abs(cov(i, j) - sigma(i, j)) > band) {
          bad = true;
          break;
        }
      }
    violating += bad ? 1 : 0;
  }
  report(9, violating <= 10,
         "self-normalized deviations: " + std::to_string(violating) +
             "/200 replicates with any out-of-band entry (allow <= 10)");
}

// 10. Diagonal lift on indefinite thresholded estimates: the floor
// ln(p)/n_min is reached and the off-diagonal support is untouched.
void check_10() {
  const Index p = 30, n = 60;
  std::mt19937_64 rng(1010);
  int seen = 0, ok = 0, attempts = 0;
  while (seen < 100 && attempts < 2000) {
    ++attempts;
    const Matrix<double> sigma = randomly_sparse_model<double>(p, rng);
    const GaussianSampler<double> sampler(sigma);
    const Matrix<double> x = sampler.sample(n, rng);
    const MaskedMatrix<double> m = apply_missingness(x, MissingMechanism::uniform(0.4), rng);
    DataCache<double> cache(m);
    // The lift is defined only when every pair is co-observed at least once;
    // at this observation rate a zero count shows up in roughly 1% of draws.
    if (cache.counts().min() < 1) continue;
    const CovEstimate<double> est =
        adaptive_threshold(cache.moments().cov, cache.theta(), cache.counts(), 0.5,
                           ThresholdRule<double>::soft());
    if (min_eigenvalue(est.matrix) >= 0.0) continue;
    ++seen;
    const CovEstimate<double> lifted = pd_correct(est, cache.counts());
    const double floor = std::log(static_cast<double>(p)) /
                         static_cast<double>(cache.counts().min());
    const bool floorOk = min_eigenvalue(lifted.matrix) >= floor - 1e-6;
    const bool supportOk = SupportSet::of(lifted.matrix).offDiagonal() ==
                           SupportSet::of(est.matrix).offDiagonal();
    ok += (floorOk && supportOk) ? 1 : 0;
  }
  report(10, seen == 100 && ok == 100,
         "positive-definite lift: " + std::to_string(ok) + "/" + std::to_string(seen) +
             " indefinite estimates lifted to the floor with support intact (from " +
             std::to_string(attempts) + " draws)");
}

// 11. Risk trend at the oracle bandwidth: with complete data the mean
// spectral risk strictly decreases as n grows 50 -> 200 -> 800.
void check_11() {
  const Index p = 50;
  const int reps = 50;
  const Matrix<double> sigma = linear_decay_model<double>(p);
  const GaussianSampler<double> sampler(sigma);
  std::vector<double> means;
  std::mt19937_64 rng(1111);
  for (Index n : {50, 200, 800}) {
    const Index k = oracle_bandwidth(n, 1.0);
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const Matrix<double> x = sampler.sample(n, rng);
      const MaskedMatrix<double> m(x, Matrix<double>::Ones(p, n));
      const CovEstimate<double> est =
          blockwise_tridiagonal(SymmetricMatrix<double>(generalized_covariance(m).cov), k);
      sum += loss(est.matrix.matrix(), sigma, LossKind::Spectral);
    }
    means.push_back(sum / reps);
  }
  const bool decreasing = means[0] > means[1] && means[1] > means[2];
  report(11, decreasing,
         "oracle-bandwidth risk trend: " + num(means[0]) + " > " + num(means[1]) + " > " +
             num(means[2]) + (decreasing ? "" : " violated"));
}

}  // namespace

int main() {
  try {
    check_1();
    check_2();
    check_3();
    check_4();
    check_5();
    check_6();
    check_7();
    check_8();
    check_9();
    check_10();
    check_11();
  } catch (const std::exception& e) {
    std::printf("[--] FAIL unexpected exception: %s\n", e.what());
    return 1;
  }
  std::printf("%d/11 checks passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
