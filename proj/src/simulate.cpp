#include <covmiss/simulate.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

namespace covmiss {
namespace {

using nlohmann::json;

// Collects every violation so a bad config is reported in full, not
// abandoned at the first problem.
struct ConfigErrors {
  std::vector<std::string> messages;
  void add(std::string msg) { messages.push_back(std::move(msg)); }
  void throw_if_any() const {
    if (messages.empty()) return;
    std::string joined = "config: " + messages.front();
    for (std::size_t i = 1; i < messages.size(); ++i) joined += "; " + messages[i];
    throw DataError(joined);
  }
};

double want_number(const json& j, const std::string& key, ConfigErrors& errs, double fallback) {
  if (!j.is_number()) {
    errs.add("'" + key + "' must be a number");
    return fallback;
  }
  return j.get<double>();
}

std::int64_t want_integer(const json& j, const std::string& key, ConfigErrors& errs,
                          std::int64_t fallback) {
  if (!j.is_number_integer()) {
    errs.add("'" + key + "' must be an integer");
    return fallback;
  }
  return j.get<std::int64_t>();
}

std::string want_string(const json& j, const std::string& key, ConfigErrors& errs,
                        std::string fallback) {
  if (!j.is_string()) {
    errs.add("'" + key + "' must be a string");
    return fallback;
  }
  return j.get<std::string>();
}

bool want_bool(const json& j, const std::string& key, ConfigErrors& errs, bool fallback) {
  if (!j.is_boolean()) {
    errs.add("'" + key + "' must be a boolean");
    return fallback;
  }
  return j.get<bool>();
}

std::vector<std::string> want_string_array(const json& j, const std::string& key,
                                           ConfigErrors& errs) {
  std::vector<std::string> out;
  if (!j.is_array()) {
    errs.add("'" + key + "' must be an array of strings");
    return out;
  }
  for (const auto& e : j) {
    if (!e.is_string()) {
      errs.add("'" + key + "' must be an array of strings");
      return {};
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& jsonText) {
  json j;
  try {
    j = json::parse(jsonText);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config: not valid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw DataError("config: top level must be a flat object");

  ConfigErrors errs;
  ExperimentConfig cfg;
  bool sawModel = false, sawP = false, sawN = false, sawMech = false, sawEst = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "model") { cfg.model = want_string(value, key, errs, cfg.model); sawModel = true; }
    else if (key == "p") { cfg.p = static_cast<Index>(want_integer(value, key, errs, cfg.p)); sawP = true; }
    else if (key == "n") { cfg.n = static_cast<Index>(want_integer(value, key, errs, cfg.n)); sawN = true; }
    else if (key == "mechanism") { cfg.mechanism = want_string(value, key, errs, cfg.mechanism); sawMech = true; }
    else if (key == "rho") cfg.rho = want_number(value, key, errs, cfg.rho);
    else if (key == "rho1") cfg.rho1 = want_number(value, key, errs, cfg.rho1);
    else if (key == "rho2") cfg.rho2 = want_number(value, key, errs, cfg.rho2);
    else if (key == "replicates") cfg.replicates = static_cast<int>(want_integer(value, key, errs, cfg.replicates));
    else if (key == "estimators") { cfg.estimators = want_string_array(value, key, errs); sawEst = true; }
    else if (key == "tuning") cfg.tuning = want_string(value, key, errs, cfg.tuning);
    else if (key == "k") cfg.k = want_number(value, key, errs, cfg.k);
    else if (key == "delta") cfg.delta = want_number(value, key, errs, cfg.delta);
    else if (key == "rule") cfg.rule = want_string(value, key, errs, cfg.rule);
    else if (key == "K") cfg.K = static_cast<int>(want_integer(value, key, errs, cfg.K));
    else if (key == "H") cfg.H = static_cast<int>(want_integer(value, key, errs, cfg.H));
    else if (key == "N") cfg.N = static_cast<int>(want_integer(value, key, errs, cfg.N));
    else if (key == "losses") cfg.losses = want_string_array(value, key, errs);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(want_integer(value, key, errs, 0));
    else if (key == "output") cfg.output = want_string(value, key, errs, cfg.output);
    else if (key == "strict_bullet") cfg.strict_bullet = want_bool(value, key, errs, cfg.strict_bullet);
    else if (key == "threshold_diagonal") cfg.threshold_diagonal = want_bool(value, key, errs, cfg.threshold_diagonal);
    else errs.add("unknown key '" + key + "'");
  }
  if (!sawModel) errs.add("'model' is required");
  if (!sawP) errs.add("'p' is required");
  if (!sawN) errs.add("'n' is required");
  if (!sawMech) errs.add("'mechanism' is required");
  if (!sawEst) errs.add("'estimators' is required");
  errs.throw_if_any();
  return cfg;
}

CompiledExperiment compile_experiment(const ExperimentConfig& cfg) {
  CompiledExperiment exp;
  exp.cfg = cfg;
  ConfigErrors errs;

  if (cfg.p < 1) errs.add("p must be positive");
  if (cfg.n < 1) errs.add("n must be positive");
  if (cfg.replicates < 1) errs.add("replicates must be positive");

  bool modelKnown = true;
  if (cfg.model == "linear-decay" || cfg.model == "squared-decay") {
    exp.randomModel = false;
  } else if (cfg.model == "permutation-bandable" || cfg.model == "randomly-sparse") {
    exp.randomModel = true;
  } else {
    modelKnown = false;
    errs.add("unknown model '" + cfg.model + "'");
  }

  try {
    if (cfg.mechanism == "mucr") {
      exp.mech = MissingMechanism::uniform(cfg.rho);
    } else if (cfg.mechanism == "mcr-block") {
      exp.mech = MissingMechanism::two_block(cfg.rho1, cfg.rho2);
    } else {
      errs.add("unknown mechanism '" + cfg.mechanism + "'");
    }
  } catch (const std::invalid_argument& e) {
    errs.add(e.what());
  }

  const bool fixedTuning = cfg.tuning == "fixed";
  if (!fixedTuning && cfg.tuning != "cv") errs.add("tuning must be 'cv' or 'fixed'");
  if (cfg.tuning == "cv") {
    if (cfg.K < 2) errs.add("K must be at least 2");
    if (cfg.H < 1) errs.add("H must be positive");
    if (cfg.N < 1) errs.add("N must be positive");
  }

  ThresholdRule<double> rule = ThresholdRule<double>::soft();
  try {
    rule = ThresholdRule<double>::parse(cfg.rule);
  } catch (const std::invalid_argument& e) {
    errs.add(e.what());
  }

  if (cfg.estimators.empty()) errs.add("at least one estimator is required");
  for (const std::string& name : cfg.estimators) {
    Method method;
    try {
      method = parse_method(name);
    } catch (const std::invalid_argument& e) {
      errs.add(e.what());
      continue;
    }
    EstimatorSpec<double> spec;
    spec.method = method;
    spec.rule = rule;
    spec.strictBullet = cfg.strict_bullet;
    spec.thresholdDiagonal = cfg.threshold_diagonal;
    // Under the uniform mechanism the baseline's observation rate is known
    // by construction, so its fixed-divisor form applies; the block
    // mechanism has no single rate and falls back to estimated ones.
    if (cfg.mechanism == "mucr" && is_bullet_family(method)) spec.knownRate = cfg.rho;
    spec.cv = CvPlan{cfg.K, cfg.H, cfg.N, 0};
    if (fixedTuning) {
      if (is_banding_family(method)) {
        if (cfg.k < 1) errs.add("fixed tuning needs k >= 1 for " + name);
        spec.fixed = cfg.k;
      } else {
        if (cfg.delta < 0) errs.add("fixed tuning needs delta >= 0 for " + name);
        spec.fixed = cfg.delta;
      }
    }
    exp.specs.push_back(spec);
    exp.names.push_back(method_name(method));
  }

  if (cfg.losses.empty()) errs.add("at least one loss is required");
  for (const std::string& name : cfg.losses) {
    try {
      exp.lossKinds.push_back(parse_loss(name));
    } catch (const std::invalid_argument& e) {
      errs.add(e.what());
    }
  }

  errs.throw_if_any();

  if (!exp.randomModel && modelKnown) {
    const Matrix<double> sigma = cfg.model == "linear-decay"
                                     ? linear_decay_model<double>(cfg.p)
                                     : squared_decay_model<double>(cfg.p);
    exp.sharedSampler = std::make_shared<const GaussianSampler<double>>(sigma);
  }
  return exp;
}

ReplicateOutput run_replicate(const CompiledExperiment& exp, std::int64_t rep) {
  const ExperimentConfig& cfg = exp.cfg;
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                    static_cast<std::uint32_t>(cfg.seed >> 32), std::uint32_t(0x7e57c0de),
                    static_cast<std::uint32_t>(rep)};
  std::mt19937_64 rng(seq);

  Matrix<double> sigma;
  std::unique_ptr<GaussianSampler<double>> ownSampler;
  const GaussianSampler<double>* sampler = exp.sharedSampler.get();
  if (exp.randomModel) {
    sigma = cfg.model == "permutation-bandable" ? permutation_bandable_model<double>(cfg.p, rng)
                                                : randomly_sparse_model<double>(cfg.p, rng);
    ownSampler = std::make_unique<GaussianSampler<double>>(sigma);
    sampler = ownSampler.get();
  } else {
    sigma = cfg.model == "linear-decay" ? linear_decay_model<double>(cfg.p)
                                        : squared_decay_model<double>(cfg.p);
  }

  const Matrix<double> x = sampler->sample(cfg.n, rng);
  const MaskedMatrix<double> m = apply_missingness(x, exp.mech, rng);
  const std::uint64_t cvSeed = rng();

  DataCache<double> cache(m);
  ReplicateOutput out;
  out.effective = effective_sample_sizes(cache.counts());
  out.nMin = cache.counts().min();

  // All estimators of a replicate tune on the same splits.
  std::vector<FoldContext<double>> folds;
  bool haveFolds = false;
  for (const EstimatorSpec<double>& spec0 : exp.specs) {
    EstimatorSpec<double> spec = spec0;
    spec.cv.seed = cvSeed;
    FittedEstimate<double> fit = [&] {
      if (spec.fixed)
        return fit_estimator(cache, static_cast<std::vector<FoldContext<double>>*>(nullptr), spec);
      if (!haveFolds) {
        folds = build_fold_contexts(m, spec.cv);
        haveFolds = true;
      }
      return fit_estimator(cache, &folds, spec);
    }();
    std::vector<double> lossRow;
    lossRow.reserve(exp.lossKinds.size());
    for (LossKind kind : exp.lossKinds)
      lossRow.push_back(loss(fit.estimate.matrix.matrix(), sigma, kind));
    out.lossValues.push_back(std::move(lossRow));
    out.tunings.push_back(fit.tuning);
  }
  return out;
}

SimulationReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  const CompiledExperiment exp = compile_experiment(cfg);
  const int reps = cfg.replicates;
  std::vector<ReplicateOutput> results(static_cast<std::size_t>(reps));

  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, reps);
  if (jobs == 1) {
    for (int r = 0; r < reps; ++r) results[static_cast<std::size_t>(r)] = run_replicate(exp, r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr firstError;
    std::mutex errorMutex;
    auto worker = [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= reps) return;
        try {
          results[static_cast<std::size_t>(r)] = run_replicate(exp, r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(errorMutex);
          if (!firstError) firstError = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (firstError) std::rethrow_exception(firstError);
  }

  SimulationReport report;
  report.config = cfg;
  report.nMinOverall = std::numeric_limits<std::int64_t>::max();
  double pairSum = 0.0, singleSum = 0.0;
  for (const ReplicateOutput& r : results) {
    pairSum += r.effective.pairAverage;
    singleSum += r.effective.perVariableAverage;
    report.nMinOverall = std::min(report.nMinOverall, r.nMin);
  }
  report.effectivePair = pairSum / reps;
  report.effectiveSingle = singleSum / reps;

  for (std::size_t e = 0; e < exp.specs.size(); ++e) {
    EstimatorRow row;
    row.name = exp.names[e];
    double tuningSum = 0.0;
    for (const ReplicateOutput& r : results) tuningSum += r.tunings[e];
    row.meanTuning = tuningSum / reps;
    for (std::size_t l = 0; l < exp.lossKinds.size(); ++l) {
      std::vector<double> values;
      values.reserve(results.size());
      for (const ReplicateOutput& r : results) values.push_back(r.lossValues[e][l]);
      row.losses.push_back(aggregate(std::move(values)));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

}  // namespace

std::string format_report_tsv(const SimulationReport& report) {
  const ExperimentConfig& cfg = report.config;
  std::string out;
  out += "model\t" + cfg.model + "\n";
  out += "mechanism\t" + cfg.mechanism + "\n";
  if (cfg.mechanism == "mucr") out += "rates\t" + fmt("%g", cfg.rho) + "\n";
  else out += "rates\t" + fmt("%g", cfg.rho1) + "," + fmt("%g", cfg.rho2) + "\n";
  out += "p\t" + std::to_string(cfg.p) + "\n";
  out += "n\t" + std::to_string(cfg.n) + "\n";
  out += "replicates\t" + std::to_string(cfg.replicates) + "\n";
  if (cfg.tuning == "cv") {
    out += "tuning\tcv K=" + std::to_string(cfg.K) + " H=" + std::to_string(cfg.H) +
           " N=" + std::to_string(cfg.N) + "\n";
  } else {
    out += "tuning\tfixed k=" + fmt("%g", cfg.k) + " delta=" + fmt("%g", cfg.delta) + "\n";
  }
  out += "rule\t" + cfg.rule + "\n";
  out += "seed\t" + std::to_string(cfg.seed) + "\n";
  out += "n_min\t" + std::to_string(report.nMinOverall) + "\n";
  out += "effective_n_pair\t" + fmt("%.6g", report.effectivePair) + "\n";
  out += "effective_n_single\t" + fmt("%.6g", report.effectiveSingle) + "\n";

  out += "estimator\ttuning";
  for (const std::string& l : cfg.losses) out += "\t" + l;
  out += "\n";
  for (const EstimatorRow& row : report.rows) {
    out += row.name + "\t" + fmt("%.6g", row.meanTuning);
    for (const RiskReport& rr : row.losses) {
      out += "\t" + fmt("%.4f", rr.mean) + "(";
      out += rr.sd ? fmt("%.4f", *rr.sd) : std::string("n/a");
      out += ")";
    }
    out += "\n";
  }
  return out;
}

}  // namespace covmiss
