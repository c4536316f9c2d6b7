// Command-line front end: estimate covariance from CSV data with missing
// cells, export sparsity support, run Monte-Carlo experiments, and report
// effective sample sizes.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <covmiss/covmiss.hpp>

namespace {

using namespace covmiss;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed to write '" + path + "'");
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

void print_effective(const PairwiseCounts& counts) {
  const EffectiveSampleSizes eff = effective_sample_sizes(counts);
  std::cout << "n_min\t" << counts.min() << "\n";
  std::cout << "effective_n_pair\t" << fmt("%.6g", eff.pairAverage) << "\n";
  std::cout << "effective_n_single\t" << fmt("%.6g", eff.perVariableAverage) << "\n";
}

struct TuningFlags {
  double k = 0.0;
  double delta = 0.0;
  bool haveK = false;
  bool haveDelta = false;
  bool cv = false;
  int K = 5;
  int H = 5;
  int N = 20;
  std::uint64_t seed = 0;
};

void add_cv_flags(CLI::App* sub, TuningFlags& t) {
  sub->add_flag("--cv", t.cv, "select the tuning value by cross-validation");
  sub->add_option("--K", t.K, "cross-validation folds (default 5)");
  sub->add_option("--H", t.H, "independent random splits (default 5)");
  sub->add_option("--N", t.N, "grid resolution (default 20)");
  sub->add_option("--seed", t.seed, "seed for the cross-validation splits");
}

// Resolves the --k/--delta/--cv triple for one method into an estimator
// spec. Mixing a fixed value with --cv, or giving the wrong knob for the
// method family, is a usage error.
EstimatorSpec<double> make_spec(Method method, const TuningFlags& t, const ThresholdRule<double>& rule,
                                bool strictBullet, bool thresholdDiagonal) {
  EstimatorSpec<double> spec;
  spec.method = method;
  spec.rule = rule;
  spec.strictBullet = strictBullet;
  spec.thresholdDiagonal = thresholdDiagonal;
  spec.cv = CvPlan{t.K, t.H, t.N, t.seed};
  const bool banding = is_banding_family(method);
  if (banding && t.haveDelta)
    throw std::invalid_argument("--delta does not apply to " + method_name(method) + "; use --k");
  if (!banding && t.haveK)
    throw std::invalid_argument("--k does not apply to " + method_name(method) + "; use --delta");
  if (t.cv) {
    if (t.haveK || t.haveDelta)
      throw std::invalid_argument("--cv excludes a fixed --k/--delta value");
    return spec;
  }
  if (banding) {
    if (!t.haveK) throw std::invalid_argument(method_name(method) + " needs --k or --cv");
    spec.fixed = t.k;
  } else {
    if (!t.haveDelta) throw std::invalid_argument(method_name(method) + " needs --delta or --cv");
    spec.fixed = t.delta;
  }
  return spec;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Reads a previously exported edge list (1-based i,j in the first two
// columns, extra columns ignored) back into a support set over p variables.
// The diagonal is treated as present, matching the exporter's estimates.
SupportSet read_edge_support(const std::string& path, Index p) {
  const std::string text = read_file(path);
  Matrix<double> ind = Matrix<double>::Zero(p, p);
  ind.diagonal().setOnes();
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < 2)
      throw DataError(path + ": line " + std::to_string(lineNo) + " needs at least i,j columns");
    long long i = 0, j = 0;
    const auto parse = [](const std::string& s, long long& v) {
      const char* b = s.data();
      const char* e = b + s.size();
      const auto r = std::from_chars(b, e, v);
      return r.ec == std::errc() && r.ptr == e;
    };
    if (!parse(fields[0], i) || !parse(fields[1], j)) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw DataError(path + ": line " + std::to_string(lineNo) + " has non-integer indices");
    }
    first = false;
    if (i < 1 || i > p || j < 1 || j > p)
      throw DataError(path + ": line " + std::to_string(lineNo) + " index out of range 1.." +
                      std::to_string(p));
    if (i == j)
      throw DataError(path + ": line " + std::to_string(lineNo) + " is a diagonal entry");
    ind(i - 1, j - 1) = 1.0;
    ind(j - 1, i - 1) = 1.0;
  }
  return SupportSet::of(SymmetricMatrix<double>(std::move(ind)));
}

struct EstimateOpts {
  std::string input;
  std::string output;
  std::string method;
  std::string rule = "soft";
  TuningFlags tuning;
  bool pd = false;
  bool strictBullet = false;
  bool thresholdDiagonal = false;
};

int run_estimate(const EstimateOpts& o) {
  Method method = parse_method(o.method);
  if (o.pd) {
    if (method == Method::Threshold) method = Method::ThresholdPd;
    else if (!is_threshold_family(method))
      throw std::invalid_argument("--pd applies to thresholding estimators only");
  }
  const ThresholdRule<double> rule = ThresholdRule<double>::parse(o.rule);
  const EstimatorSpec<double> spec =
      make_spec(method, o.tuning, rule, o.strictBullet, o.thresholdDiagonal);

  const NamedMaskedData nd = read_masked_csv(o.input);
  DataCache<double> cache(nd.data);
  FittedEstimate<double> fit =
      fit_estimator(cache, static_cast<std::vector<FoldContext<double>>*>(nullptr), spec);
  if (o.pd && method == Method::BulletThreshold)
    fit.estimate = pd_correct(fit.estimate, cache.counts());

  const std::string csv = format_matrix_csv(fit.estimate.matrix.matrix());
  if (o.output.empty()) std::cout << csv;
  else write_file(o.output, csv);

  print_effective(cache.counts());
  std::cout << "tuning\t" << fmt("%g", fit.tuning) << "\n";
  return 0;
}

struct SupportOpts {
  std::string input;
  std::string output;
  std::string compare;
  std::string rule = "soft";
  TuningFlags tuning;
  double gamma = 0.0;
  bool haveGamma = false;
  bool thresholdDiagonal = false;
};

int run_support(const SupportOpts& o) {
  const ThresholdRule<double> rule = ThresholdRule<double>::parse(o.rule);
  const EstimatorSpec<double> spec =
      make_spec(Method::Threshold, o.tuning, rule, false, o.thresholdDiagonal);

  const NamedMaskedData nd = read_masked_csv(o.input);
  DataCache<double> cache(nd.data);
  const FittedEstimate<double> fit =
      fit_estimator(cache, static_cast<std::vector<FoldContext<double>>*>(nullptr), spec);
  const SupportSet sup = SupportSet::of(fit.estimate.matrix);
  const Index p = nd.data.vars();

  BoolMatrix margin;
  if (o.haveGamma)
    margin = recovery_condition(cache.moments().cov, cache.theta(), cache.counts(), o.gamma);

  std::string edges = o.haveGamma ? "i,j,value,margin_ok\n" : "i,j,value\n";
  const Matrix<double>& est = fit.estimate.matrix.matrix();
  for (const auto& [i, j] : sup.offDiagonal()) {
    edges += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + format_double(est(i, j));
    if (o.haveGamma) edges += margin(i, j) ? ",1" : ",0";
    edges += "\n";
  }
  if (o.output.empty()) std::cout << edges;
  else write_file(o.output, edges);

  std::vector<std::int64_t> degree(static_cast<std::size_t>(p), 0);
  for (const auto& [i, j] : sup.offDiagonal()) {
    ++degree[static_cast<std::size_t>(i)];
    ++degree[static_cast<std::size_t>(j)];
  }
  std::vector<Index> order(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return degree[static_cast<std::size_t>(a)] > degree[static_cast<std::size_t>(b)];
  });
  std::cout << "variable,degree\n";
  for (Index i : order) {
    const std::string name =
        nd.names.empty() ? std::to_string(i + 1) : nd.names[static_cast<std::size_t>(i)];
    std::cout << name << "," << degree[static_cast<std::size_t>(i)] << "\n";
  }

  if (!o.compare.empty()) {
    const SupportSet ref = read_edge_support(o.compare, p);
    std::cout << "mcc\t" << fmt("%.6f", mcc(sup, ref, p)) << "\n";
  }
  std::cout << "tuning\t" << fmt("%g", fit.tuning) << "\n";
  return 0;
}

struct SimulateOpts {
  std::string config;
  std::string output;
  bool haveOutput = false;
  std::uint64_t seed = 0;
  bool haveSeed = false;
  int jobs = 1;
};

int run_simulate(const SimulateOpts& o) {
  ExperimentConfig cfg = parse_experiment_config(read_file(o.config));
  if (o.haveSeed) cfg.seed = o.seed;
  if (o.haveOutput) cfg.output = o.output;
  const SimulationReport report = run_experiment(cfg, o.jobs);
  const std::string tsv = format_report_tsv(report);
  if (cfg.output.empty()) std::cout << tsv;
  else write_file(cfg.output, tsv);
  return 0;
}

int run_effective_n(const std::string& input) {
  const NamedMaskedData nd = read_masked_csv(input);
  const PairwiseCounts counts = pairwise_counts(nd.data);
  std::cout << "n\t" << nd.data.samples() << "\n";
  const EffectiveSampleSizes eff = effective_sample_sizes(counts);
  std::cout << "effective_n_pair\t" << fmt("%.6g", eff.pairAverage) << "\n";
  std::cout << "effective_n_single\t" << fmt("%.6g", eff.perVariableAverage) << "\n";
  std::cout << "n_min\t" << counts.min() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance estimation from data with missing entries"};
  app.require_subcommand(1);

  EstimateOpts est;
  CLI::App* cEst = app.add_subcommand("estimate", "fit one covariance estimator to a CSV file");
  cEst->add_option("input", est.input, "CSV file, rows = samples, columns = variables")
      ->required();
  cEst->add_option("--method", est.method, "bt, tp, bd, at, at+, bt*, or at*")->required();
  auto* kOpt = cEst->add_option("--k", est.tuning.k, "bandwidth or block size");
  auto* dOpt = cEst->add_option("--delta", est.tuning.delta, "threshold scale");
  cEst->add_option("--rule", est.rule, "soft, hard, or alasso:<eta> (default soft)");
  add_cv_flags(cEst, est.tuning);
  cEst->add_flag("--pd", est.pd, "lift the thresholded estimate to positive definiteness");
  cEst->add_flag("--strict-bullet", est.strictBullet,
                 "baseline divides by one minus the observed fraction");
  cEst->add_flag("--threshold-diagonal", est.thresholdDiagonal,
                 "threshold diagonal entries as well");
  cEst->add_option("--output", est.output, "write the estimate CSV here instead of stdout");

  SupportOpts sup;
  CLI::App* cSup = app.add_subcommand("support", "export the off-diagonal support of the "
                                                 "thresholding estimate");
  cSup->add_option("input", sup.input, "CSV file, rows = samples, columns = variables")
      ->required();
  auto* sdOpt = cSup->add_option("--delta", sup.tuning.delta, "threshold scale");
  cSup->add_option("--rule", sup.rule, "soft, hard, or alasso:<eta> (default soft)");
  add_cv_flags(cSup, sup.tuning);
  auto* gOpt = cSup->add_option("--gamma-check", sup.gamma,
                                "flag edges whose estimated margin exceeds (4+gamma) levels");
  cSup->add_flag("--threshold-diagonal", sup.thresholdDiagonal,
                 "threshold diagonal entries as well");
  cSup->add_option("--compare", sup.compare, "edge CSV to compare against; prints the MCC");
  cSup->add_option("--output", sup.output, "write the edge CSV here instead of stdout");

  SimulateOpts sim;
  CLI::App* cSim = app.add_subcommand("simulate", "run a Monte-Carlo experiment from a JSON "
                                                  "config");
  cSim->add_option("config", sim.config, "JSON config file")->required();
  auto* soOpt = cSim->add_option("--output", sim.output, "override the config output path");
  auto* ssOpt = cSim->add_option("--seed", sim.seed, "override the config seed");
  cSim->add_option("--jobs", sim.jobs, "replicates to run concurrently (default 1)");

  std::string effInput;
  std::uint64_t effSeed = 0;
  CLI::App* cEff = app.add_subcommand("effective-n", "report observed sample sizes for a CSV "
                                                     "file");
  cEff->add_option("input", effInput, "CSV file, rows = samples, columns = variables")
      ->required();
  cEff->add_option("--seed", effSeed, "accepted for interface uniformity; no effect");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  est.tuning.haveK = kOpt->count() > 0;
  est.tuning.haveDelta = dOpt->count() > 0;
  sup.tuning.haveDelta = sdOpt->count() > 0;
  sup.haveGamma = gOpt->count() > 0;
  sim.haveOutput = soOpt->count() > 0;
  sim.haveSeed = ssOpt->count() > 0;

  try {
    if (cEst->parsed()) return run_estimate(est);
    if (cSup->parsed()) return run_support(sup);
    if (cSim->parsed()) return run_simulate(sim);
    if (cEff->parsed()) return run_effective_n(effInput);
    std::cerr << "error: no command given\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
