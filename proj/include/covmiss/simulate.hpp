#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <covmiss/losses.hpp>
#include <covmiss/models.hpp>
#include <covmiss/pipeline.hpp>

namespace covmiss {

// One synthetic study: a covariance model, a missingness mechanism, a size,
// a list of estimators sharing one tuning policy, and the losses to report.
struct ExperimentConfig {
  std::string model;     // linear-decay | squared-decay | permutation-bandable | randomly-sparse
  Index p = 0;
  Index n = 0;
  std::string mechanism;  // mucr | mcr-block
  double rho = 0.0;       // mucr observation rate
  double rho1 = 0.0;      // mcr-block within-group rate
  double rho2 = 0.0;      // mcr-block cross-group rate
  int replicates = 1;
  std::vector<std::string> estimators;
  std::string tuning = "cv";  // cv | fixed
  double k = 0.0;             // fixed bandwidth (banding families)
  double delta = 0.0;         // fixed multiplier (threshold families)
  std::string rule = "soft";
  int K = 5;
  int H = 5;
  int N = 20;
  std::vector<std::string> losses{"spectral"};
  std::uint64_t seed = 1;
  std::string output;  // report path; empty writes to stdout
  bool strict_bullet = false;
  bool threshold_diagonal = false;
};

// Flat JSON object with exactly the fields above; unknown keys are
// rejected so a typo cannot silently fall back to a default.
ExperimentConfig parse_experiment_config(const std::string& jsonText);

// Config checked and cross-referenced once, ready to run replicates.
struct CompiledExperiment {
  ExperimentConfig cfg;
  std::vector<EstimatorSpec<double>> specs;
  std::vector<std::string> names;
  std::vector<LossKind> lossKinds;
  MissingMechanism mech;
  bool randomModel = false;
  std::shared_ptr<const GaussianSampler<double>> sharedSampler;  // deterministic models only
};

CompiledExperiment compile_experiment(const ExperimentConfig& cfg);

struct ReplicateOutput {
  std::vector<std::vector<double>> lossValues;  // [estimator][loss]
  std::vector<double> tunings;                  // [estimator]
  EffectiveSampleSizes effective;
  std::int64_t nMin = 0;
};

// Replicates are driven by substreams derived from (seed, rep), so results
// do not depend on how replicates are scheduled across threads.
ReplicateOutput run_replicate(const CompiledExperiment& exp, std::int64_t rep);

struct EstimatorRow {
  std::string name;
  std::vector<RiskReport> losses;  // aligned with config losses
  double meanTuning = 0.0;
};

struct SimulationReport {
  ExperimentConfig config;
  std::vector<EstimatorRow> rows;
  double effectivePair = 0.0;    // mean over replicates
  double effectiveSingle = 0.0;  // mean over replicates
  std::int64_t nMinOverall = 0;  // smallest pairwise count seen
};

SimulationReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

std::string format_report_tsv(const SimulationReport& report);

}  // namespace covmiss
