#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <covmiss/matrix_num.hpp>

namespace covmiss {

enum class LossKind { Spectral, MatrixL1, Frobenius };

inline std::string loss_name(LossKind k) {
  switch (k) {
    case LossKind::Spectral: return "spectral";
    case LossKind::MatrixL1: return "l1";
    case LossKind::Frobenius: return "frobenius";
  }
  throw std::logic_error("unreachable");
}

inline LossKind parse_loss(const std::string& name) {
  if (name == "spectral") return LossKind::Spectral;
  if (name == "l1") return LossKind::MatrixL1;
  if (name == "frobenius") return LossKind::Frobenius;
  throw std::invalid_argument("unknown loss '" + name +
                              "' (expected spectral, l1, or frobenius)");
}

template <typename DerivedA, typename DerivedB>
double loss(const Eigen::MatrixBase<DerivedA>& estimate,
            const Eigen::MatrixBase<DerivedB>& truth, LossKind kind,
            PowerOptions opt = {}) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("loss operands have different shapes");
  const Matrix<double> diff =
      estimate.derived().template cast<double>() - truth.derived().template cast<double>();
  switch (kind) {
    case LossKind::Spectral: return spectral_norm(diff, opt);
    case LossKind::MatrixL1: return operator_l1_norm(diff);
    case LossKind::Frobenius: return frobenius_norm(diff);
  }
  throw std::logic_error("unreachable");
}

// Replicate-level loss values with their mean and, from two replicates on,
// the sample standard deviation (divisor r - 1).
struct RiskReport {
  std::vector<double> values;
  double mean = 0.0;
  std::optional<double> sd;
};

inline RiskReport aggregate(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cannot aggregate zero replicates");
  RiskReport out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  out.values = std::move(values);
  return out;
}

}  // namespace covmiss
