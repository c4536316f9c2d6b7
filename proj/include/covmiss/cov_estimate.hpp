#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <covmiss/matrix_num.hpp>

namespace covmiss {

// Estimator families. The starred variants run the same transform on the
// observation-probability-normalized baseline covariance instead of the
// pairwise-count one.
enum class Method {
  BlockTridiagonal,   // bt
  Tapering,           // tp
  Banding,            // bd
  Threshold,          // at
  ThresholdPd,        // at+  (threshold, then diagonal lift to positive definite)
  BulletBlockTridiagonal,  // bt*
  BulletThreshold,         // at*
};

inline std::string method_name(Method m) {
  switch (m) {
    case Method::BlockTridiagonal: return "bt";
    case Method::Tapering: return "tp";
    case Method::Banding: return "bd";
    case Method::Threshold: return "at";
    case Method::ThresholdPd: return "at+";
    case Method::BulletBlockTridiagonal: return "bt*";
    case Method::BulletThreshold: return "at*";
  }
  throw std::logic_error("unreachable");
}

// Accepts the short names plus shell-friendly aliases for the starred pair.
inline Method parse_method(const std::string& name) {
  if (name == "bt") return Method::BlockTridiagonal;
  if (name == "tp") return Method::Tapering;
  if (name == "bd") return Method::Banding;
  if (name == "at") return Method::Threshold;
  if (name == "at+") return Method::ThresholdPd;
  if (name == "bt*" || name == "bt-bullet" || name == "bt_bullet")
    return Method::BulletBlockTridiagonal;
  if (name == "at*" || name == "at-bullet" || name == "at_bullet")
    return Method::BulletThreshold;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected bt, tp, bd, at, at+, bt*, at*)");
}

inline bool is_banding_family(Method m) {
  return m == Method::BlockTridiagonal || m == Method::Tapering ||
         m == Method::Banding || m == Method::BulletBlockTridiagonal;
}

inline bool is_threshold_family(Method m) { return !is_banding_family(m); }

inline bool is_bullet_family(Method m) {
  return m == Method::BulletBlockTridiagonal || m == Method::BulletThreshold;
}

// A fitted covariance estimate: the (exactly symmetric) matrix, which family
// produced it, the tuning value it was fitted at (bandwidth or threshold
// multiplier), and the smallest pairwise count of the data it came from
// (-1 when the producer did not see the counts).
template <typename Scalar>
struct CovEstimate {
  SymmetricMatrix<Scalar> matrix;
  Method method;
  double tuning;
  std::int64_t nMin = -1;
};

}  // namespace covmiss
