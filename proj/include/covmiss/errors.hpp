#pragma once

#include <stdexcept>
#include <string>

namespace covmiss {

// Data-dependent failure: unusable masks, malformed files, rates outside
// their range. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure: non-finite input where finite values are required, or an
// iteration that ends without a convergence certificate. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace covmiss
