#include "nssbm/numerics.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace nssbm {

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

namespace {

constexpr std::int64_t kFactTableSize = 4096;

const std::vector<double>& factorial_table() {
  static std::vector<double> table = [] {
    std::vector<double> t(kFactTableSize);
    for (std::int64_t n = 0; n < kFactTableSize; ++n) {
      t[static_cast<std::size_t>(n)] = log_gamma(static_cast<double>(n) + 1.0);
    }
    return t;
  }();
  return table;
}

}  // namespace

double log_factorial(std::int64_t n) {
  if (n < 0) {
    throw std::invalid_argument("log_factorial: negative argument");
  }
  if (n < kFactTableSize) {
    return factorial_table()[static_cast<std::size_t>(n)];
  }
  return log_gamma(static_cast<double>(n) + 1.0);
}

}  // namespace nssbm
