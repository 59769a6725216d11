#pragma once

#include <cstdint>

namespace nssbm {

// lgamma for strictly positive arguments, avoiding the signgam global that
// makes glibc's lgamma() unsafe to call from several threads.
double log_gamma(double x);

// ln(n!) via log_gamma, with a table for small n.
double log_factorial(std::int64_t n);

// Neumaier-compensated running sum. Block sums are accumulated with this in
// a fixed lexicographic order so full evaluations and incremental deltas
// agree far below the 1e-9 contract.
class StableSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace nssbm
