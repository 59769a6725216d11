#include "nssbm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nssbm {

std::int64_t Rng::poisson_knuth(double mean) {
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01();
  } while (p > limit);
  return k - 1;
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) {
    throw std::invalid_argument("poisson: mean must be non-negative");
  }
  // Poisson is infinitely divisible; split large means into chunks that the
  // product method handles without underflow.
  std::int64_t total = 0;
  while (mean > 60.0) {
    total += poisson_knuth(60.0);
    mean -= 60.0;
  }
  return total + poisson_knuth(mean);
}

int Rng::categorical(std::span<const double> cumulative) {
  if (cumulative.empty()) {
    throw std::invalid_argument("categorical: empty weight vector");
  }
  const double u = uniform01() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) {
    --it;
  }
  return static_cast<int>(it - cumulative.begin());
}

}  // namespace nssbm
