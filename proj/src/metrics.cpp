#include "nssbm/metrics.hpp"

#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace nssbm {

namespace {

std::vector<int> densify(std::span<const std::int32_t> labels, int& num_clusters) {
  std::unordered_map<std::int32_t, int> ids;
  std::vector<int> dense(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
    dense[i] = it->second;
  }
  num_clusters = static_cast<int>(ids.size());
  return dense;
}

std::int64_t comb2(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

double adjusted_rand_index(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("adjusted_rand_index: label vectors differ in length");
  }
  const auto n = static_cast<std::int64_t>(a.size());
  if (n < 2) return 1.0;

  int ka = 0;
  int kb = 0;
  const auto da = densify(a, ka);
  const auto db = densify(b, kb);

  std::vector<std::int64_t> contingency(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<std::int64_t> row(static_cast<std::size_t>(ka), 0);
  std::vector<std::int64_t> col(static_cast<std::size_t>(kb), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    contingency[static_cast<std::size_t>(da[i]) * kb + db[i]]++;
    row[static_cast<std::size_t>(da[i])]++;
    col[static_cast<std::size_t>(db[i])]++;
  }

  std::int64_t sum_cells = 0;
  for (std::int64_t c : contingency) sum_cells += comb2(c);
  std::int64_t sum_rows = 0;
  for (std::int64_t r : row) sum_rows += comb2(r);
  std::int64_t sum_cols = 0;
  for (std::int64_t c : col) sum_cols += comb2(c);

  const double expected = static_cast<double>(sum_rows) * static_cast<double>(sum_cols) /
                          static_cast<double>(comb2(n));
  const double maximum = 0.5 * (static_cast<double>(sum_rows) + static_cast<double>(sum_cols));
  const double denom = maximum - expected;
  if (denom == 0.0) {
    // both partitions trivial in the same way (all singletons or one cluster)
    return 1.0;
  }
  return (static_cast<double>(sum_cells) - expected) / denom;
}

}  // namespace nssbm
