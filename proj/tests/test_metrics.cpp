#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "nssbm/metrics.hpp"

using namespace nssbm;

TEST_CASE("identical partitions score 1") {
  const std::vector<std::int32_t> a = {0, 0, 1, 1, 2};
  CHECK(adjusted_rand_index(a, a) == 1.0);
}

TEST_CASE("relabeling does not change the index") {
  const std::vector<std::int32_t> a = {0, 0, 1, 1, 2, 2};
  const std::vector<std::int32_t> b = {5, 5, 3, 3, 9, 9};
  CHECK(adjusted_rand_index(a, b) == 1.0);
}

TEST_CASE("the crossed two-by-two case is -1/2") {
  const std::vector<std::int32_t> a = {0, 0, 1, 1};
  const std::vector<std::int32_t> b = {0, 1, 0, 1};
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("partial agreement from the contingency formula") {
  // rows {0:2},{1:2}; columns {0:2},{1:1},{2:1}: ARI = (1 - 1/3)/(3/2 - 1/3)
  const std::vector<std::int32_t> a = {0, 0, 1, 1};
  const std::vector<std::int32_t> b = {0, 0, 1, 2};
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("trivial partitions") {
  const std::vector<std::int32_t> ones = {0, 0, 0, 0};
  const std::vector<std::int32_t> singletons = {0, 1, 2, 3};
  CHECK(adjusted_rand_index(ones, ones) == 1.0);
  CHECK(adjusted_rand_index(singletons, singletons) == 1.0);
  CHECK(adjusted_rand_index(ones, singletons) == 0.0);
  const std::vector<std::int32_t> single = {4};
  CHECK(adjusted_rand_index(single, single) == 1.0);
}

TEST_CASE("length mismatch is an error") {
  const std::vector<std::int32_t> a = {0, 1};
  const std::vector<std::int32_t> b = {0, 1, 1};
  CHECK_THROWS_AS(adjusted_rand_index(a, b), std::invalid_argument);
}
