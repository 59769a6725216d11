#pragma once

#include <cstdint>
#include <span>

namespace nssbm {

// Adjusted Rand index between two labelings of the same elements; 1 iff the
// partitions are identical up to relabeling. Throws std::invalid_argument on
// length mismatch.
double adjusted_rand_index(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

}  // namespace nssbm
