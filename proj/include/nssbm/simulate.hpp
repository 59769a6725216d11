#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nssbm/rng.hpp"
#include "nssbm/tensor.hpp"

namespace nssbm {

struct RateGrid {
  int num_node_clusters = 0;
  int num_time_clusters = 0;
  std::vector<double> values;  // K*K*D, (k*K + g)*D + d

  double at(int k, int g, int d) const {
    return values[(static_cast<std::size_t>(k) * num_node_clusters + g) * num_time_clusters + d];
  }
};

// rate grid lambda[k][g][l] = s1[k] + s2[g] + s3[l]; s1 and s2 index the two
// node-cluster axes and must have equal length, s3 the time clusters
RateGrid additive_rates(std::span<const double> s1, std::span<const double> s2,
                        std::span<const double> s3);

struct GenerativeSpec {
  int num_nodes = 0;
  int num_bins = 0;
  std::vector<double> node_weights;  // simplex of length K
  std::vector<double> time_weights;  // simplex of length D
  RateGrid rates;
  double delta = 1.0;
  Mode mode = Mode::directed;
  std::uint64_t seed = 0;

  void validate() const;
};

// i.i.d. categorical draws; clusters may come out empty, callers that need
// non-empty clusters handle that themselves
std::vector<std::int32_t> sample_partition(int n, std::span<const double> weights,
                                           std::uint64_t seed);
std::vector<std::int32_t> sample_partition(int n, std::span<const double> weights, Rng& rng);

// each cell (i, j, u) drawn Poisson(delta * lambda[c_i][c_j][y_u]); zero
// draws are not stored
InteractionTensor simulate_tensor(const GenerativeSpec& spec,
                                  std::span<const std::int32_t> node_labels,
                                  std::span<const std::int32_t> time_labels);

struct SimulatedData {
  std::vector<std::int32_t> node_labels;
  std::vector<std::int32_t> time_labels;
  InteractionTensor tensor;
};

// labels from the weight simplices, then the tensor, all from spec.seed
SimulatedData simulate(const GenerativeSpec& spec);

}  // namespace nssbm
