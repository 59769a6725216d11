#include "nssbm/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nssbm {

RateGrid additive_rates(std::span<const double> s1, std::span<const double> s2,
                        std::span<const double> s3) {
  if (s1.empty() || s2.empty() || s3.empty()) {
    throw std::invalid_argument("additive_rates: empty component vector");
  }
  if (s1.size() != s2.size()) {
    throw std::invalid_argument("additive_rates: s1 and s2 must have equal length");
  }
  RateGrid grid;
  grid.num_node_clusters = static_cast<int>(s1.size());
  grid.num_time_clusters = static_cast<int>(s3.size());
  grid.values.reserve(s1.size() * s2.size() * s3.size());
  for (std::size_t k = 0; k < s1.size(); ++k) {
    for (std::size_t g = 0; g < s2.size(); ++g) {
      for (std::size_t l = 0; l < s3.size(); ++l) {
        const double rate = s1[k] + s2[g] + s3[l];
        if (!(rate > 0.0)) {
          throw std::invalid_argument("additive_rates: non-positive rate at (" +
                                      std::to_string(k) + ", " + std::to_string(g) + ", " +
                                      std::to_string(l) + ")");
        }
        grid.values.push_back(rate);
      }
    }
  }
  return grid;
}

namespace {

void validate_simplex(std::span<const double> weights, const char* what) {
  if (weights.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty weight vector");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument(std::string(what) + ": negative weight");
    }
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": weights sum to " + std::to_string(sum) +
                                ", expected 1");
  }
}

}  // namespace

void GenerativeSpec::validate() const {
  if (num_nodes < 1 || num_bins < 1) {
    throw std::invalid_argument("generative spec needs at least one node and one bin");
  }
  validate_simplex(node_weights, "node_weights");
  validate_simplex(time_weights, "time_weights");
  if (static_cast<int>(node_weights.size()) != rates.num_node_clusters ||
      static_cast<int>(time_weights.size()) != rates.num_time_clusters) {
    throw std::invalid_argument("weight vector lengths do not match the rate grid");
  }
  if (rates.values.size() != static_cast<std::size_t>(rates.num_node_clusters) *
                                 rates.num_node_clusters * rates.num_time_clusters) {
    throw std::invalid_argument("rate grid has wrong size");
  }
  for (double r : rates.values) {
    if (!(r > 0.0)) {
      throw std::invalid_argument("rates must be strictly positive");
    }
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("delta must be strictly positive");
  }
}

std::vector<std::int32_t> sample_partition(int n, std::span<const double> weights, Rng& rng) {
  validate_simplex(weights, "sample_partition");
  std::vector<double> cumulative(weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    cumulative[k] = acc;
  }
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (auto& lab : labels) {
    lab = static_cast<std::int32_t>(rng.categorical(cumulative));
  }
  return labels;
}

std::vector<std::int32_t> sample_partition(int n, std::span<const double> weights,
                                           std::uint64_t seed) {
  Rng rng(seed);
  return sample_partition(n, weights, rng);
}

InteractionTensor simulate_tensor(const GenerativeSpec& spec,
                                  std::span<const std::int32_t> node_labels,
                                  std::span<const std::int32_t> time_labels) {
  spec.validate();
  if (static_cast<int>(node_labels.size()) != spec.num_nodes ||
      static_cast<int>(time_labels.size()) != spec.num_bins) {
    throw std::invalid_argument("label vectors do not match spec dimensions");
  }
  for (std::int32_t lab : node_labels) {
    if (lab < 0 || lab >= spec.rates.num_node_clusters) {
      throw std::invalid_argument("node label outside rate grid");
    }
  }
  for (std::int32_t lab : time_labels) {
    if (lab < 0 || lab >= spec.rates.num_time_clusters) {
      throw std::invalid_argument("time label outside rate grid");
    }
  }

  Rng rng(mix_seed(spec.seed, 3));
  std::vector<EventRecord> records;
  const int n = spec.num_nodes;
  const int u = spec.num_bins;
  for (int i = 0; i < n; ++i) {
    const int j0 = spec.mode == Mode::undirected ? i + 1 : 0;
    for (int j = j0; j < n; ++j) {
      for (int t = 0; t < u; ++t) {
        const double mean =
            spec.delta * spec.rates.at(node_labels[static_cast<std::size_t>(i)],
                                       node_labels[static_cast<std::size_t>(j)],
                                       time_labels[static_cast<std::size_t>(t)]);
        const count_t draw = rng.poisson(mean);
        if (draw > 0) {
          records.push_back({i, j, t, draw});
        }
      }
    }
  }
  return build_tensor(records, n, u, spec.mode);
}

SimulatedData simulate(const GenerativeSpec& spec) {
  spec.validate();
  SimulatedData data;
  Rng node_rng(mix_seed(spec.seed, 1));
  Rng time_rng(mix_seed(spec.seed, 2));
  data.node_labels = sample_partition(spec.num_nodes, spec.node_weights, node_rng);
  data.time_labels = sample_partition(spec.num_bins, spec.time_weights, time_rng);
  data.tensor = simulate_tensor(spec, data.node_labels, data.time_labels);
  return data;
}

}  // namespace nssbm
