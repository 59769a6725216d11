#include "nssbm/tensor.hpp"

#include <algorithm>
#include <utility>

#include "nssbm/numerics.hpp"

namespace nssbm {

const char* mode_name(Mode mode) {
  return mode == Mode::directed ? "directed" : "undirected";
}

Mode mode_from_name(const std::string& name) {
  if (name == "directed") return Mode::directed;
  if (name == "undirected") return Mode::undirected;
  throw std::invalid_argument("unknown tensor mode: " + name);
}

void Hyperparameters::validate() const {
  auto positive = [](double v) { return v > 0.0 && v - v == 0.0; };
  if (!positive(a) || !positive(b) || !positive(alpha) || !positive(gamma) || !positive(delta)) {
    throw std::invalid_argument("hyperparameters must all be strictly positive and finite");
  }
}

// ---------------------------------------------------------------------------
// InteractionTensor
// ---------------------------------------------------------------------------

namespace {

std::string record_str(const EventRecord& r, std::size_t idx) {
  return "record #" + std::to_string(idx) + " (" + std::to_string(r.source) + ", " +
         std::to_string(r.target) + ", bin " + std::to_string(r.bin) + ", count " +
         std::to_string(r.count) + ")";
}

}  // namespace

InteractionTensor build_tensor(std::span<const EventRecord> records,
                               int num_nodes, int num_bins, Mode mode) {
  if (num_nodes < 1 || num_bins < 1) {
    throw std::invalid_argument("tensor needs at least one node and one bin");
  }

  std::vector<TensorEntry> normalized;
  normalized.reserve(records.size());
  for (std::size_t idx = 0; idx < records.size(); ++idx) {
    const EventRecord& r = records[idx];
    if (r.source < 0 || r.source >= num_nodes || r.target < 0 || r.target >= num_nodes) {
      throw std::out_of_range("node id out of range in " + record_str(r, idx));
    }
    if (r.bin < 0 || r.bin >= num_bins) {
      throw std::out_of_range("bin out of range in " + record_str(r, idx));
    }
    if (r.count < 0) {
      throw std::out_of_range("negative count in " + record_str(r, idx));
    }
    std::int32_t s = r.source;
    std::int32_t t = r.target;
    if (mode == Mode::undirected) {
      if (s == t) {
        throw std::invalid_argument("self loop not allowed in undirected mode: " +
                                    record_str(r, idx));
      }
      if (s > t) std::swap(s, t);
    }
    if (r.count == 0) continue;  // zero-count records are never materialized
    normalized.push_back({s, t, r.bin, r.count});
  }

  std::sort(normalized.begin(), normalized.end(), [](const TensorEntry& a, const TensorEntry& b) {
    return std::tie(a.source, a.target, a.bin) < std::tie(b.source, b.target, b.bin);
  });

  InteractionTensor tensor;
  tensor.num_nodes_ = num_nodes;
  tensor.num_bins_ = num_bins;
  tensor.mode_ = mode;

  for (const TensorEntry& e : normalized) {
    if (!tensor.entries_.empty()) {
      TensorEntry& last = tensor.entries_.back();
      if (last.source == e.source && last.target == e.target && last.bin == e.bin) {
        last.count += e.count;
        continue;
      }
    }
    tensor.entries_.push_back(e);
  }

  const auto n = static_cast<std::size_t>(num_nodes);
  const auto u = static_cast<std::size_t>(num_bins);

  std::vector<std::size_t> inc_count(n, 0);
  std::vector<std::size_t> bin_count(u, 0);
  tensor.bin_totals_.assign(u, 0);
  for (const TensorEntry& e : tensor.entries_) {
    tensor.total_count_ += e.count;
    tensor.bin_totals_[static_cast<std::size_t>(e.bin)] += e.count;
    bin_count[static_cast<std::size_t>(e.bin)]++;
    inc_count[static_cast<std::size_t>(e.source)]++;
    if (e.source != e.target) inc_count[static_cast<std::size_t>(e.target)]++;
  }

  tensor.incidence_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    tensor.incidence_offsets_[i + 1] = tensor.incidence_offsets_[i] + inc_count[i];
  }
  tensor.incidence_.resize(tensor.incidence_offsets_.back());
  {
    std::vector<std::size_t> cursor(tensor.incidence_offsets_.begin(),
                                    tensor.incidence_offsets_.end() - 1);
    for (const TensorEntry& e : tensor.entries_) {
      if (e.source == e.target) {
        tensor.incidence_[cursor[static_cast<std::size_t>(e.source)]++] = {
            e.target, e.bin, e.count, InteractionTensor::Dir::self};
      } else if (mode == Mode::undirected) {
        tensor.incidence_[cursor[static_cast<std::size_t>(e.source)]++] = {
            e.target, e.bin, e.count, InteractionTensor::Dir::out};
        tensor.incidence_[cursor[static_cast<std::size_t>(e.target)]++] = {
            e.source, e.bin, e.count, InteractionTensor::Dir::out};
      } else {
        tensor.incidence_[cursor[static_cast<std::size_t>(e.source)]++] = {
            e.target, e.bin, e.count, InteractionTensor::Dir::out};
        tensor.incidence_[cursor[static_cast<std::size_t>(e.target)]++] = {
            e.source, e.bin, e.count, InteractionTensor::Dir::in};
      }
    }
  }

  tensor.bin_offsets_.assign(u + 1, 0);
  for (std::size_t i = 0; i < u; ++i) {
    tensor.bin_offsets_[i + 1] = tensor.bin_offsets_[i] + bin_count[i];
  }
  tensor.bin_entries_.resize(tensor.bin_offsets_.back());
  {
    std::vector<std::size_t> cursor(tensor.bin_offsets_.begin(), tensor.bin_offsets_.end() - 1);
    for (const TensorEntry& e : tensor.entries_) {
      tensor.bin_entries_[cursor[static_cast<std::size_t>(e.bin)]++] = {e.source, e.target,
                                                                        e.count};
    }
  }

  return tensor;
}

std::span<const InteractionTensor::Incidence> InteractionTensor::incident(int node) const {
  const auto i = static_cast<std::size_t>(node);
  return {incidence_.data() + incidence_offsets_[i],
          incidence_offsets_[i + 1] - incidence_offsets_[i]};
}

std::span<const InteractionTensor::BinEntry> InteractionTensor::bin_slice(int bin) const {
  const auto b = static_cast<std::size_t>(bin);
  return {bin_entries_.data() + bin_offsets_[b], bin_offsets_[b + 1] - bin_offsets_[b]};
}

count_t InteractionTensor::bin_total(int bin) const {
  return bin_totals_[static_cast<std::size_t>(bin)];
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

Partition::Partition(std::vector<std::int32_t> labels, int num_clusters)
    : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw std::invalid_argument("partition needs at least one element");
  }
  if (num_clusters < 1) {
    throw std::invalid_argument("partition needs at least one cluster");
  }
  sizes_.assign(static_cast<std::size_t>(num_clusters), 0);
  for (std::int32_t lab : labels_) {
    if (lab < 0 || lab >= num_clusters) {
      throw std::invalid_argument("label " + std::to_string(lab) + " outside [0, " +
                                  std::to_string(num_clusters) + ")");
    }
    sizes_[static_cast<std::size_t>(lab)]++;
  }
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    if (sizes_[k] == 0) {
      throw std::invalid_argument("cluster " + std::to_string(k) + " is empty");
    }
  }
}

Partition Partition::single_cluster(int num_elements) {
  return Partition(std::vector<std::int32_t>(static_cast<std::size_t>(num_elements), 0), 1);
}

void Partition::move(int i, int target) {
  const std::int32_t from = labels_[static_cast<std::size_t>(i)];
  if (from == target) return;
  if (target < 0 || target >= num_clusters()) {
    throw std::invalid_argument("move target cluster out of range");
  }
  if (sizes_[static_cast<std::size_t>(from)] == 1) {
    throw empty_cluster_error("move would empty cluster " + std::to_string(from));
  }
  sizes_[static_cast<std::size_t>(from)]--;
  sizes_[static_cast<std::size_t>(target)]++;
  labels_[static_cast<std::size_t>(i)] = target;
}

void Partition::merge(int keep, int absorb) {
  if (keep == absorb) {
    throw std::invalid_argument("merge needs two distinct clusters");
  }
  if (keep < 0 || keep >= num_clusters() || absorb < 0 || absorb >= num_clusters()) {
    throw std::invalid_argument("merge cluster out of range");
  }
  for (std::int32_t& lab : labels_) {
    if (lab == absorb) {
      lab = keep;
    }
    if (lab > absorb) {
      lab--;
    }
  }
  sizes_[static_cast<std::size_t>(keep)] += sizes_[static_cast<std::size_t>(absorb)];
  sizes_.erase(sizes_.begin() + absorb);
}

// ---------------------------------------------------------------------------
// Block statistics
// ---------------------------------------------------------------------------

count_t block_pair_volume(Mode mode, count_t size_k, count_t size_g, bool diagonal) {
  if (mode == Mode::directed) {
    return size_k * size_g;
  }
  return diagonal ? size_k * (size_k - 1) / 2 : size_k * size_g;
}

count_t BlockStats::s(int k, int g, int d) const {
  if (mode == Mode::undirected && k > g) std::swap(k, g);
  return s_flat[index(k, g, d)];
}

count_t BlockStats::r(int k, int g, int d) const {
  if (mode == Mode::undirected && k > g) std::swap(k, g);
  return r_flat[index(k, g, d)];
}

count_t BlockStats::total() const {
  count_t total = 0;
  for (count_t v : s_flat) total += v;
  return total;
}

namespace {

void fill_volumes(BlockStats& stats, std::span<const std::int32_t> node_sizes,
                  std::span<const std::int32_t> time_sizes) {
  const int K = stats.num_node_clusters;
  const int D = stats.num_time_clusters;
  for (int k = 0; k < K; ++k) {
    const int g0 = stats.mode == Mode::undirected ? k : 0;
    for (int g = g0; g < K; ++g) {
      const count_t vol = block_pair_volume(stats.mode, node_sizes[static_cast<std::size_t>(k)],
                                            node_sizes[static_cast<std::size_t>(g)], k == g);
      for (int d = 0; d < D; ++d) {
        stats.r_flat[stats.index(k, g, d)] = vol * time_sizes[static_cast<std::size_t>(d)];
      }
    }
  }
}

void check_dims(const InteractionTensor& tensor, const NodePartition& c,
                const TimePartition& y) {
  if (c.size() != tensor.num_nodes() || y.size() != tensor.num_bins()) {
    throw std::invalid_argument("partition dimensions do not match tensor");
  }
}

}  // namespace

BlockStats compute_block_stats(const InteractionTensor& tensor, const NodePartition& c,
                               const TimePartition& y) {
  check_dims(tensor, c, y);
  const int K = c.num_clusters();
  const int D = y.num_clusters();

  BlockStats stats;
  stats.num_node_clusters = K;
  stats.num_time_clusters = D;
  stats.mode = tensor.mode();
  stats.s_flat.assign(static_cast<std::size_t>(K) * K * D, 0);
  stats.r_flat.assign(static_cast<std::size_t>(K) * K * D, 0);

  double log_fact = 0.0;
  for (const TensorEntry& e : tensor.entries()) {
    int k = c.label(e.source);
    int g = c.label(e.target);
    if (tensor.mode() == Mode::undirected && k > g) std::swap(k, g);
    stats.s_flat[stats.index(k, g, y.label(e.bin))] += e.count;
    log_fact += log_factorial(e.count);
  }
  stats.log_fact_const = log_fact;

  fill_volumes(stats, c.cluster_sizes(), y.cluster_sizes());
  return stats;
}

namespace detail {

NodeAggregates gather_node_aggregates(const InteractionTensor& tensor, const NodePartition& c,
                                      const TimePartition& y, int node) {
  const int K = c.num_clusters();
  const int D = y.num_clusters();
  NodeAggregates agg;
  agg.out.assign(static_cast<std::size_t>(K) * D, 0);
  agg.in.assign(static_cast<std::size_t>(K) * D, 0);
  agg.self.assign(static_cast<std::size_t>(D), 0);
  for (const auto& inc : tensor.incident(node)) {
    const int d = y.label(inc.bin);
    switch (inc.dir) {
      case InteractionTensor::Dir::out:
        agg.out[static_cast<std::size_t>(c.label(inc.other)) * D + d] += inc.count;
        break;
      case InteractionTensor::Dir::in:
        agg.in[static_cast<std::size_t>(c.label(inc.other)) * D + d] += inc.count;
        break;
      case InteractionTensor::Dir::self:
        agg.self[static_cast<std::size_t>(d)] += inc.count;
        break;
    }
  }
  return agg;
}

std::vector<count_t> gather_bin_aggregates(const InteractionTensor& tensor,
                                           const NodePartition& c, int bin) {
  const int K = c.num_clusters();
  std::vector<count_t> m(static_cast<std::size_t>(K) * K, 0);
  for (const auto& e : tensor.bin_slice(bin)) {
    int k = c.label(e.source);
    int g = c.label(e.target);
    if (tensor.mode() == Mode::undirected && k > g) std::swap(k, g);
    m[static_cast<std::size_t>(k) * K + g] += e.count;
  }
  return m;
}

// Adds the count shifts a node move induces on S. `sign` is -1 to remove the
// node from cluster `k`, +1 to add it to cluster `k`.
void apply_node_shift(BlockStats& stats, const NodeAggregates& agg, int k, int sign) {
  const int K = stats.num_node_clusters;
  const int D = stats.num_time_clusters;
  for (int g = 0; g < K; ++g) {
    for (int d = 0; d < D; ++d) {
      const count_t w_out = agg.out[static_cast<std::size_t>(g) * D + d];
      if (w_out != 0) {
        if (stats.mode == Mode::undirected) {
          stats.s_flat[stats.index(std::min(k, g), std::max(k, g), d)] += sign * w_out;
        } else {
          stats.s_flat[stats.index(k, g, d)] += sign * w_out;
        }
      }
      const count_t w_in = agg.in[static_cast<std::size_t>(g) * D + d];
      if (w_in != 0) {
        stats.s_flat[stats.index(g, k, d)] += sign * w_in;
      }
    }
  }
  for (int d = 0; d < D; ++d) {
    const count_t w = agg.self[static_cast<std::size_t>(d)];
    if (w != 0) {
      stats.s_flat[stats.index(k, k, d)] += sign * w;
    }
  }
}

}  // namespace detail

BlockStats stats_after_node_move(const BlockStats& stats, const InteractionTensor& tensor,
                                 const NodePartition& c, const TimePartition& y,
                                 int node, int target) {
  check_dims(tensor, c, y);
  const int from = c.label(node);
  if (from == target) {
    throw std::invalid_argument("node move target equals current cluster");
  }
  if (target < 0 || target >= c.num_clusters()) {
    throw std::invalid_argument("node move target cluster out of range");
  }
  if (c.cluster_sizes()[static_cast<std::size_t>(from)] == 1) {
    throw empty_cluster_error("moving node " + std::to_string(node) +
                              " would empty cluster " + std::to_string(from));
  }

  BlockStats next = stats;
  const auto agg = detail::gather_node_aggregates(tensor, c, y, node);
  detail::apply_node_shift(next, agg, from, -1);
  detail::apply_node_shift(next, agg, target, +1);

  // volumes: only rows/columns touching the two clusters change
  std::vector<std::int32_t> sizes = c.cluster_sizes();
  sizes[static_cast<std::size_t>(from)]--;
  sizes[static_cast<std::size_t>(target)]++;
  const auto& time_sizes = y.cluster_sizes();
  const int K = stats.num_node_clusters;
  const int D = stats.num_time_clusters;
  detail::for_each_pair_touching(K, stats.mode, from, target, [&](int p, int q) {
    const count_t vol = block_pair_volume(stats.mode, sizes[static_cast<std::size_t>(p)],
                                          sizes[static_cast<std::size_t>(q)], p == q);
    for (int d = 0; d < D; ++d) {
      next.r_flat[next.index(p, q, d)] = vol * time_sizes[static_cast<std::size_t>(d)];
    }
  });
  return next;
}

BlockStats stats_after_time_move(const BlockStats& stats, const InteractionTensor& tensor,
                                 const NodePartition& c, const TimePartition& y,
                                 int bin, int target) {
  check_dims(tensor, c, y);
  const int from = y.label(bin);
  if (from == target) {
    throw std::invalid_argument("time move target equals current cluster");
  }
  if (target < 0 || target >= y.num_clusters()) {
    throw std::invalid_argument("time move target cluster out of range");
  }
  if (y.cluster_sizes()[static_cast<std::size_t>(from)] == 1) {
    throw empty_cluster_error("moving bin " + std::to_string(bin) + " would empty cluster " +
                              std::to_string(from));
  }

  BlockStats next = stats;
  const auto m = detail::gather_bin_aggregates(tensor, c, bin);
  const int K = stats.num_node_clusters;
  const auto& node_sizes = c.cluster_sizes();
  const count_t from_size = y.cluster_sizes()[static_cast<std::size_t>(from)] - 1;
  const count_t target_size = y.cluster_sizes()[static_cast<std::size_t>(target)] + 1;
  for (int p = 0; p < K; ++p) {
    const int q0 = stats.mode == Mode::undirected ? p : 0;
    for (int q = q0; q < K; ++q) {
      const count_t w = m[static_cast<std::size_t>(p) * K + q];
      if (w != 0) {
        next.s_flat[next.index(p, q, from)] -= w;
        next.s_flat[next.index(p, q, target)] += w;
      }
      const count_t vol = block_pair_volume(stats.mode, node_sizes[static_cast<std::size_t>(p)],
                                            node_sizes[static_cast<std::size_t>(q)], p == q);
      next.r_flat[next.index(p, q, from)] = vol * from_size;
      next.r_flat[next.index(p, q, target)] = vol * target_size;
    }
  }
  return next;
}

}  // namespace nssbm
