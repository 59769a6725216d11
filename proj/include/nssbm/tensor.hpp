#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nssbm {

using count_t = std::int64_t;

// Raised when a requested move would leave a cluster empty. The search layer
// converts these situations into explicit merge evaluations instead.
struct empty_cluster_error : std::logic_error {
  using std::logic_error::logic_error;
};

enum class Mode {
  // ordered (source, target) cells including self loops; N*N*U cells
  directed,
  // unordered pairs, no self loops; N*(N-1)/2*U cells, keys stored with
  // source < target
  undirected,
};

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

// One aggregated cell of input data: `count` interactions between `source`
// and `target` during time bin `bin`.
struct EventRecord {
  std::int32_t source = 0;
  std::int32_t target = 0;
  std::int32_t bin = 0;
  count_t count = 0;
};

struct TensorEntry {
  std::int32_t source;
  std::int32_t target;
  std::int32_t bin;
  count_t count;
};

// Sparse interaction tensor over (node, node, time bin). Immutable once
// built; carries per-node and per-bin adjacency indexes so move evaluations
// run in time proportional to the entries they touch.
class InteractionTensor {
 public:
  // Direction of an incident entry relative to the indexed node.
  enum class Dir : std::int8_t { out = 0, in = 1, self = 2 };

  struct Incidence {
    std::int32_t other;
    std::int32_t bin;
    count_t count;
    Dir dir;  // always `out` in undirected mode
  };

  struct BinEntry {
    std::int32_t source;
    std::int32_t target;
    count_t count;
  };

  InteractionTensor() = default;

  int num_nodes() const { return num_nodes_; }
  int num_bins() const { return num_bins_; }
  Mode mode() const { return mode_; }
  count_t total_count() const { return total_count_; }

  // entries sorted by (source, target, bin); in undirected mode
  // source < target holds for every entry
  const std::vector<TensorEntry>& entries() const { return entries_; }

  // all entries touching `node`, grouped by direction
  std::span<const Incidence> incident(int node) const;

  // all entries of time bin `bin`
  std::span<const BinEntry> bin_slice(int bin) const;

  count_t bin_total(int bin) const;

  friend InteractionTensor build_tensor(std::span<const EventRecord> records,
                                        int num_nodes, int num_bins, Mode mode);

 private:
  int num_nodes_ = 0;
  int num_bins_ = 0;
  Mode mode_ = Mode::directed;
  count_t total_count_ = 0;
  std::vector<TensorEntry> entries_;
  std::vector<Incidence> incidence_;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<BinEntry> bin_entries_;
  std::vector<std::size_t> bin_offsets_;
  std::vector<count_t> bin_totals_;
};

// Aggregates duplicate (source, target, bin) keys, canonicalizes key order in
// undirected mode, drops zero counts, and freezes the adjacency indexes.
// Throws std::out_of_range naming the offending record on bound violations
// and std::invalid_argument on undirected self loops.
InteractionTensor build_tensor(std::span<const EventRecord> records,
                               int num_nodes, int num_bins, Mode mode);

// Label vector over N elements with values in [0, K); every cluster is
// non-empty by construction.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<std::int32_t> labels, int num_clusters);

  static Partition single_cluster(int num_elements);

  int size() const { return static_cast<int>(labels_.size()); }
  int num_clusters() const { return static_cast<int>(sizes_.size()); }
  std::int32_t label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<std::int32_t>& labels() const { return labels_; }
  const std::vector<std::int32_t>& cluster_sizes() const { return sizes_; }

  // relabel element i; refuses to empty the source cluster
  void move(int i, int target);

  // absorb cluster `absorb` into `keep`; labels above `absorb` shift down
  void merge(int keep, int absorb);

 private:
  std::vector<std::int32_t> labels_;
  std::vector<std::int32_t> sizes_;
};

using NodePartition = Partition;
using TimePartition = Partition;

struct Hyperparameters {
  double a = 1.0;      // Gamma shape
  double b = 1.0;      // Gamma rate
  double alpha = 1.0;  // Dirichlet concentration, node labels
  double gamma = 1.0;  // Dirichlet concentration, time labels
  double delta = 1.0;  // time bin width

  void validate() const;
};

// number of (pair, bin)-cells per bin in node block (k, g)
count_t block_pair_volume(Mode mode, count_t size_k, count_t size_g, bool diagonal);

// Per-block sufficient statistics. S holds count sums, R cell volumes, both
// laid out as K*K*D with index (k*K + g)*D + d. In undirected mode only the
// k <= g triangle is populated; the accessors canonicalize.
struct BlockStats {
  int num_node_clusters = 0;
  int num_time_clusters = 0;
  Mode mode = Mode::directed;
  std::vector<count_t> s_flat;
  std::vector<count_t> r_flat;
  // sum of ln(count!) over tensor entries; invariant under relabeling
  double log_fact_const = 0.0;

  std::size_t index(int k, int g, int d) const {
    return (static_cast<std::size_t>(k) * num_node_clusters + g) * num_time_clusters + d;
  }
  count_t s(int k, int g, int d) const;
  count_t r(int k, int g, int d) const;
  count_t total() const;
};

BlockStats compute_block_stats(const InteractionTensor& tensor,
                               const NodePartition& c, const TimePartition& y);

// Stats after relabeling `node` to `target`, recomputing only blocks whose
// row or column touches the old or new cluster. Throws empty_cluster_error
// when the move would empty the source cluster.
BlockStats stats_after_node_move(const BlockStats& stats, const InteractionTensor& tensor,
                                 const NodePartition& c, const TimePartition& y,
                                 int node, int target);

BlockStats stats_after_time_move(const BlockStats& stats, const InteractionTensor& tensor,
                                 const NodePartition& c, const TimePartition& y,
                                 int bin, int target);

namespace detail {

// Interactions of one node aggregated by the other endpoint's cluster and
// the bin's time cluster. In undirected mode everything lands in `out`.
struct NodeAggregates {
  std::vector<count_t> out;   // K*D
  std::vector<count_t> in;    // K*D, directed only
  std::vector<count_t> self;  // D, directed only
};

NodeAggregates gather_node_aggregates(const InteractionTensor& tensor, const NodePartition& c,
                                      const TimePartition& y, int node);

// Counts of one bin aggregated by node-cluster pair (canonical in undirected
// mode); K*K row-major.
std::vector<count_t> gather_bin_aggregates(const InteractionTensor& tensor,
                                           const NodePartition& c, int bin);

void apply_node_shift(BlockStats& stats, const NodeAggregates& agg, int k, int sign);

// Visits every block-pair (p, q) whose row or column lies in {a, b} exactly
// once, in a fixed order; canonical pairs (p <= q) in undirected mode. Keeps
// node-move updates at O(K) visited pairs instead of scanning all K^2.
template <class Fn>
void for_each_pair_touching(int num_clusters, Mode mode, int a, int b, Fn&& fn) {
  if (mode == Mode::undirected) {
    const int x = std::min(a, b);
    const int y = std::max(a, b);
    for (int q = 0; q < num_clusters; ++q) {
      fn(std::min(x, q), std::max(x, q));
    }
    for (int q = 0; q < num_clusters; ++q) {
      if (q == x) continue;
      fn(std::min(y, q), std::max(y, q));
    }
    return;
  }
  for (int q = 0; q < num_clusters; ++q) fn(a, q);
  for (int q = 0; q < num_clusters; ++q) fn(b, q);
  for (int p = 0; p < num_clusters; ++p) {
    if (p == a || p == b) continue;
    fn(p, a);
    fn(p, b);
  }
}

}  // namespace detail

}  // namespace nssbm
