#pragma once

#include <cstdint>
#include <vector>

#include "nssbm/icl.hpp"
#include "nssbm/rng.hpp"

namespace nssbm {

struct SearchConfig {
  int k_max = 10;
  int d_max = 10;
  int max_sweeps = 100;
  double improvement_epsilon = 1e-10;
  int num_restarts = 5;
  std::uint64_t seed = 0;
  // 0: take NSSBM_THREADS from the environment, else hardware concurrency
  int num_threads = 0;

  void validate() const;
};

enum class MoveKind { node_move, time_move, node_merge, time_merge };
const char* move_kind_name(MoveKind kind);

struct TraceEntry {
  int sweep;
  MoveKind kind;
  double delta;
  double icl_after;
};

struct FitResult {
  NodePartition node_partition;
  TimePartition time_partition;
  int num_node_clusters = 0;
  int num_time_clusters = 0;
  IclValue icl;  // fresh full evaluation of the returned partitions
  RateEstimate rates;
  std::vector<TraceEntry> trace;
  int restart_id = 0;
  // |running incremental total - fresh recompute|, bounded by 1e-6
  double revalidation_error = 0.0;
};

// One restart's in-progress search; exposed so sweeps can be driven and
// tested in isolation.
struct SearchState {
  IclState icl;
  Rng rng;
  double improvement_epsilon;
  int sweep = 0;
  std::vector<TraceEntry> trace;
};

// One pass over all nodes in a freshly shuffled order. Each node takes the
// best strictly improving relabeling; the sole member of a cluster is offered
// cluster merges instead. Returns whether any move was accepted.
bool node_sweep(SearchState& s);
bool time_sweep(SearchState& s);

// Greedily applies the best improving merge on `axis` until none is left.
bool merge_phase(SearchState& s, Axis axis);

// Uniform random labels over `num_clusters` clusters; random members are
// reassigned until no cluster is empty. Requires num_clusters <= num_elements.
std::vector<std::int32_t> random_labels(int num_elements, int num_clusters, Rng& rng);

// Greedy ICL maximization over labels and cluster counts with independent
// random restarts. k_max/d_max are clamped to the tensor dimensions; the
// winner is the restart with the highest revalidated ICL.
FitResult greedy_fit(const InteractionTensor& tensor, const Hyperparameters& h,
                     const SearchConfig& cfg);

}  // namespace nssbm
