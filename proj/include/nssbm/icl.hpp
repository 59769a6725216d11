#pragma once

#include <span>
#include <vector>

#include "nssbm/tensor.hpp"

namespace nssbm {

// Integrated classification likelihood split into its two integrated parts:
// total = emission_term + label_term, exactly as summed.
struct IclValue {
  double total = 0.0;
  double emission_term = 0.0;  // ln nu(N | c, y, K, D)
  double label_term = 0.0;     // ln nu(c, y | K, D)
};

// Posterior mean of the block rates under the Gamma prior:
// (S_kgd + a) / (delta * R_kgd + b).
struct RateEstimate {
  int num_node_clusters = 0;
  int num_time_clusters = 0;
  std::vector<double> values;  // K*K*D, same layout as BlockStats

  double at(int k, int g, int d) const {
    return values[(static_cast<std::size_t>(k) * num_node_clusters + g) * num_time_clusters + d];
  }
};

// Integrated emission term: for every block,
//   a ln b - lnG(a) + S ln(delta) + lnG(S + a) - (S + a) ln(delta R + b),
// summed in lexicographic (k, g, d) order, minus the label-invariant
// sum of ln(count!) over tensor entries.
double log_emission(const BlockStats& stats, const Hyperparameters& h);

// Integrated label term from the collapsed Dirichlet-multinomial priors on
// both axes.
double log_label_prior(std::span<const std::int32_t> node_sizes,
                       std::span<const std::int32_t> time_sizes,
                       const Hyperparameters& h, std::int64_t num_nodes,
                       std::int64_t num_bins);

IclValue icl(const InteractionTensor& tensor, const NodePartition& c,
             const TimePartition& y, const Hyperparameters& h);

RateEstimate posterior_rates(const BlockStats& stats, const Hyperparameters& h);

enum class Axis { node, time };

// Mutable search state: tensor + partitions + sufficient statistics with a
// cached per-block emission term. Delta evaluations are const and touch only
// blocks whose row or column changes; committing a move updates the caches
// by the exact evaluated delta. Many deltas may be evaluated concurrently
// against one state; mutation is single-writer.
class IclState {
 public:
  IclState(const InteractionTensor& tensor, NodePartition c, TimePartition y,
           Hyperparameters h);

  const InteractionTensor& tensor() const { return *tensor_; }
  const NodePartition& node_partition() const { return c_; }
  const TimePartition& time_partition() const { return y_; }
  const BlockStats& stats() const { return stats_; }
  const Hyperparameters& hyperparameters() const { return h_; }
  int num_node_clusters() const { return c_.num_clusters(); }
  int num_time_clusters() const { return y_.num_clusters(); }

  // running ICL, maintained incrementally from accepted deltas
  IclValue value() const {
    return {emission_run_ + label_run_, emission_run_, label_run_};
  }

  // ICL change of relabeling one node / one bin. Throws empty_cluster_error
  // when the source cluster has a single member (callers evaluate a merge
  // instead) and std::invalid_argument for a self-move.
  double delta_node_move(int node, int target) const;
  double delta_time_move(int bin, int target) const;

  // ICL change of absorbing cluster `absorb` into `keep` on the given axis,
  // including the change of the Dirichlet normalization with K (resp. D).
  double delta_merge(Axis axis, int keep, int absorb) const;

  // commit operations; each returns the applied delta
  double apply_node_move(int node, int target);
  double apply_time_move(int bin, int target);
  double apply_merge(Axis axis, int keep, int absorb);

  // fresh from-scratch evaluation, for drift checks
  IclValue recompute() const;

 private:
  struct MoveDelta {
    double emission = 0.0;
    double label = 0.0;
    double total() const { return emission + label; }
  };

  double block_term(count_t s, count_t r) const;
  MoveDelta node_move_delta(int node, int target, const detail::NodeAggregates& agg) const;
  MoveDelta time_move_delta(int bin, int target, const std::vector<count_t>& agg) const;
  MoveDelta merge_delta(Axis axis, int keep, int absorb) const;
  void check_node_move(int node, int target) const;
  void check_time_move(int bin, int target) const;
  void rebuild_terms();

  const InteractionTensor* tensor_;
  Hyperparameters h_;
  NodePartition c_;
  TimePartition y_;
  BlockStats stats_;
  std::vector<double> terms_;  // cached per-block emission contributions
  double emission_run_ = 0.0;
  double label_run_ = 0.0;
  double block_const_ = 0.0;  // a ln b - lnG(a)
  double log_delta_ = 0.0;
};

}  // namespace nssbm
