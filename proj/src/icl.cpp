#include "nssbm/icl.hpp"

#include <algorithm>
#include <cmath>

#include "nssbm/numerics.hpp"

namespace nssbm {

namespace {

struct BlockTermEval {
  double a, b, delta;
  double block_const;  // a ln b - lnG(a)
  double log_delta;

  explicit BlockTermEval(const Hyperparameters& h)
      : a(h.a),
        b(h.b),
        delta(h.delta),
        block_const(h.a * std::log(h.b) - log_gamma(h.a)),
        log_delta(std::log(h.delta)) {}

  double term(count_t s, count_t r) const {
    const double sd = static_cast<double>(s);
    return block_const + sd * log_delta + log_gamma(sd + a) -
           (sd + a) * std::log(delta * static_cast<double>(r) + b);
  }
};

// Sums the per-block terms in lexicographic (k, g, d) order; optionally
// stores each term so incremental updates cancel exactly against the cache.
double sum_block_terms(const BlockStats& stats, const BlockTermEval& eval,
                       std::vector<double>* terms_out) {
  const int K = stats.num_node_clusters;
  const int D = stats.num_time_clusters;
  if (terms_out) {
    terms_out->assign(static_cast<std::size_t>(K) * K * D, 0.0);
  }
  StableSum sum;
  for (int k = 0; k < K; ++k) {
    const int g0 = stats.mode == Mode::undirected ? k : 0;
    for (int g = g0; g < K; ++g) {
      for (int d = 0; d < D; ++d) {
        const std::size_t idx = stats.index(k, g, d);
        const double t = eval.term(stats.s_flat[idx], stats.r_flat[idx]);
        if (terms_out) (*terms_out)[idx] = t;
        sum.add(t);
      }
    }
  }
  return sum.value();
}

double dirichlet_axis_term(std::span<const std::int32_t> sizes, double conc,
                           std::int64_t total) {
  const auto k = static_cast<double>(sizes.size());
  double value = log_gamma(conc * k) - k * log_gamma(conc) -
                 log_gamma(static_cast<double>(total) + conc * k);
  for (std::int32_t size : sizes) {
    value += log_gamma(static_cast<double>(size) + conc);
  }
  return value;
}

}  // namespace

double log_emission(const BlockStats& stats, const Hyperparameters& h) {
  h.validate();
  const BlockTermEval eval(h);
  return sum_block_terms(stats, eval, nullptr) - stats.log_fact_const;
}

double log_label_prior(std::span<const std::int32_t> node_sizes,
                       std::span<const std::int32_t> time_sizes,
                       const Hyperparameters& h, std::int64_t num_nodes,
                       std::int64_t num_bins) {
  h.validate();
  return dirichlet_axis_term(node_sizes, h.alpha, num_nodes) +
         dirichlet_axis_term(time_sizes, h.gamma, num_bins);
}

IclValue icl(const InteractionTensor& tensor, const NodePartition& c,
             const TimePartition& y, const Hyperparameters& h) {
  const BlockStats stats = compute_block_stats(tensor, c, y);
  const double emission = log_emission(stats, h);
  const double label = log_label_prior(c.cluster_sizes(), y.cluster_sizes(), h,
                                       tensor.num_nodes(), tensor.num_bins());
  return {emission + label, emission, label};
}

RateEstimate posterior_rates(const BlockStats& stats, const Hyperparameters& h) {
  h.validate();
  const int K = stats.num_node_clusters;
  const int D = stats.num_time_clusters;
  RateEstimate est;
  est.num_node_clusters = K;
  est.num_time_clusters = D;
  est.values.resize(static_cast<std::size_t>(K) * K * D);
  std::size_t idx = 0;
  for (int k = 0; k < K; ++k) {
    for (int g = 0; g < K; ++g) {
      for (int d = 0; d < D; ++d, ++idx) {
        const double s = static_cast<double>(stats.s(k, g, d));
        const double r = static_cast<double>(stats.r(k, g, d));
        est.values[idx] = (s + h.a) / (h.delta * r + h.b);
      }
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// IclState
// ---------------------------------------------------------------------------

IclState::IclState(const InteractionTensor& tensor, NodePartition c, TimePartition y,
                   Hyperparameters h)
    : tensor_(&tensor), h_(h), c_(std::move(c)), y_(std::move(y)) {
  h_.validate();
  if (c_.size() != tensor.num_nodes() || y_.size() != tensor.num_bins()) {
    throw std::invalid_argument("partition dimensions do not match tensor");
  }
  stats_ = compute_block_stats(tensor, c_, y_);
  block_const_ = h_.a * std::log(h_.b) - log_gamma(h_.a);
  log_delta_ = std::log(h_.delta);
  const BlockTermEval eval(h_);
  emission_run_ = sum_block_terms(stats_, eval, &terms_) - stats_.log_fact_const;
  label_run_ = log_label_prior(c_.cluster_sizes(), y_.cluster_sizes(), h_,
                               tensor.num_nodes(), tensor.num_bins());
}

double IclState::block_term(count_t s, count_t r) const {
  const double sd = static_cast<double>(s);
  return block_const_ + sd * log_delta_ + log_gamma(sd + h_.a) -
         (sd + h_.a) * std::log(h_.delta * static_cast<double>(r) + h_.b);
}

void IclState::check_node_move(int node, int target) const {
  if (node < 0 || node >= c_.size()) {
    throw std::invalid_argument("node index out of range");
  }
  if (target < 0 || target >= c_.num_clusters()) {
    throw std::invalid_argument("node move target cluster out of range");
  }
  const int from = c_.label(node);
  if (from == target) {
    throw std::invalid_argument("node move target equals current cluster");
  }
  if (c_.cluster_sizes()[static_cast<std::size_t>(from)] == 1) {
    throw empty_cluster_error("moving node " + std::to_string(node) +
                              " would empty cluster " + std::to_string(from));
  }
}

void IclState::check_time_move(int bin, int target) const {
  if (bin < 0 || bin >= y_.size()) {
    throw std::invalid_argument("bin index out of range");
  }
  if (target < 0 || target >= y_.num_clusters()) {
    throw std::invalid_argument("time move target cluster out of range");
  }
  const int from = y_.label(bin);
  if (from == target) {
    throw std::invalid_argument("time move target equals current cluster");
  }
  if (y_.cluster_sizes()[static_cast<std::size_t>(from)] == 1) {
    throw empty_cluster_error("moving bin " + std::to_string(bin) +
                              " would empty cluster " + std::to_string(from));
  }
}

IclState::MoveDelta IclState::node_move_delta(int node, int target,
                                              const detail::NodeAggregates& agg) const {
  const int from = c_.label(node);
  const int K = c_.num_clusters();
  const int D = y_.num_clusters();
  const bool undirected = stats_.mode == Mode::undirected;
  const auto& time_sizes = y_.cluster_sizes();

  std::vector<std::int32_t> sizes = c_.cluster_sizes();
  sizes[static_cast<std::size_t>(from)]--;
  sizes[static_cast<std::size_t>(target)]++;

  StableSum emission;
  detail::for_each_pair_touching(K, stats_.mode, from, target, [&](int p, int q) {
    const count_t vol = block_pair_volume(stats_.mode, sizes[static_cast<std::size_t>(p)],
                                          sizes[static_cast<std::size_t>(q)], p == q);
    for (int d = 0; d < D; ++d) {
      const std::size_t idx = stats_.index(p, q, d);
      count_t s_new = stats_.s_flat[idx];
      if (undirected) {
        if (p == from || q == from) {
          const int other = p == from ? q : p;
          s_new -= agg.out[static_cast<std::size_t>(other) * D + d];
        }
        if (p == target || q == target) {
          const int other = p == target ? q : p;
          s_new += agg.out[static_cast<std::size_t>(other) * D + d];
        }
      } else {
        if (p == from) s_new -= agg.out[static_cast<std::size_t>(q) * D + d];
        if (p == target) s_new += agg.out[static_cast<std::size_t>(q) * D + d];
        if (q == from) s_new -= agg.in[static_cast<std::size_t>(p) * D + d];
        if (q == target) s_new += agg.in[static_cast<std::size_t>(p) * D + d];
        if (p == from && q == from) s_new -= agg.self[static_cast<std::size_t>(d)];
        if (p == target && q == target) s_new += agg.self[static_cast<std::size_t>(d)];
      }
      const count_t r_new = vol * time_sizes[static_cast<std::size_t>(d)];
      emission.add(block_term(s_new, r_new) - terms_[idx]);
    }
  });

  const auto& old_sizes = c_.cluster_sizes();
  const double nf = old_sizes[static_cast<std::size_t>(from)];
  const double nt = old_sizes[static_cast<std::size_t>(target)];
  const double label = log_gamma(nf - 1 + h_.alpha) + log_gamma(nt + 1 + h_.alpha) -
                       log_gamma(nf + h_.alpha) - log_gamma(nt + h_.alpha);
  return {emission.value(), label};
}

double IclState::delta_node_move(int node, int target) const {
  check_node_move(node, target);
  const auto agg = detail::gather_node_aggregates(*tensor_, c_, y_, node);
  return node_move_delta(node, target, agg).total();
}

IclState::MoveDelta IclState::time_move_delta(int bin, int target,
                                              const std::vector<count_t>& agg) const {
  const int from = y_.label(bin);
  const int K = c_.num_clusters();
  const bool undirected = stats_.mode == Mode::undirected;
  const auto& node_sizes = c_.cluster_sizes();
  const auto& time_sizes = y_.cluster_sizes();
  const count_t from_size = time_sizes[static_cast<std::size_t>(from)] - 1;
  const count_t target_size = time_sizes[static_cast<std::size_t>(target)] + 1;

  StableSum emission;
  for (int p = 0; p < K; ++p) {
    const int q0 = undirected ? p : 0;
    for (int q = q0; q < K; ++q) {
      const count_t w = agg[static_cast<std::size_t>(p) * K + q];
      const count_t vol = block_pair_volume(stats_.mode, node_sizes[static_cast<std::size_t>(p)],
                                            node_sizes[static_cast<std::size_t>(q)], p == q);
      const std::size_t idx_from = stats_.index(p, q, from);
      const std::size_t idx_to = stats_.index(p, q, target);
      emission.add(block_term(stats_.s_flat[idx_from] - w, vol * from_size) - terms_[idx_from]);
      emission.add(block_term(stats_.s_flat[idx_to] + w, vol * target_size) - terms_[idx_to]);
    }
  }

  const double uf = time_sizes[static_cast<std::size_t>(from)];
  const double ut = time_sizes[static_cast<std::size_t>(target)];
  const double label = log_gamma(uf - 1 + h_.gamma) + log_gamma(ut + 1 + h_.gamma) -
                       log_gamma(uf + h_.gamma) - log_gamma(ut + h_.gamma);
  return {emission.value(), label};
}

double IclState::delta_time_move(int bin, int target) const {
  check_time_move(bin, target);
  const auto agg = detail::gather_bin_aggregates(*tensor_, c_, bin);
  return time_move_delta(bin, target, agg).total();
}

IclState::MoveDelta IclState::merge_delta(Axis axis, int keep, int absorb) const {
  const int K = c_.num_clusters();
  const int D = y_.num_clusters();
  const bool undirected = stats_.mode == Mode::undirected;
  if (keep == absorb) {
    throw std::invalid_argument("merge needs two distinct clusters");
  }
  const int limit = axis == Axis::node ? K : D;
  if (keep < 0 || keep >= limit || absorb < 0 || absorb >= limit) {
    throw std::invalid_argument("merge cluster out of range");
  }

  StableSum emission;
  const auto& node_sizes = c_.cluster_sizes();
  const auto& time_sizes = y_.cluster_sizes();

  if (axis == Axis::node) {
    // all old blocks whose row or column touches either cluster disappear
    detail::for_each_pair_touching(K, stats_.mode, keep, absorb, [&](int p, int q) {
      for (int d = 0; d < D; ++d) {
        emission.add(-terms_[stats_.index(p, q, d)]);
      }
    });
    // blocks of the merged cluster
    const count_t merged_size = node_sizes[static_cast<std::size_t>(keep)] +
                                node_sizes[static_cast<std::size_t>(absorb)];
    auto canon_s = [&](int k, int g, int d) {
      if (undirected && k > g) std::swap(k, g);
      return stats_.s_flat[stats_.index(k, g, d)];
    };
    for (int q = 0; q < K; ++q) {
      if (q == keep || q == absorb) continue;
      const count_t vol =
          block_pair_volume(stats_.mode, merged_size,
                            node_sizes[static_cast<std::size_t>(q)], false);
      for (int d = 0; d < D; ++d) {
        const count_t s_row = canon_s(keep, q, d) + canon_s(absorb, q, d);
        emission.add(block_term(s_row, vol * time_sizes[static_cast<std::size_t>(d)]));
        if (!undirected) {
          const count_t s_col = canon_s(q, keep, d) + canon_s(q, absorb, d);
          emission.add(block_term(s_col, vol * time_sizes[static_cast<std::size_t>(d)]));
        }
      }
    }
    const count_t diag_vol = block_pair_volume(stats_.mode, merged_size, merged_size, true);
    for (int d = 0; d < D; ++d) {
      count_t s_diag = canon_s(keep, keep, d) + canon_s(absorb, absorb, d) +
                       canon_s(keep, absorb, d);
      if (!undirected) s_diag += canon_s(absorb, keep, d);
      emission.add(block_term(s_diag, diag_vol * time_sizes[static_cast<std::size_t>(d)]));
    }

    const double nk = node_sizes[static_cast<std::size_t>(keep)];
    const double nl = node_sizes[static_cast<std::size_t>(absorb)];
    const double n = c_.size();
    const double label =
        log_gamma(h_.alpha * (K - 1)) - log_gamma(h_.alpha * K) + log_gamma(h_.alpha) -
        log_gamma(n + h_.alpha * (K - 1)) + log_gamma(n + h_.alpha * K) +
        log_gamma(nk + nl + h_.alpha) - log_gamma(nk + h_.alpha) - log_gamma(nl + h_.alpha);
    return {emission.value(), label};
  }

  // time axis: old columns `keep` and `absorb` are replaced by their union
  const count_t merged_size = time_sizes[static_cast<std::size_t>(keep)] +
                              time_sizes[static_cast<std::size_t>(absorb)];
  for (int p = 0; p < K; ++p) {
    const int q0 = undirected ? p : 0;
    for (int q = q0; q < K; ++q) {
      const count_t vol = block_pair_volume(stats_.mode, node_sizes[static_cast<std::size_t>(p)],
                                            node_sizes[static_cast<std::size_t>(q)], p == q);
      const std::size_t idx_keep = stats_.index(p, q, keep);
      const std::size_t idx_absorb = stats_.index(p, q, absorb);
      emission.add(-terms_[idx_keep]);
      emission.add(-terms_[idx_absorb]);
      emission.add(block_term(stats_.s_flat[idx_keep] + stats_.s_flat[idx_absorb],
                              vol * merged_size));
    }
  }

  const double uk = time_sizes[static_cast<std::size_t>(keep)];
  const double ul = time_sizes[static_cast<std::size_t>(absorb)];
  const double u = y_.size();
  const double label =
      log_gamma(h_.gamma * (D - 1)) - log_gamma(h_.gamma * D) + log_gamma(h_.gamma) -
      log_gamma(u + h_.gamma * (D - 1)) + log_gamma(u + h_.gamma * D) +
      log_gamma(uk + ul + h_.gamma) - log_gamma(uk + h_.gamma) - log_gamma(ul + h_.gamma);
  return {emission.value(), label};
}

double IclState::delta_merge(Axis axis, int keep, int absorb) const {
  return merge_delta(axis, keep, absorb).total();
}

double IclState::apply_node_move(int node, int target) {
  check_node_move(node, target);
  const int from = c_.label(node);
  const auto agg = detail::gather_node_aggregates(*tensor_, c_, y_, node);
  const MoveDelta delta = node_move_delta(node, target, agg);

  detail::apply_node_shift(stats_, agg, from, -1);
  detail::apply_node_shift(stats_, agg, target, +1);
  c_.move(node, target);

  // refresh volumes and cached terms on the touched rows/columns
  const int K = c_.num_clusters();
  const int D = y_.num_clusters();
  const auto& sizes = c_.cluster_sizes();
  const auto& time_sizes = y_.cluster_sizes();
  detail::for_each_pair_touching(K, stats_.mode, from, target, [&](int p, int q) {
    const count_t vol = block_pair_volume(stats_.mode, sizes[static_cast<std::size_t>(p)],
                                          sizes[static_cast<std::size_t>(q)], p == q);
    for (int d = 0; d < D; ++d) {
      const std::size_t idx = stats_.index(p, q, d);
      stats_.r_flat[idx] = vol * time_sizes[static_cast<std::size_t>(d)];
      terms_[idx] = block_term(stats_.s_flat[idx], stats_.r_flat[idx]);
    }
  });

  emission_run_ += delta.emission;
  label_run_ += delta.label;
  return delta.total();
}

double IclState::apply_time_move(int bin, int target) {
  check_time_move(bin, target);
  const int from = y_.label(bin);
  const auto agg = detail::gather_bin_aggregates(*tensor_, c_, bin);
  const MoveDelta delta = time_move_delta(bin, target, agg);

  const int K = c_.num_clusters();
  y_.move(bin, target);
  const auto& node_sizes = c_.cluster_sizes();
  const auto& time_sizes = y_.cluster_sizes();
  for (int p = 0; p < K; ++p) {
    const int q0 = stats_.mode == Mode::undirected ? p : 0;
    for (int q = q0; q < K; ++q) {
      const count_t w = agg[static_cast<std::size_t>(p) * K + q];
      const count_t vol = block_pair_volume(stats_.mode, node_sizes[static_cast<std::size_t>(p)],
                                            node_sizes[static_cast<std::size_t>(q)], p == q);
      const std::size_t idx_from = stats_.index(p, q, from);
      const std::size_t idx_to = stats_.index(p, q, target);
      stats_.s_flat[idx_from] -= w;
      stats_.s_flat[idx_to] += w;
      stats_.r_flat[idx_from] = vol * time_sizes[static_cast<std::size_t>(from)];
      stats_.r_flat[idx_to] = vol * time_sizes[static_cast<std::size_t>(target)];
      terms_[idx_from] = block_term(stats_.s_flat[idx_from], stats_.r_flat[idx_from]);
      terms_[idx_to] = block_term(stats_.s_flat[idx_to], stats_.r_flat[idx_to]);
    }
  }

  emission_run_ += delta.emission;
  label_run_ += delta.label;
  return delta.total();
}

double IclState::apply_merge(Axis axis, int keep, int absorb) {
  const MoveDelta delta = merge_delta(axis, keep, absorb);
  const int K = c_.num_clusters();
  const int D = y_.num_clusters();
  const bool undirected = stats_.mode == Mode::undirected;

  // same relabeling as Partition::merge: absorb joins keep, labels above
  // absorb shift down (including keep itself when keep > absorb)
  auto new_label = [&](int x) {
    if (x == absorb) x = keep;
    return x > absorb ? x - 1 : x;
  };

  BlockStats next;
  next.mode = stats_.mode;
  next.log_fact_const = stats_.log_fact_const;
  if (axis == Axis::node) {
    next.num_node_clusters = K - 1;
    next.num_time_clusters = D;
    next.s_flat.assign(static_cast<std::size_t>(K - 1) * (K - 1) * D, 0);
    next.r_flat.assign(next.s_flat.size(), 0);
    for (int p = 0; p < K; ++p) {
      const int q0 = undirected ? p : 0;
      for (int q = q0; q < K; ++q) {
        int np = new_label(p);
        int nq = new_label(q);
        if (undirected && np > nq) std::swap(np, nq);
        for (int d = 0; d < D; ++d) {
          next.s_flat[next.index(np, nq, d)] += stats_.s_flat[stats_.index(p, q, d)];
        }
      }
    }
    c_.merge(keep, absorb);
  } else {
    next.num_node_clusters = K;
    next.num_time_clusters = D - 1;
    next.s_flat.assign(static_cast<std::size_t>(K) * K * (D - 1), 0);
    next.r_flat.assign(next.s_flat.size(), 0);
    for (int p = 0; p < K; ++p) {
      const int q0 = undirected ? p : 0;
      for (int q = q0; q < K; ++q) {
        for (int d = 0; d < D; ++d) {
          next.s_flat[next.index(p, q, new_label(d))] += stats_.s_flat[stats_.index(p, q, d)];
        }
      }
    }
    y_.merge(keep, absorb);
  }
  stats_ = std::move(next);
  rebuild_terms();

  emission_run_ += delta.emission;
  label_run_ += delta.label;
  return delta.total();
}

void IclState::rebuild_terms() {
  const int K = stats_.num_node_clusters;
  const int D = stats_.num_time_clusters;
  const auto& node_sizes = c_.cluster_sizes();
  const auto& time_sizes = y_.cluster_sizes();
  terms_.assign(static_cast<std::size_t>(K) * K * D, 0.0);
  for (int p = 0; p < K; ++p) {
    const int q0 = stats_.mode == Mode::undirected ? p : 0;
    for (int q = q0; q < K; ++q) {
      const count_t vol = block_pair_volume(stats_.mode, node_sizes[static_cast<std::size_t>(p)],
                                            node_sizes[static_cast<std::size_t>(q)], p == q);
      for (int d = 0; d < D; ++d) {
        const std::size_t idx = stats_.index(p, q, d);
        stats_.r_flat[idx] = vol * time_sizes[static_cast<std::size_t>(d)];
        terms_[idx] = block_term(stats_.s_flat[idx], stats_.r_flat[idx]);
      }
    }
  }
}

IclValue IclState::recompute() const {
  return icl(*tensor_, c_, y_, h_);
}

}  // namespace nssbm
