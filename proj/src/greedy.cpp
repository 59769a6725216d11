#include "nssbm/greedy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace nssbm {

namespace {

// final reported ICL must match a from-scratch evaluation this closely
constexpr double kRevalidationTolerance = 1e-6;

}  // namespace

void SearchConfig::validate() const {
  if (k_max < 1 || d_max < 1) {
    throw std::invalid_argument("k_max and d_max must be positive");
  }
  if (max_sweeps < 1) {
    throw std::invalid_argument("max_sweeps must be positive");
  }
  if (!(improvement_epsilon >= 0.0)) {
    throw std::invalid_argument("improvement_epsilon must be non-negative");
  }
  if (num_restarts < 1) {
    throw std::invalid_argument("num_restarts must be positive");
  }
  if (num_threads < 0) {
    throw std::invalid_argument("num_threads must be non-negative");
  }
}

const char* move_kind_name(MoveKind kind) {
  switch (kind) {
    case MoveKind::node_move: return "node_move";
    case MoveKind::time_move: return "time_move";
    case MoveKind::node_merge: return "node_merge";
    case MoveKind::time_merge: return "time_merge";
  }
  return "unknown";
}

std::vector<std::int32_t> random_labels(int num_elements, int num_clusters, Rng& rng) {
  if (num_clusters < 1 || num_clusters > num_elements) {
    throw std::invalid_argument("cluster count must be in [1, num_elements]");
  }
  std::vector<std::int32_t> labels(static_cast<std::size_t>(num_elements));
  std::vector<std::int32_t> sizes(static_cast<std::size_t>(num_clusters), 0);
  for (auto& lab : labels) {
    lab = static_cast<std::int32_t>(rng.uniform_below(static_cast<std::uint32_t>(num_clusters)));
    sizes[static_cast<std::size_t>(lab)]++;
  }
  for (int k = 0; k < num_clusters; ++k) {
    while (sizes[static_cast<std::size_t>(k)] == 0) {
      const int i = static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(num_elements)));
      const std::int32_t old = labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(old)] < 2) continue;
      sizes[static_cast<std::size_t>(old)]--;
      labels[static_cast<std::size_t>(i)] = k;
      sizes[static_cast<std::size_t>(k)]++;
    }
  }
  return labels;
}

namespace {

// best strictly-improving action for one element; ties go to the lowest
// target index because candidates are scanned in ascending order
struct Candidate {
  int target = -1;
  double delta = 0.0;
};

bool sweep_element(SearchState& s, Axis axis, int element) {
  IclState& st = s.icl;
  const Partition& part = axis == Axis::node ? st.node_partition() : st.time_partition();
  const int num_clusters = part.num_clusters();
  if (num_clusters < 2) return false;

  const int from = part.label(element);
  const bool singleton = part.cluster_sizes()[static_cast<std::size_t>(from)] == 1;

  Candidate best;
  for (int target = 0; target < num_clusters; ++target) {
    if (target == from) continue;
    double delta;
    if (singleton) {
      delta = st.delta_merge(axis, target, from);
    } else {
      delta = axis == Axis::node ? st.delta_node_move(element, target)
                                 : st.delta_time_move(element, target);
    }
    if (best.target < 0 || delta > best.delta) {
      best = {target, delta};
    }
  }
  if (best.target < 0 || !(best.delta > s.improvement_epsilon)) return false;

  double applied;
  MoveKind kind;
  if (singleton) {
    applied = st.apply_merge(axis, best.target, from);
    kind = axis == Axis::node ? MoveKind::node_merge : MoveKind::time_merge;
  } else if (axis == Axis::node) {
    applied = st.apply_node_move(element, best.target);
    kind = MoveKind::node_move;
  } else {
    applied = st.apply_time_move(element, best.target);
    kind = MoveKind::time_move;
  }
  s.trace.push_back({s.sweep, kind, applied, st.value().total});
  return true;
}

bool sweep_axis(SearchState& s, Axis axis) {
  const int n = axis == Axis::node ? s.icl.tensor().num_nodes() : s.icl.tensor().num_bins();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  s.rng.shuffle(order);

  bool improved = false;
  for (int element : order) {
    improved |= sweep_element(s, axis, element);
  }
  return improved;
}

}  // namespace

bool node_sweep(SearchState& s) { return sweep_axis(s, Axis::node); }

bool time_sweep(SearchState& s) { return sweep_axis(s, Axis::time); }

bool merge_phase(SearchState& s, Axis axis) {
  IclState& st = s.icl;
  bool improved = false;
  for (;;) {
    const int count =
        axis == Axis::node ? st.num_node_clusters() : st.num_time_clusters();
    if (count < 2) break;

    int best_keep = -1;
    int best_absorb = -1;
    double best_delta = 0.0;
    for (int j = 0; j + 1 < count; ++j) {
      for (int l = j + 1; l < count; ++l) {
        const double delta = st.delta_merge(axis, j, l);
        if (best_keep < 0 || delta > best_delta) {
          best_keep = j;
          best_absorb = l;
          best_delta = delta;
        }
      }
    }
    if (!(best_delta > s.improvement_epsilon)) break;

    const double applied = st.apply_merge(axis, best_keep, best_absorb);
    s.trace.push_back({s.sweep,
                       axis == Axis::node ? MoveKind::node_merge : MoveKind::time_merge,
                       applied, st.value().total});
    improved = true;
  }
  return improved;
}

namespace {

FitResult run_restart(const InteractionTensor& tensor, const Hyperparameters& h,
                      const SearchConfig& cfg, int restart, int k_init, int d_init) {
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
  auto node_labels = random_labels(tensor.num_nodes(), k_init, rng);
  auto time_labels = random_labels(tensor.num_bins(), d_init, rng);

  SearchState s{IclState(tensor, NodePartition(std::move(node_labels), k_init),
                         TimePartition(std::move(time_labels), d_init), h),
                std::move(rng), cfg.improvement_epsilon, 0, {}};

  for (s.sweep = 1; s.sweep <= cfg.max_sweeps; ++s.sweep) {
    bool any = node_sweep(s);
    any = time_sweep(s) || any;
    any = merge_phase(s, Axis::node) || any;
    any = merge_phase(s, Axis::time) || any;
    if (!any) break;
  }

  const IclValue fresh = s.icl.recompute();
  const double drift = std::fabs(fresh.total - s.icl.value().total);
  if (!(drift <= kRevalidationTolerance)) {
    throw std::runtime_error("incremental ICL drifted from full recompute by " +
                             std::to_string(drift));
  }

  FitResult result;
  result.node_partition = s.icl.node_partition();
  result.time_partition = s.icl.time_partition();
  result.num_node_clusters = result.node_partition.num_clusters();
  result.num_time_clusters = result.time_partition.num_clusters();
  result.icl = fresh;
  result.rates = posterior_rates(s.icl.stats(), h);
  result.trace = std::move(s.trace);
  result.restart_id = restart;
  result.revalidation_error = drift;
  return result;
}

int resolve_threads(const SearchConfig& cfg) {
  int threads = cfg.num_threads;
  if (threads == 0) {
    if (const char* env = std::getenv("NSSBM_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::clamp(threads, 1, cfg.num_restarts);
}

}  // namespace

FitResult greedy_fit(const InteractionTensor& tensor, const Hyperparameters& h,
                     const SearchConfig& cfg) {
  h.validate();
  cfg.validate();
  const int k_init = std::min(cfg.k_max, tensor.num_nodes());
  const int d_init = std::min(cfg.d_max, tensor.num_bins());

  std::vector<std::optional<FitResult>> results(static_cast<std::size_t>(cfg.num_restarts));
  const int threads = resolve_threads(cfg);

  if (threads == 1) {
    for (int r = 0; r < cfg.num_restarts; ++r) {
      results[static_cast<std::size_t>(r)] = run_restart(tensor, h, cfg, r, k_init, d_init);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= cfg.num_restarts) return;
        try {
          results[static_cast<std::size_t>(r)] = run_restart(tensor, h, cfg, r, k_init, d_init);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  int winner = 0;
  for (int r = 1; r < cfg.num_restarts; ++r) {
    if (results[static_cast<std::size_t>(r)]->icl.total >
        results[static_cast<std::size_t>(winner)]->icl.total) {
      winner = r;
    }
  }
  return std::move(*results[static_cast<std::size_t>(winner)]);
}

}  // namespace nssbm
