#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nssbm/numerics.hpp"
#include "nssbm/rng.hpp"
#include "nssbm/tensor.hpp"
#include "support/oracles.hpp"

using namespace nssbm;

TEST_CASE("build_tensor stores the contact-table row") {
  const std::vector<EventRecord> records = {{52, 26, 5, 16}};
  const InteractionTensor t = build_tensor(records, 113, 96, Mode::undirected);
  REQUIRE(t.entries().size() == 1);
  CHECK(t.entries()[0].source == 26);  // canonical order
  CHECK(t.entries()[0].target == 52);
  CHECK(t.entries()[0].bin == 5);
  CHECK(t.entries()[0].count == 16);
  CHECK(t.total_count() == 16);
}

TEST_CASE("build_tensor handles empty input") {
  const InteractionTensor t = build_tensor({}, 1, 1, Mode::directed);
  CHECK(t.total_count() == 0);
  CHECK(t.entries().empty());
}

TEST_CASE("build_tensor merges canonicalized duplicates") {
  const std::vector<EventRecord> records = {{0, 1, 0, 2}, {1, 0, 0, 3}};
  const InteractionTensor t = build_tensor(records, 2, 1, Mode::undirected);
  REQUIRE(t.entries().size() == 1);
  CHECK(t.entries()[0].source == 0);
  CHECK(t.entries()[0].target == 1);
  CHECK(t.entries()[0].count == 5);
}

TEST_CASE("build_tensor drops zero counts and validates input") {
  CHECK(build_tensor({{{0, 0, 0, 0}}}, 1, 1, Mode::directed).total_count() == 0);
  CHECK_THROWS_AS(build_tensor({{{5, 0, 0, 1}}}, 2, 1, Mode::directed), std::out_of_range);
  CHECK_THROWS_AS(build_tensor({{{0, 0, 2, 1}}}, 1, 2, Mode::directed), std::out_of_range);
  CHECK_THROWS_AS(build_tensor({{{0, 1, 0, -3}}}, 2, 1, Mode::directed), std::out_of_range);
  CHECK_THROWS_AS(build_tensor({{{1, 1, 0, 1}}}, 2, 1, Mode::undirected), std::invalid_argument);
  // directed mode keeps self loops
  CHECK(build_tensor({{{1, 1, 0, 4}}}, 2, 1, Mode::directed).total_count() == 4);
}

TEST_CASE("bound errors name the offending record") {
  try {
    build_tensor({{{0, 7, 3, 1}}}, 2, 4, Mode::directed);
    FAIL("expected out_of_range");
  } catch (const std::out_of_range& e) {
    const std::string what = e.what();
    CHECK(what.find("record #0") != std::string::npos);
    CHECK(what.find('7') != std::string::npos);
  }
}

TEST_CASE("compute_block_stats on a two-node directed tensor") {
  const InteractionTensor t =
      build_tensor({{{0, 1, 0, 3}, {1, 0, 0, 2}}}, 2, 1, Mode::directed);

  SUBCASE("single block sums everything") {
    const BlockStats stats =
        compute_block_stats(t, NodePartition::single_cluster(2), TimePartition::single_cluster(1));
    CHECK(stats.s(0, 0, 0) == 5);
    CHECK(stats.r(0, 0, 0) == 4);
    CHECK(stats.log_fact_const ==
          doctest::Approx(std::log(6.0) + std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("one node per cluster") {
    const BlockStats stats = compute_block_stats(t, NodePartition({0, 1}, 2),
                                                 TimePartition::single_cluster(1));
    CHECK(stats.s(0, 1, 0) == 3);
    CHECK(stats.s(1, 0, 0) == 2);
    CHECK(stats.s(0, 0, 0) == 0);
    CHECK(stats.s(1, 1, 0) == 0);
    for (int k = 0; k < 2; ++k) {
      for (int g = 0; g < 2; ++g) {
        CHECK(stats.r(k, g, 0) == 1);
      }
    }
  }
}

TEST_CASE("conservation: block sums equal the tensor total") {
  Rng rng(1234);
  for (Mode mode : {Mode::directed, Mode::undirected}) {
    for (int rep = 0; rep < 10; ++rep) {
      const InteractionTensor t = oracles::random_tensor(rng, 5, 4, mode, 1.3);
      const int k_num = 1 + static_cast<int>(rng.uniform_below(4));
      const int d_num = 1 + static_cast<int>(rng.uniform_below(3));
      const NodePartition c(oracles::random_full_labels(rng, 5, k_num), k_num);
      const TimePartition y(oracles::random_full_labels(rng, 4, d_num), d_num);
      const BlockStats stats = compute_block_stats(t, c, y);
      CHECK(stats.total() == t.total_count());
      // spot-check one block against direct summation over cells
      const int k = static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(k_num)));
      const int g = static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(k_num)));
      const int d = static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(d_num)));
      CHECK(stats.s(k, g, d) == oracles::brute_force_block_sum(t, c, y, k, g, d));
    }
  }
}

TEST_CASE("cell volumes follow the mode") {
  Rng rng(99);
  const InteractionTensor t = oracles::random_tensor(rng, 6, 3, Mode::undirected, 0.8);
  const NodePartition c({0, 0, 0, 1, 1, 2}, 3);
  const TimePartition y({0, 1, 1}, 2);
  const BlockStats stats = compute_block_stats(t, c, y);
  CHECK(stats.r(0, 0, 0) == 3);       // C(3,2) * 1
  CHECK(stats.r(0, 0, 1) == 6);       // C(3,2) * 2
  CHECK(stats.r(0, 1, 0) == 6);       // 3*2 * 1
  CHECK(stats.r(1, 0, 0) == 6);       // accessor canonicalizes
  CHECK(stats.r(2, 2, 1) == 0);       // singleton cluster has no pairs
  CHECK(stats.r(1, 2, 1) == 4);       // 2*1 * 2

  const InteractionTensor td = oracles::random_tensor(rng, 6, 3, Mode::directed, 0.8);
  const BlockStats sd = compute_block_stats(td, c, y);
  CHECK(sd.r(0, 0, 0) == 9);   // 3*3 * 1
  CHECK(sd.r(2, 2, 1) == 2);   // 1*1 * 2
  CHECK(sd.r(1, 0, 1) == 12);  // 2*3 * 2
}

TEST_CASE("stats_after_node_move equals full recompute") {
  Rng rng(777);
  for (Mode mode : {Mode::directed, Mode::undirected}) {
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 4 + static_cast<int>(rng.uniform_below(5));
      const int u = 2 + static_cast<int>(rng.uniform_below(4));
      const InteractionTensor t = oracles::random_tensor(rng, n, u, mode, 1.1);
      // keep at least one non-singleton node cluster
      const int k_num = 2 + static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(n - 2)));
      const int d_num = 1 + static_cast<int>(rng.uniform_below(2));
      NodePartition c(oracles::random_full_labels(rng, n, k_num), k_num);
      TimePartition y(oracles::random_full_labels(rng, u, d_num), d_num);
      const BlockStats before = compute_block_stats(t, c, y);

      // pick a movable node
      int node = -1;
      for (int i = 0; i < n; ++i) {
        if (c.cluster_sizes()[static_cast<std::size_t>(c.label(i))] > 1) {
          node = i;
          break;
        }
      }
      REQUIRE(node >= 0);
      const int target = (c.label(node) + 1) % k_num;
      const BlockStats moved = stats_after_node_move(before, t, c, y, node, target);

      NodePartition c2 = c;
      c2.move(node, target);
      const BlockStats fresh = compute_block_stats(t, c2, y);
      CHECK(moved.s_flat == fresh.s_flat);
      CHECK(moved.r_flat == fresh.r_flat);
      CHECK(moved.log_fact_const == fresh.log_fact_const);
    }
  }
}

TEST_CASE("stats_after_time_move equals full recompute") {
  Rng rng(778);
  for (Mode mode : {Mode::directed, Mode::undirected}) {
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 3 + static_cast<int>(rng.uniform_below(4));
      const int u = 3 + static_cast<int>(rng.uniform_below(4));
      const InteractionTensor t = oracles::random_tensor(rng, n, u, mode, 1.1);
      const int k_num = 1 + static_cast<int>(rng.uniform_below(3));
      // keep at least one non-singleton time cluster
      const int d_num =
          2 + static_cast<int>(rng.uniform_below(std::min<std::uint32_t>(
                  2, static_cast<std::uint32_t>(u - 2))));
      NodePartition c(oracles::random_full_labels(rng, n, k_num), k_num);
      TimePartition y(oracles::random_full_labels(rng, u, d_num), d_num);
      const BlockStats before = compute_block_stats(t, c, y);

      int bin = -1;
      for (int b = 0; b < u; ++b) {
        if (y.cluster_sizes()[static_cast<std::size_t>(y.label(b))] > 1) {
          bin = b;
          break;
        }
      }
      REQUIRE(bin >= 0);
      const int target = (y.label(bin) + 1) % d_num;
      const BlockStats moved = stats_after_time_move(before, t, c, y, bin, target);

      TimePartition y2 = y;
      y2.move(bin, target);
      const BlockStats fresh = compute_block_stats(t, c, y2);
      CHECK(moved.s_flat == fresh.s_flat);
      CHECK(moved.r_flat == fresh.r_flat);
    }
  }
}

TEST_CASE("moves refuse to empty a cluster") {
  const InteractionTensor t = build_tensor({{{0, 1, 0, 1}}}, 3, 2, Mode::directed);
  const NodePartition c({0, 1, 1}, 2);
  const TimePartition y({0, 1}, 2);
  const BlockStats stats = compute_block_stats(t, c, y);
  CHECK_THROWS_AS(stats_after_node_move(stats, t, c, y, 0, 1), empty_cluster_error);
  CHECK_THROWS_AS(stats_after_time_move(stats, t, c, y, 0, 1), empty_cluster_error);
  CHECK_THROWS_AS(stats_after_node_move(stats, t, c, y, 1, 1), std::invalid_argument);
}

TEST_CASE("moving a zero-degree node changes volumes only") {
  // nodes 2 and 3 have no interactions; node 3 moves from cluster 1 to 0
  const InteractionTensor t = build_tensor({{{0, 1, 0, 7}}}, 4, 1, Mode::directed);
  const NodePartition c({0, 0, 1, 1}, 2);
  const TimePartition y = TimePartition::single_cluster(1);
  const BlockStats before = compute_block_stats(t, c, y);
  const BlockStats moved = stats_after_node_move(before, t, c, y, 3, 0);
  CHECK(moved.s_flat == before.s_flat);
  CHECK(moved.r(0, 0, 0) == 9);  // sizes (3, 1) after the move
  CHECK(moved.r(0, 1, 0) == 3);
  CHECK(moved.r(1, 0, 0) == 3);
  CHECK(moved.r(1, 1, 0) == 1);
}

TEST_CASE("moving an all-zero bin shifts volumes between time clusters") {
  // bin 2 is empty; move it from time cluster 1 to 0
  const InteractionTensor t = build_tensor({{{0, 1, 0, 4}, {0, 1, 1, 2}}}, 2, 3, Mode::directed);
  const NodePartition c = NodePartition::single_cluster(2);
  const TimePartition y({0, 1, 1}, 2);
  const BlockStats before = compute_block_stats(t, c, y);
  const BlockStats moved = stats_after_time_move(before, t, c, y, 2, 0);
  CHECK(moved.s_flat == before.s_flat);
  CHECK(moved.r(0, 0, 0) == 8);  // |A_0||A_0| * |C_0| = 4 * 2
  CHECK(moved.r(0, 0, 1) == 4);
}

TEST_CASE("log_fact_const is invariant under relabeling and moves") {
  Rng rng(555);
  const InteractionTensor t = oracles::random_tensor(rng, 6, 4, Mode::directed, 1.5);
  const NodePartition c1(oracles::random_full_labels(rng, 6, 3), 3);
  const TimePartition y1(oracles::random_full_labels(rng, 4, 2), 2);
  const BlockStats s1 = compute_block_stats(t, c1, y1);

  // permute cluster ids
  std::vector<std::int32_t> perm_labels(c1.labels());
  for (auto& lab : perm_labels) lab = (lab + 1) % 3;
  const BlockStats s2 =
      compute_block_stats(t, NodePartition(perm_labels, 3), y1);
  CHECK(s1.log_fact_const == s2.log_fact_const);
  CHECK(s1.total() == s2.total());
}

TEST_CASE("label permutation permutes S and R identically") {
  Rng rng(556);
  const InteractionTensor t = oracles::random_tensor(rng, 6, 4, Mode::directed, 1.2);
  const std::vector<std::int32_t> labels = oracles::random_full_labels(rng, 6, 3);
  const TimePartition y(oracles::random_full_labels(rng, 4, 2), 2);

  const int perm[3] = {2, 0, 1};
  std::vector<std::int32_t> permuted(labels);
  for (auto& lab : permuted) lab = perm[lab];

  const BlockStats a = compute_block_stats(t, NodePartition(labels, 3), y);
  const BlockStats b = compute_block_stats(t, NodePartition(permuted, 3), y);
  for (int k = 0; k < 3; ++k) {
    for (int g = 0; g < 3; ++g) {
      for (int d = 0; d < 2; ++d) {
        CHECK(a.s(k, g, d) == b.s(perm[k], perm[g], d));
        CHECK(a.r(k, g, d) == b.r(perm[k], perm[g], d));
      }
    }
  }
}

TEST_CASE("incremental move chains agree with fresh stats exactly") {
  Rng rng(4242);
  for (Mode mode : {Mode::directed, Mode::undirected}) {
    const InteractionTensor t = oracles::random_tensor(rng, 8, 5, mode, 1.4);
    NodePartition c(oracles::random_full_labels(rng, 8, 3), 3);
    TimePartition y(oracles::random_full_labels(rng, 5, 2), 2);
    BlockStats stats = compute_block_stats(t, c, y);

    for (int step = 0; step < 40; ++step) {
      if (step % 2 == 0) {
        const int node = static_cast<int>(rng.uniform_below(8));
        const int from = c.label(node);
        if (c.cluster_sizes()[static_cast<std::size_t>(from)] == 1) continue;
        const int target = (from + 1 + static_cast<int>(rng.uniform_below(2))) % 3;
        if (target == from) continue;
        stats = stats_after_node_move(stats, t, c, y, node, target);
        c.move(node, target);
      } else {
        const int bin = static_cast<int>(rng.uniform_below(5));
        const int from = y.label(bin);
        if (y.cluster_sizes()[static_cast<std::size_t>(from)] == 1) continue;
        const int target = 1 - from;
        stats = stats_after_time_move(stats, t, c, y, bin, target);
        y.move(bin, target);
      }
    }
    const BlockStats fresh = compute_block_stats(t, c, y);
    CHECK(stats.s_flat == fresh.s_flat);
    CHECK(stats.r_flat == fresh.r_flat);
  }
}

TEST_CASE("partition merge relabels consistently in both directions") {
  Partition p({0, 1, 2, 2, 1, 0}, 3);

  SUBCASE("absorb above keep") {
    p.merge(0, 2);
    CHECK(p.num_clusters() == 2);
    CHECK(p.labels() == std::vector<std::int32_t>{0, 1, 0, 0, 1, 0});
    CHECK(p.cluster_sizes() == std::vector<std::int32_t>{4, 2});
  }
  SUBCASE("absorb below keep") {
    p.merge(2, 0);
    CHECK(p.num_clusters() == 2);
    // cluster 0 joins cluster 2; former clusters 1,2 shift to 0,1
    CHECK(p.labels() == std::vector<std::int32_t>{1, 0, 1, 1, 0, 1});
    CHECK(p.cluster_sizes() == std::vector<std::int32_t>{2, 4});
  }
}

TEST_CASE("partition constructor rejects empty clusters and bad labels") {
  CHECK_THROWS_AS(Partition({0, 0, 2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(Partition({0, 3}, 3), std::invalid_argument);
  CHECK_THROWS_AS(Partition({-1, 0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(Partition({}, 1), std::invalid_argument);
  const Partition ok({1, 0, 1}, 2);
  CHECK(ok.cluster_sizes() == std::vector<std::int32_t>{1, 2});
}

TEST_CASE("hyperparameters must be positive") {
  Hyperparameters h;
  h.validate();
  h.b = 0.0;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.b = 1.0;
  h.delta = -2.0;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}
