#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nssbm/ingest.hpp"
#include "support/oracles.hpp"

using namespace nssbm;

namespace {

ParsedContactLog parse_str(const std::string& text) {
  std::istringstream in(text);
  return parse_contact_log(in);
}

}  // namespace

TEST_CASE("parsing maps raw ids in first-appearance order") {
  const auto log = parse_str("60 100 101\n");
  REQUIRE(log.events.size() == 1);
  CHECK(log.events[0].timestamp == 60);
  CHECK(log.events[0].person_a == 100);
  CHECK(log.events[0].person_b == 101);
  CHECK(log.nodes.dense_to_raw == std::vector<std::int64_t>{100, 101});
  CHECK(log.nodes.raw_to_dense.at(100) == 0);
  CHECK(log.nodes.raw_to_dense.at(101) == 1);
}

TEST_CASE("comments and blank lines are skipped") {
  const auto log = parse_str("# header\n\n  # indented comment\n\t\n");
  CHECK(log.events.empty());
  CHECK(log.nodes.size() == 0);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_str("60 100 100\n"), doctest::Contains("line 1"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_str("60 100 101\nbroken\n"), doctest::Contains("line 2"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_str("60 100 101 7\n"), doctest::Contains("line 1"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_str("60 0 101\n"), doctest::Contains("positive"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_str("60 -4 101\n"), doctest::Contains("positive"),
                       std::runtime_error);
}

TEST_CASE("aggregation reproduces the worked contact example") {
  // 16 contact records for one pair inside bin 5 (i.e. about 5m30s of contact)
  std::ostringstream text;
  const std::int64_t origin = 0;
  for (int i = 0; i < 16; ++i) {
    text << (5 * 900 + 20 * i) << " 52 26\n";
  }
  const auto log = parse_str(text.str());
  const auto agg = aggregate_bins(log.events, log.nodes, {origin, 900, 96, true});
  CHECK(agg.tensor.total_count() == 16);
  REQUIRE(agg.tensor.entries().size() == 1);
  const TensorEntry e = agg.tensor.entries()[0];
  CHECK(e.bin == 5);
  CHECK(e.count == 16);
  // dense ids in first-appearance order: 52 -> 0, 26 -> 1; stored canonically
  CHECK(e.source == 0);
  CHECK(e.target == 1);
  CHECK(agg.dropped == 0);
}

TEST_CASE("bin boundaries are half-open") {
  const auto log = parse_str("1800 1 2\n1799 3 4\n");
  const auto agg = aggregate_bins(log.events, log.nodes, {0, 900, 4, true});
  std::vector<int> bins;
  for (const TensorEntry& e : agg.tensor.entries()) bins.push_back(e.bin);
  std::sort(bins.begin(), bins.end());
  CHECK(bins == std::vector<int>{1, 2});  // t=1799 -> bin 1, t=1800 -> bin 2
}

TEST_CASE("empty event list gives an all-zero tensor") {
  const auto log = parse_str("");
  const auto agg = aggregate_bins(log.events, log.nodes, {0, 900, 8, true});
  CHECK(agg.tensor.total_count() == 0);
  CHECK(agg.tensor.num_bins() == 8);
}

TEST_CASE("out-of-range events: dropped or fatal") {
  const auto log = parse_str("100 1 2\n-5 1 2\n5000 3 4\n");
  SUBCASE("drop policy counts them") {
    const auto agg = aggregate_bins(log.events, log.nodes, {0, 900, 2, true});
    CHECK(agg.tensor.total_count() == 1);
    CHECK(agg.dropped == 2);
  }
  SUBCASE("error policy throws") {
    CHECK_THROWS_AS(aggregate_bins(log.events, log.nodes, {0, 900, 2, false}),
                    std::out_of_range);
  }
}

TEST_CASE("total count equals the number of in-range events") {
  Rng rng(404);
  std::ostringstream text;
  int in_range = 0;
  for (int i = 0; i < 500; ++i) {
    const std::int64_t t = static_cast<std::int64_t>(rng.uniform_below(100000));
    const int a = 1 + static_cast<int>(rng.uniform_below(20));
    int b = 1 + static_cast<int>(rng.uniform_below(20));
    if (a == b) b = a == 20 ? 1 : a + 1;
    text << t << ' ' << a << ' ' << b << '\n';
    if (t < 86400) ++in_range;
  }
  const auto log = parse_str(text.str());
  const auto agg = aggregate_bins(log.events, log.nodes, {0, 900, 96, true});
  CHECK(agg.tensor.total_count() == in_range);
  CHECK(agg.dropped == 500 - in_range);
}

TEST_CASE("parse -> serialize -> parse is the identity") {
  const std::string text = "20 5 9\n40 9 5\n60 2 5\n";
  const auto log = parse_str(text);
  std::ostringstream out;
  write_contact_log(out, log.events);
  const auto log2 = parse_str(out.str());
  REQUIRE(log2.events.size() == log.events.size());
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    CHECK(log.events[i].timestamp == log2.events[i].timestamp);
    CHECK(log.events[i].person_a == log2.events[i].person_a);
    CHECK(log.events[i].person_b == log2.events[i].person_b);
  }
  CHECK(log.nodes.dense_to_raw == log2.nodes.dense_to_raw);
}

TEST_CASE("aggregation is order independent") {
  std::vector<std::string> lines;
  Rng rng(505);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t t = static_cast<std::int64_t>(rng.uniform_below(86400));
    const int a = 1 + static_cast<int>(rng.uniform_below(10));
    int b = 1 + static_cast<int>(rng.uniform_below(10));
    if (a == b) b = a == 10 ? 1 : a + 1;
    lines.push_back(std::to_string(t) + " " + std::to_string(a) + " " + std::to_string(b));
  }
  std::string forward;
  for (const auto& l : lines) forward += l + "\n";
  std::shuffle(lines.begin(), lines.end(), std::mt19937(7));
  std::string shuffled;
  for (const auto& l : lines) shuffled += l + "\n";

  const auto log_a = parse_str(forward);
  const auto log_b = parse_str(shuffled);
  const BinningSpec spec{0, 900, 96, true};
  const auto agg_a = aggregate_bins(log_a.events, log_a.nodes, spec);
  const auto agg_b = aggregate_bins(log_b.events, log_b.nodes, spec);

  // node maps differ (first-appearance order), so compare via raw ids
  auto canonical = [](const AggregationResult& agg, const NodeIndexMap& nodes) {
    std::vector<std::tuple<std::int64_t, std::int64_t, int, count_t>> cells;
    for (const TensorEntry& e : agg.tensor.entries()) {
      std::int64_t ra = nodes.dense_to_raw[static_cast<std::size_t>(e.source)];
      std::int64_t rb = nodes.dense_to_raw[static_cast<std::size_t>(e.target)];
      if (ra > rb) std::swap(ra, rb);
      cells.emplace_back(ra, rb, e.bin, e.count);
    }
    std::sort(cells.begin(), cells.end());
    return cells;
  };
  CHECK(canonical(agg_a, log_a.nodes) == canonical(agg_b, log_b.nodes));
}

TEST_CASE("pre-binned CSV with header round-trips through the tensor") {
  const std::string csv =
      "person_a,person_b,bin,count\n"
      "0,1,0,5\n"
      "1,2,3,2\n";
  std::istringstream in(csv);
  const PrebinnedData data = read_prebinned(in);
  REQUIRE(data.records.size() == 2);
  CHECK(data.max_node == 2);
  CHECK(data.max_bin == 3);

  const InteractionTensor t =
      build_tensor(data.records, data.max_node + 1, data.max_bin + 1, Mode::undirected);
  std::ostringstream out;
  write_prebinned_csv(out, t);
  std::istringstream in2(out.str());
  const PrebinnedData data2 = read_prebinned(in2);
  CHECK(data2.records.size() == data.records.size());
}

TEST_CASE("headerless whitespace pre-binned rows are accepted") {
  std::istringstream in("0 1 0 5\n1 2 3 2\n");
  const PrebinnedData data = read_prebinned(in);
  REQUIRE(data.records.size() == 2);
  CHECK(data.records[1].bin == 3);
  CHECK(data.records[1].count == 2);
}

TEST_CASE("pre-binned parsing rejects bad input") {
  {
    std::istringstream in("person_a,person_b,oops,count\n");
    CHECK_THROWS_WITH_AS(read_prebinned(in), doctest::Contains("header"), std::runtime_error);
  }
  {
    std::istringstream in("person_a,person_b,bin,count\n1,2,3\n");
    CHECK_THROWS_WITH_AS(read_prebinned(in), doctest::Contains("line 2"), std::runtime_error);
  }
  {
    std::istringstream in("0 1 0 -2\n");
    CHECK_THROWS_AS(read_prebinned(in), std::runtime_error);
  }
  {
    std::istringstream in("0 1 x 2\n");
    CHECK_THROWS_AS(read_prebinned(in), std::runtime_error);
  }
}

TEST_CASE("node map CSV lists dense ids in order") {
  const auto log = parse_str("10 7 3\n20 3 9\n");
  std::ostringstream out;
  write_node_map_csv(out, log.nodes);
  CHECK(out.str() == "raw_id,dense_id\n7,0\n3,1\n9,2\n");
}

TEST_CASE("binning spec validation") {
  CHECK_THROWS_AS((BinningSpec{0, 0, 96, true}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((BinningSpec{0, 900, 0, true}).validate(), std::invalid_argument);
}
