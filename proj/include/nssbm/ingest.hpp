#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "nssbm/tensor.hpp"

namespace nssbm {

// one raw proximity record: a contact between two badges at `timestamp`
struct ContactEvent {
  std::int64_t timestamp = 0;
  std::int64_t person_a = 0;
  std::int64_t person_b = 0;
};

// raw badge ids mapped to dense 0-based indices in first-appearance order
struct NodeIndexMap {
  std::vector<std::int64_t> dense_to_raw;
  std::unordered_map<std::int64_t, std::int32_t> raw_to_dense;

  std::int32_t add_or_get(std::int64_t raw);
  int size() const { return static_cast<int>(dense_to_raw.size()); }
};

struct ParsedContactLog {
  std::vector<ContactEvent> events;
  NodeIndexMap nodes;
};

// Reads whitespace-separated `t i j` lines (seconds, id, id). Blank lines and
// lines starting with '#' are skipped. Malformed lines, non-positive ids and
// self contacts raise std::runtime_error naming the line number.
ParsedContactLog parse_contact_log(std::istream& in);

void write_contact_log(std::ostream& out, std::span<const ContactEvent> events);

struct BinningSpec {
  std::int64_t origin = 0;      // timestamp where bin 0 starts
  std::int64_t bin_width = 900; // seconds; 900 = quarter-hour
  int num_bins = 96;
  bool drop_out_of_range = true;

  void validate() const;
};

struct AggregationResult {
  InteractionTensor tensor;  // undirected mode
  std::int64_t dropped = 0;  // events outside [origin, origin + U*width)
};

// bin index = floor((timestamp - origin) / bin_width), half-open bins
// [start, end); each event adds count 1 to its (unordered pair, bin) cell
AggregationResult aggregate_bins(std::span<const ContactEvent> events,
                                 const NodeIndexMap& nodes, const BinningSpec& spec);

// Pre-binned input: CSV with header `person_a,person_b,bin,count`, or
// headerless whitespace-separated 4-column lines `i j bin count`. Ids are
// dense 0-based node indices.
struct PrebinnedData {
  std::vector<EventRecord> records;
  std::int32_t max_node = -1;
  std::int32_t max_bin = -1;
};

PrebinnedData read_prebinned(std::istream& in);

void write_prebinned_csv(std::ostream& out, const InteractionTensor& tensor);
void write_node_map_csv(std::ostream& out, const NodeIndexMap& nodes);

}  // namespace nssbm
