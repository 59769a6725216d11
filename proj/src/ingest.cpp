#include "nssbm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nssbm {

std::int32_t NodeIndexMap::add_or_get(std::int64_t raw) {
  auto [it, inserted] = raw_to_dense.try_emplace(raw, static_cast<std::int32_t>(dense_to_raw.size()));
  if (inserted) {
    dense_to_raw.push_back(raw);
  }
  return it->second;
}

void BinningSpec::validate() const {
  if (bin_width <= 0) {
    throw std::invalid_argument("bin_width must be positive");
  }
  if (num_bins < 1) {
    throw std::invalid_argument("num_bins must be at least 1");
  }
}

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

bool is_blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '#';
  }
  return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

ParsedContactLog parse_contact_log(std::istream& in) {
  ParsedContactLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;

    std::istringstream fields(line);
    std::int64_t t = 0;
    std::int64_t a = 0;
    std::int64_t b = 0;
    if (!(fields >> t >> a >> b)) {
      parse_fail(line_no, "expected three whitespace-separated integers `t i j`");
    }
    std::string extra;
    if (fields >> extra) {
      parse_fail(line_no, "trailing token '" + extra + "' after `t i j`");
    }
    if (a <= 0 || b <= 0) {
      parse_fail(line_no, "person ids must be positive");
    }
    if (a == b) {
      parse_fail(line_no, "self contact of id " + std::to_string(a));
    }
    log.nodes.add_or_get(a);
    log.nodes.add_or_get(b);
    log.events.push_back({t, a, b});
  }
  return log;
}

void write_contact_log(std::ostream& out, std::span<const ContactEvent> events) {
  for (const ContactEvent& e : events) {
    out << e.timestamp << ' ' << e.person_a << ' ' << e.person_b << '\n';
  }
}

AggregationResult aggregate_bins(std::span<const ContactEvent> events,
                                 const NodeIndexMap& nodes, const BinningSpec& spec) {
  spec.validate();
  std::vector<EventRecord> records;
  records.reserve(events.size());
  std::int64_t dropped = 0;
  for (const ContactEvent& e : events) {
    const std::int64_t bin = floor_div(e.timestamp - spec.origin, spec.bin_width);
    if (bin < 0 || bin >= spec.num_bins) {
      if (spec.drop_out_of_range) {
        ++dropped;
        continue;
      }
      throw std::out_of_range("event at t=" + std::to_string(e.timestamp) +
                              " falls in bin " + std::to_string(bin) + " outside [0, " +
                              std::to_string(spec.num_bins) + ")");
    }
    const auto a = nodes.raw_to_dense.find(e.person_a);
    const auto b = nodes.raw_to_dense.find(e.person_b);
    if (a == nodes.raw_to_dense.end() || b == nodes.raw_to_dense.end()) {
      throw std::invalid_argument("event references an id missing from the node map");
    }
    records.push_back({a->second, b->second, static_cast<std::int32_t>(bin), 1});
  }
  const int num_nodes = std::max(nodes.size(), 1);
  return {build_tensor(records, num_nodes, spec.num_bins, Mode::undirected), dropped};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    auto begin = field.find_first_not_of(" \t\r");
    auto end = field.find_last_not_of(" \t\r");
    out.push_back(begin == std::string::npos ? std::string()
                                             : field.substr(begin, end - begin + 1));
  }
  return out;
}

std::int64_t to_int(const std::string& token, std::size_t line_no) {
  std::size_t pos = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(token, &pos);
  } catch (const std::exception&) {
    parse_fail(line_no, "expected an integer, got '" + token + "'");
  }
  if (pos != token.size()) {
    parse_fail(line_no, "expected an integer, got '" + token + "'");
  }
  return value;
}

}  // namespace

PrebinnedData read_prebinned(std::istream& in) {
  PrebinnedData data;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;

    if (first_content && line.find(',') != std::string::npos) {
      const auto header = split_csv(line);
      if (header != std::vector<std::string>{"person_a", "person_b", "bin", "count"}) {
        parse_fail(line_no, "expected header person_a,person_b,bin,count");
      }
      saw_header = true;
      first_content = false;
      continue;
    }
    first_content = false;

    std::vector<std::string> tokens;
    if (saw_header) {
      tokens = split_csv(line);
    } else {
      std::istringstream fields(line);
      std::string tok;
      while (fields >> tok) tokens.push_back(tok);
    }
    if (tokens.size() != 4) {
      parse_fail(line_no, "expected 4 columns `person_a person_b bin count`");
    }
    const std::int64_t a = to_int(tokens[0], line_no);
    const std::int64_t b = to_int(tokens[1], line_no);
    const std::int64_t bin = to_int(tokens[2], line_no);
    const std::int64_t count = to_int(tokens[3], line_no);
    if (a < 0 || b < 0 || bin < 0 || count < 0) {
      parse_fail(line_no, "negative value");
    }
    data.records.push_back({static_cast<std::int32_t>(a), static_cast<std::int32_t>(b),
                            static_cast<std::int32_t>(bin), count});
    data.max_node = std::max({data.max_node, static_cast<std::int32_t>(a),
                              static_cast<std::int32_t>(b)});
    data.max_bin = std::max(data.max_bin, static_cast<std::int32_t>(bin));
  }
  return data;
}

void write_prebinned_csv(std::ostream& out, const InteractionTensor& tensor) {
  out << "person_a,person_b,bin,count\n";
  for (const TensorEntry& e : tensor.entries()) {
    out << e.source << ',' << e.target << ',' << e.bin << ',' << e.count << '\n';
  }
}

void write_node_map_csv(std::ostream& out, const NodeIndexMap& nodes) {
  out << "raw_id,dense_id\n";
  for (std::size_t dense = 0; dense < nodes.dense_to_raw.size(); ++dense) {
    out << nodes.dense_to_raw[dense] << ',' << dense << '\n';
  }
}

}  // namespace nssbm
