#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anonsim/channel_graph.hpp"
#include "anonsim/core.hpp"

namespace anonsim {

struct IngestConfig {
  // Raw timestamps are divided by this before discretizing to ticks.
  double time_scale = 1000.0;
  // [start, end) in raw timestamps; open when unset.
  std::optional<double> window_start;
  std::optional<double> window_end;
  // Rows with a different non-empty currency are dropped.
  std::string currency = "USD";
  // Consecutive graph updates further apart than this (raw seconds) are reported.
  double update_gap_warning = 7.0 * 86400.0;

  void validate() const;
};

// Opaque account identifiers mapped to dense ids in first-seen order.
class IdMap {
 public:
  NodeId intern(std::string_view name);
  std::optional<NodeId> find(std::string_view name) const;
  const std::string& name(NodeId id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }

  std::string to_json() const;
  static IdMap from_json(const std::string& text);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
};

struct IngestStats {
  std::uint64_t payment_rows = 0;
  std::uint64_t kept = 0;
  std::uint64_t dropped_self = 0;
  std::uint64_t dropped_currency = 0;
  std::uint64_t dropped_window = 0;
  std::uint64_t graph_rows = 0;
  std::uint64_t initial_channels = 0;
  std::uint64_t timed_updates = 0;
  // Kept payments per hour of raw time, and per minute of scaled time.
  double raw_payments_per_hour = 0;
  double scaled_payments_per_minute = 0;
  std::vector<std::string> warnings;
};

struct IngestResult {
  std::vector<Payment> payments;
  ChannelGraph graph;
  IdMap ids;
  IngestStats stats;
};

// Payments CSV: `time,sender,receiver,value[,currency]`.
// Graph CSV: `time,src,dst,capacity`, each row setting one directed capacity.
// The graph is initialized by replaying every update before the window start;
// updates inside the window stay pending, converted to ticks.
// Throws DataError with the offending line number on malformed rows.
IngestResult ingest(std::istream& payments, std::istream& graph, const IngestConfig& config);

}  // namespace anonsim
