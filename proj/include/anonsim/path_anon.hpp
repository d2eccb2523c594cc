#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anonsim/buckets.hpp"
#include "anonsim/channel_graph.hpp"
#include "anonsim/core.hpp"
#include "anonsim/stats.hpp"

namespace anonsim {

// A payment with its loop-free node path sender -> ... -> receiver.
struct RoutedPayment {
  Payment payment;
  std::vector<NodeId> path;

  std::span<const NodeId> intermediates() const;
  Tick start_slot(Tick hop_time) const { return payment.time / hop_time; }
  // Slot during which the payment sits at its i-th intermediate (1-based).
  Tick slot_at(std::size_t i, Tick hop_time) const { return start_slot(hop_time) + static_cast<Tick>(i); }
  // 0-based position of `node` in the path, if present.
  std::optional<std::size_t> position(NodeId node) const;

  friend bool operator==(const RoutedPayment&, const RoutedPayment&) = default;
};

enum class RouteError { none, unknown_sender, unknown_receiver, missing_receiver, self_payment, no_feasible_path };

const char* to_string(RouteError error);

struct RouteResult {
  std::optional<RoutedPayment> routed;
  RouteError error = RouteError::none;

  bool ok() const { return routed.has_value(); }
};

// Fewest-hop path whose every directed edge can carry the value; among equally
// short paths the lexicographically smallest node sequence wins. On success the
// credit is shifted along the path.
RouteResult route_payment(ChannelGraph& graph, const Payment& payment);

// Routes a time-ordered stream, applying the graph's pending capacity updates
// up to each payment's time before routing it.
class Router {
 public:
  explicit Router(ChannelGraph graph) : graph_(std::move(graph)) {}

  RouteResult route(const Payment& payment);
  const ChannelGraph& graph() const { return graph_; }

 private:
  ChannelGraph graph_;
  std::size_t next_update_ = 0;
};

struct RoutingStats {
  std::uint64_t attempted = 0;
  std::uint64_t succeeded = 0;
  std::uint64_t multi_hop = 0;
  double mean_intermediates = 0;  // over successful payments
  std::size_t max_intermediates = 0;
  std::uint64_t failures_no_path = 0;
  std::uint64_t failures_unknown = 0;
};

std::vector<RoutedPayment> route_all(ChannelGraph graph, std::span<const Payment> payments,
                                     RoutingStats* stats = nullptr);

// `payment_id,path` with `|`-separated node ids.
void write_routes_csv(std::ostream& os, std::span<const RoutedPayment> routed);
// Joins routes with their payments by id.
std::vector<RoutedPayment> read_routes_csv(std::istream& is, std::span<const Payment> payments);

// Two or more payments present at the same intermediate node in the same slot.
struct MixingEvent {
  NodeId node = 0;
  Tick slot = 0;
  std::vector<std::uint32_t> members;  // indices into the routed list, ascending
};

std::vector<MixingEvent> build_mixing(std::span<const RoutedPayment> routed, Tick hop_time);

// True iff the candidate's path up to `node` followed by the target's path
// after `node` repeats no node. Throws if `node` is not an intermediate of both.
bool splice_loop_free(const RoutedPayment& candidate, const RoutedPayment& target, NodeId node);

struct PathAnonOptions {
  bool allow_loops = false;
  // When set, only payments with equal bucketed values mix.
  std::optional<BucketStrategy> value_filter;
};

// Distinct senders in each payment's component of the transitive mixing relation.
std::vector<std::int64_t> path_anon_max(std::span<const RoutedPayment> routed,
                                        std::span<const MixingEvent> events,
                                        const PathAnonOptions& options = {});

struct MinAnon {
  std::int64_t size = 1;
  std::optional<NodeId> witness;
};

// Smallest local set over a payment's intermediates, with the node attaining it.
std::vector<MinAnon> path_anon_min(std::span<const RoutedPayment> routed,
                                   std::span<const MixingEvent> events,
                                   const std::optional<BucketStrategy>& value_filter = std::nullopt);

struct PathAnonRecord {
  PaymentId payment_id = 0;
  std::int64_t min_size = 1;
  std::int64_t max_size = 1;
  std::optional<NodeId> min_witness;
};

std::vector<PathAnonRecord> path_anon(std::span<const RoutedPayment> routed, Tick hop_time,
                                      const PathAnonOptions& options = {});

// `payment_id,min_size,max_size,min_witness`
void write_path_records_csv(std::ostream& os, std::span<const PathAnonRecord> records);

enum class CoverMode { any_intermediate, mixing_only };

const char* to_string(CoverMode mode);
CoverMode parse_cover_mode(const std::string& token);

struct HonestCover {
  std::vector<NodeId> nodes;  // in pick order
  std::vector<PaymentId> uncovered;
  std::uint64_t multi_hop_paths = 0;
  // Distinct worst-case witness nodes over all multi-hop paths.
  std::uint64_t worst_case_nodes = 0;
};

// Greedy set cover of multi-hop paths by intermediate nodes (most uncovered
// paths first, ties to the smaller node id).
HonestCover honest_cover(std::span<const RoutedPayment> routed, std::span<const MixingEvent> events,
                         CoverMode mode);

struct SweepPoint {
  Tick hop_time = 1;
  Distribution min;
  Distribution max;
  Distribution max_loops;
};

std::vector<SweepPoint> hop_time_sweep(std::span<const RoutedPayment> routed,
                                       std::span<const Tick> hop_times,
                                       const std::optional<BucketStrategy>& value_filter = std::nullopt,
                                       bool multi_hop_only = false);

}  // namespace anonsim
