#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "anonsim/core.hpp"

namespace anonsim {

using NodeId = std::uint32_t;

struct CapacityUpdate {
  Tick time = 0;
  NodeId src = 0;
  NodeId dst = 0;
  Usd capacity = 0;

  friend bool operator==(const CapacityUpdate&, const CapacityUpdate&) = default;
};

struct Channel {
  NodeId src = 0;
  NodeId dst = 0;
  Usd capacity = 0;

  friend bool operator==(const Channel&, const Channel&) = default;
};

// Credit network with directional capacities. A channel between u and v makes
// them neighbours in both directions; an undeclared direction has capacity 0.
class ChannelGraph {
 public:
  explicit ChannelGraph(std::size_t nodes = 0) : adjacency_(nodes) {}

  std::size_t node_count() const { return adjacency_.size(); }
  void ensure_node(NodeId node);

  // Throws std::invalid_argument for negative capacities or self-channels.
  void set_capacity(NodeId src, NodeId dst, Usd capacity);
  Usd capacity(NodeId src, NodeId dst) const;
  bool has_channel(NodeId a, NodeId b) const;

  // Sorted ascending.
  const std::vector<NodeId>& neighbors(NodeId node) const { return adjacency_.at(node); }

  // Moves `value` of credit along a path: every forward direction loses it and
  // every reverse direction gains it.
  void shift(std::span<const NodeId> path, Usd value);

  // Every declared direction, sorted by (src, dst).
  std::vector<Channel> channels() const;

  // Time-ordered capacity updates not yet applied to the current state.
  std::vector<CapacityUpdate> updates;

  friend bool operator==(const ChannelGraph& a, const ChannelGraph& b) {
    return a.channels() == b.channels() && a.updates == b.updates && a.node_count() == b.node_count();
  }

 private:
  static std::uint64_t key(NodeId src, NodeId dst) {
    return (static_cast<std::uint64_t>(src) << 32) | dst;
  }

  std::vector<std::vector<NodeId>> adjacency_;
  std::unordered_map<std::uint64_t, Usd> capacity_;
};

// `src,dst,capacity` rows for the current state and `time,src,dst,capacity`
// rows for pending updates; node ids are dense integers.
void write_channels_csv(std::ostream& os, const ChannelGraph& graph);
void write_updates_csv(std::ostream& os, const ChannelGraph& graph);
ChannelGraph read_graph_csv(std::istream& channels, std::istream& updates, std::size_t nodes = 0);

}  // namespace anonsim
