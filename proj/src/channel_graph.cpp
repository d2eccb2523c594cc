#include "anonsim/channel_graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "csv.hpp"

namespace anonsim {

void ChannelGraph::ensure_node(NodeId node) {
  if (node >= adjacency_.size()) adjacency_.resize(static_cast<std::size_t>(node) + 1);
}

void ChannelGraph::set_capacity(NodeId src, NodeId dst, Usd capacity) {
  if (capacity < 0) throw std::invalid_argument("capacity must be >= 0");
  if (src == dst) throw std::invalid_argument("self-channel on node " + std::to_string(src));
  ensure_node(std::max(src, dst));
  capacity_[key(src, dst)] = capacity;
  auto link = [this](NodeId a, NodeId b) {
    auto& adj = adjacency_[a];
    const auto it = std::lower_bound(adj.begin(), adj.end(), b);
    if (it == adj.end() || *it != b) adj.insert(it, b);
  };
  link(src, dst);
  link(dst, src);
}

Usd ChannelGraph::capacity(NodeId src, NodeId dst) const {
  const auto it = capacity_.find(key(src, dst));
  return it == capacity_.end() ? 0 : it->second;
}

bool ChannelGraph::has_channel(NodeId a, NodeId b) const {
  if (a >= adjacency_.size()) return false;
  const auto& adj = adjacency_[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

void ChannelGraph::shift(std::span<const NodeId> path, Usd value) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const NodeId u = path[i];
    const NodeId v = path[i + 1];
    const Usd forward = capacity(u, v);
    if (forward < value) throw std::logic_error("insufficient capacity on a routed edge");
    capacity_[key(u, v)] = forward - value;
    capacity_[key(v, u)] = capacity(v, u) + value;
  }
}

std::vector<Channel> ChannelGraph::channels() const {
  std::vector<Channel> out;
  out.reserve(capacity_.size());
  for (const auto& [k, c] : capacity_) {
    out.push_back({static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu), c});
  }
  std::sort(out.begin(), out.end(),
            [](const Channel& a, const Channel& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
  return out;
}

void write_channels_csv(std::ostream& os, const ChannelGraph& graph) {
  os << "src,dst,capacity\n";
  for (const auto& c : graph.channels()) os << c.src << ',' << c.dst << ',' << c.capacity << '\n';
}

void write_updates_csv(std::ostream& os, const ChannelGraph& graph) {
  os << "time,src,dst,capacity\n";
  for (const auto& u : graph.updates) {
    os << u.time << ',' << u.src << ',' << u.dst << ',' << u.capacity << '\n';
  }
}

ChannelGraph read_graph_csv(std::istream& channels, std::istream& updates, std::size_t nodes) {
  ChannelGraph g(nodes);
  std::string line;
  std::size_t lineno = 1;
  if (!csv::next_line(channels, line) || csv::trim(line) != "src,dst,capacity") {
    throw DataError("expected header 'src,dst,capacity'", 1);
  }
  while (csv::next_line(channels, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) throw DataError("expected 3 fields", lineno);
    const auto src = csv::parse_number<NodeId>(f[0], lineno, "src");
    const auto dst = csv::parse_number<NodeId>(f[1], lineno, "dst");
    const auto cap = csv::parse_number<Usd>(f[2], lineno, "capacity");
    if (cap < 0 || src == dst) throw DataError("invalid channel", lineno);
    g.set_capacity(src, dst, cap);
  }
  lineno = 1;
  if (!csv::next_line(updates, line) || csv::trim(line) != "time,src,dst,capacity") {
    throw DataError("expected header 'time,src,dst,capacity'", 1);
  }
  while (csv::next_line(updates, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw DataError("expected 4 fields", lineno);
    CapacityUpdate u{csv::parse_number<Tick>(f[0], lineno, "time"),
                     csv::parse_number<NodeId>(f[1], lineno, "src"),
                     csv::parse_number<NodeId>(f[2], lineno, "dst"),
                     csv::parse_number<Usd>(f[3], lineno, "capacity")};
    if (u.capacity < 0 || u.src == u.dst) throw DataError("invalid update", lineno);
    if (!g.updates.empty() && u.time < g.updates.back().time) throw DataError("updates out of order", lineno);
    g.ensure_node(std::max(u.src, u.dst));
    g.updates.push_back(u);
  }
  return g;
}

}  // namespace anonsim
