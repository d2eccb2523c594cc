#include "anonsim/path_anon.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "csv.hpp"

namespace anonsim {

namespace {

// Merge-find over payment indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// Reusable breadth-first search state; visit marks are generation-stamped.
struct Bfs {
  std::vector<NodeId> parent;
  std::vector<std::uint32_t> seen;
  std::uint32_t generation = 0;
  std::vector<NodeId> queue;

  std::optional<std::vector<NodeId>> shortest(const ChannelGraph& g, NodeId from, NodeId to, Usd value) {
    const auto n = g.node_count();
    if (seen.size() < n) {
      seen.resize(n, 0);
      parent.resize(n, 0);
    }
    if (++generation == 0) {
      std::fill(seen.begin(), seen.end(), 0);
      generation = 1;
    }
    queue.clear();
    queue.push_back(from);
    seen[from] = generation;
    bool found = false;
    for (std::size_t head = 0; head < queue.size() && !found; ++head) {
      const NodeId u = queue[head];
      for (const NodeId v : g.neighbors(u)) {
        if (seen[v] == generation || g.capacity(u, v) < value) continue;
        seen[v] = generation;
        parent[v] = u;
        if (v == to) {
          found = true;
          break;
        }
        queue.push_back(v);
      }
    }
    if (!found) return std::nullopt;
    std::vector<NodeId> path{to};
    while (path.back() != from) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
  }
};

RouteResult route_with(Bfs& bfs, ChannelGraph& graph, const Payment& payment) {
  RouteResult r;
  if (!payment.receiver) {
    r.error = RouteError::missing_receiver;
    return r;
  }
  const NodeId from = payment.sender;
  const NodeId to = *payment.receiver;
  if (from == to) {
    r.error = RouteError::self_payment;
    return r;
  }
  auto known = [&](NodeId x) { return x < graph.node_count() && !graph.neighbors(x).empty(); };
  if (!known(from)) {
    r.error = RouteError::unknown_sender;
    return r;
  }
  if (!known(to)) {
    r.error = RouteError::unknown_receiver;
    return r;
  }
  auto path = bfs.shortest(graph, from, to, payment.value);
  if (!path) {
    r.error = RouteError::no_feasible_path;
    return r;
  }
  graph.shift(*path, payment.value);
  r.routed = RoutedPayment{payment, std::move(*path)};
  return r;
}

bool compatible(const RoutedPayment& a, const RoutedPayment& b, NodeId node,
                const std::optional<BucketStrategy>& filter, bool allow_loops) {
  if (filter && filter->apply(a.payment.value) != filter->apply(b.payment.value)) return false;
  if (allow_loops) return true;
  return splice_loop_free(a, b, node) && splice_loop_free(b, a, node);
}

}  // namespace

std::span<const NodeId> RoutedPayment::intermediates() const {
  if (path.size() < 2) return {};
  return std::span<const NodeId>(path).subspan(1, path.size() - 2);
}

std::optional<std::size_t> RoutedPayment::position(NodeId node) const {
  const auto it = std::find(path.begin(), path.end(), node);
  if (it == path.end()) return std::nullopt;
  return static_cast<std::size_t>(it - path.begin());
}

const char* to_string(RouteError error) {
  switch (error) {
    case RouteError::none:
      return "ok";
    case RouteError::unknown_sender:
      return "unknown sender";
    case RouteError::unknown_receiver:
      return "unknown receiver";
    case RouteError::missing_receiver:
      return "payment has no receiver";
    case RouteError::self_payment:
      return "sender equals receiver";
    case RouteError::no_feasible_path:
      return "no path with enough capacity";
  }
  return "?";
}

RouteResult route_payment(ChannelGraph& graph, const Payment& payment) {
  Bfs bfs;
  return route_with(bfs, graph, payment);
}

RouteResult Router::route(const Payment& payment) {
  thread_local Bfs bfs;
  while (next_update_ < graph_.updates.size() && graph_.updates[next_update_].time <= payment.time) {
    const auto& u = graph_.updates[next_update_++];
    graph_.set_capacity(u.src, u.dst, u.capacity);
  }
  return route_with(bfs, graph_, payment);
}

std::vector<RoutedPayment> route_all(ChannelGraph graph, std::span<const Payment> payments,
                                     RoutingStats* stats) {
  Router router(std::move(graph));
  std::vector<RoutedPayment> out;
  RoutingStats s;
  std::uint64_t hops = 0;
  for (const auto& p : payments) {
    ++s.attempted;
    auto r = router.route(p);
    if (!r.ok()) {
      if (r.error == RouteError::no_feasible_path) {
        ++s.failures_no_path;
      } else {
        ++s.failures_unknown;
      }
      continue;
    }
    const auto k = r.routed->intermediates().size();
    ++s.succeeded;
    if (k > 0) ++s.multi_hop;
    hops += k;
    s.max_intermediates = std::max(s.max_intermediates, k);
    out.push_back(std::move(*r.routed));
  }
  s.mean_intermediates = s.succeeded ? static_cast<double>(hops) / static_cast<double>(s.succeeded) : 0.0;
  if (stats) *stats = s;
  return out;
}

void write_routes_csv(std::ostream& os, std::span<const RoutedPayment> routed) {
  os << "payment_id,path\n";
  for (const auto& r : routed) {
    os << r.payment.id << ',';
    for (std::size_t i = 0; i < r.path.size(); ++i) os << (i ? "|" : "") << r.path[i];
    os << '\n';
  }
}

std::vector<RoutedPayment> read_routes_csv(std::istream& is, std::span<const Payment> payments) {
  std::unordered_map<PaymentId, std::size_t> by_id;
  for (std::size_t i = 0; i < payments.size(); ++i) by_id.emplace(payments[i].id, i);
  std::vector<RoutedPayment> out;
  std::string line;
  std::size_t lineno = 1;
  if (!csv::next_line(is, line) || csv::trim(line) != "payment_id,path") {
    throw DataError("expected header 'payment_id,path'", 1);
  }
  while (csv::next_line(is, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 2) throw DataError("expected 2 fields", lineno);
    const auto id = csv::parse_number<PaymentId>(f[0], lineno, "payment_id");
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("route for unknown payment " + std::to_string(id), lineno);
    RoutedPayment r{payments[it->second], {}};
    for (const auto node : csv::split(f[1], '|')) r.path.push_back(csv::parse_number<NodeId>(node, lineno, "node"));
    if (r.path.size() < 2 || r.path.front() != r.payment.sender ||
        !r.payment.receiver || r.path.back() != *r.payment.receiver) {
      throw DataError("path does not connect sender and receiver", lineno);
    }
    auto sorted = r.path;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError("path repeats a node", lineno);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MixingEvent> build_mixing(std::span<const RoutedPayment> routed, Tick hop_time) {
  if (hop_time < 1) throw std::invalid_argument("hop time must be >= 1 tick");
  struct Presence {
    NodeId node;
    Tick slot;
    std::uint32_t member;
  };
  std::vector<Presence> presences;
  for (std::size_t k = 0; k < routed.size(); ++k) {
    const auto mids = routed[k].intermediates();
    for (std::size_t i = 0; i < mids.size(); ++i) {
      presences.push_back({mids[i], routed[k].slot_at(i + 1, hop_time), static_cast<std::uint32_t>(k)});
    }
  }
  std::sort(presences.begin(), presences.end(), [](const Presence& a, const Presence& b) {
    return std::tie(a.node, a.slot, a.member) < std::tie(b.node, b.slot, b.member);
  });
  std::vector<MixingEvent> events;
  for (std::size_t lo = 0; lo < presences.size();) {
    std::size_t hi = lo;
    while (hi < presences.size() && presences[hi].node == presences[lo].node &&
           presences[hi].slot == presences[lo].slot) {
      ++hi;
    }
    if (hi - lo >= 2) {
      MixingEvent e{presences[lo].node, presences[lo].slot, {}};
      for (std::size_t k = lo; k < hi; ++k) e.members.push_back(presences[k].member);
      events.push_back(std::move(e));
    }
    lo = hi;
  }
  return events;
}

bool splice_loop_free(const RoutedPayment& candidate, const RoutedPayment& target, NodeId node) {
  const auto pc = candidate.position(node);
  const auto pt = target.position(node);
  auto is_mid = [](const RoutedPayment& r, std::optional<std::size_t> pos) {
    return pos && *pos > 0 && *pos + 1 < r.path.size();
  };
  if (!is_mid(candidate, pc) || !is_mid(target, pt)) {
    throw std::invalid_argument("node " + std::to_string(node) + " is not an intermediate of both paths");
  }
  for (std::size_t s = *pt + 1; s < target.path.size(); ++s) {
    for (std::size_t p = 0; p <= *pc; ++p) {
      if (candidate.path[p] == target.path[s]) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::int64_t> distinct_senders_per_component(std::span<const RoutedPayment> routed,
                                                         DisjointSets& ds) {
  std::vector<std::pair<std::uint32_t, UserId>> keyed(routed.size());
  for (std::size_t k = 0; k < routed.size(); ++k) {
    keyed[k] = {ds.find(static_cast<std::uint32_t>(k)), routed[k].payment.sender};
  }
  std::sort(keyed.begin(), keyed.end());
  std::unordered_map<std::uint32_t, std::int64_t> distinct;
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k] != keyed[k - 1]) ++distinct[keyed[k].first];
  }
  std::vector<std::int64_t> out(routed.size());
  for (std::size_t k = 0; k < routed.size(); ++k) out[k] = distinct[ds.find(static_cast<std::uint32_t>(k))];
  return out;
}

}  // namespace

std::vector<std::int64_t> path_anon_max(std::span<const RoutedPayment> routed,
                                        std::span<const MixingEvent> events,
                                        const PathAnonOptions& options) {
  DisjointSets ds(routed.size());
  std::vector<std::uint32_t> members;
  for (const auto& e : events) {
    members = e.members;
    if (options.value_filter) {
      const auto& f = *options.value_filter;
      std::stable_sort(members.begin(), members.end(), [&](std::uint32_t a, std::uint32_t b) {
        return f.apply(routed[a].payment.value) < f.apply(routed[b].payment.value);
      });
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto pa = members[a];
        const auto pb = members[b];
        if (options.value_filter && options.value_filter->apply(routed[pa].payment.value) !=
                                        options.value_filter->apply(routed[pb].payment.value)) {
          break;  // members are grouped by bucketed value
        }
        if (ds.find(pa) == ds.find(pb)) continue;
        if (compatible(routed[pa], routed[pb], e.node, std::nullopt, options.allow_loops)) ds.unite(pa, pb);
      }
    }
  }
  return distinct_senders_per_component(routed, ds);
}

std::vector<MinAnon> path_anon_min(std::span<const RoutedPayment> routed,
                                   std::span<const MixingEvent> events,
                                   const std::optional<BucketStrategy>& value_filter) {
  // local[k][i]: local set size of payment k at its i-th intermediate (0-based).
  std::vector<std::vector<std::int64_t>> local(routed.size());
  for (std::size_t k = 0; k < routed.size(); ++k) local[k].assign(routed[k].intermediates().size(), 1);

  std::vector<UserId> senders;
  for (const auto& e : events) {
    for (const auto p : e.members) {
      const auto& rp = routed[p];
      senders.clear();
      senders.push_back(rp.payment.sender);
      for (const auto q : e.members) {
        if (q == p) continue;
        if (compatible(rp, routed[q], e.node, value_filter, false)) senders.push_back(routed[q].payment.sender);
      }
      std::sort(senders.begin(), senders.end());
      const auto distinct = std::unique(senders.begin(), senders.end()) - senders.begin();
      local[p][*rp.position(e.node) - 1] = distinct;
    }
  }

  std::vector<MinAnon> out(routed.size());
  for (std::size_t k = 0; k < routed.size(); ++k) {
    const auto mids = routed[k].intermediates();
    for (std::size_t i = 0; i < mids.size(); ++i) {
      if (!out[k].witness || local[k][i] < out[k].size) out[k] = {local[k][i], mids[i]};
    }
  }
  return out;
}

std::vector<PathAnonRecord> path_anon(std::span<const RoutedPayment> routed, Tick hop_time,
                                      const PathAnonOptions& options) {
  const auto events = build_mixing(routed, hop_time);
  const auto mins = path_anon_min(routed, events, options.value_filter);
  const auto maxs = path_anon_max(routed, events, options);
  std::vector<PathAnonRecord> out(routed.size());
  for (std::size_t k = 0; k < routed.size(); ++k) {
    out[k] = {routed[k].payment.id, mins[k].size, maxs[k], mins[k].witness};
  }
  return out;
}

void write_path_records_csv(std::ostream& os, std::span<const PathAnonRecord> records) {
  os << "payment_id,min_size,max_size,min_witness\n";
  for (const auto& r : records) {
    os << r.payment_id << ',' << r.min_size << ',' << r.max_size << ',';
    if (r.min_witness) os << *r.min_witness;
    os << '\n';
  }
}

const char* to_string(CoverMode mode) {
  return mode == CoverMode::any_intermediate ? "any_intermediate" : "mixing_only";
}

CoverMode parse_cover_mode(const std::string& token) {
  if (token == "any_intermediate" || token == "any") return CoverMode::any_intermediate;
  if (token == "mixing_only" || token == "mixing") return CoverMode::mixing_only;
  throw std::invalid_argument("unknown cover mode '" + token + "' (expected any | mixing)");
}

HonestCover honest_cover(std::span<const RoutedPayment> routed, std::span<const MixingEvent> events,
                         CoverMode mode) {
  HonestCover cover;
  // Eligible nodes per multi-hop path.
  std::vector<std::vector<NodeId>> eligible(routed.size());
  if (mode == CoverMode::mixing_only) {
    for (const auto& e : events) {
      for (const auto m : e.members) eligible[m].push_back(e.node);
    }
  } else {
    for (std::size_t k = 0; k < routed.size(); ++k) {
      const auto mids = routed[k].intermediates();
      eligible[k].assign(mids.begin(), mids.end());
    }
  }

  std::unordered_map<NodeId, std::vector<std::uint32_t>> paths_of;
  std::vector<char> covered(routed.size(), 1);
  for (std::size_t k = 0; k < routed.size(); ++k) {
    if (routed[k].intermediates().empty()) continue;
    ++cover.multi_hop_paths;
    if (eligible[k].empty()) {
      cover.uncovered.push_back(routed[k].payment.id);
      continue;
    }
    covered[k] = 0;
    for (const auto n : eligible[k]) paths_of[n].push_back(static_cast<std::uint32_t>(k));
  }

  // Lazy greedy: heap entries may carry stale counts and are re-pushed on pop.
  using Entry = std::pair<std::size_t, std::int64_t>;  // (uncovered count, -node)
  std::priority_queue<Entry> heap;
  for (const auto& [node, paths] : paths_of) heap.emplace(paths.size(), -static_cast<std::int64_t>(node));
  while (!heap.empty()) {
    const auto [count, neg] = heap.top();
    heap.pop();
    const auto node = static_cast<NodeId>(-neg);
    std::size_t live = 0;
    for (const auto k : paths_of[node]) live += covered[k] ? 0 : 1;
    if (live == 0) continue;
    if (live < count) {
      heap.emplace(live, neg);
      continue;
    }
    cover.nodes.push_back(node);
    for (const auto k : paths_of[node]) covered[k] = 1;
  }

  const auto mins = path_anon_min(routed, events);
  std::vector<NodeId> witnesses;
  for (const auto& m : mins) {
    if (m.witness) witnesses.push_back(*m.witness);
  }
  std::sort(witnesses.begin(), witnesses.end());
  cover.worst_case_nodes =
      static_cast<std::uint64_t>(std::unique(witnesses.begin(), witnesses.end()) - witnesses.begin());
  return cover;
}

std::vector<SweepPoint> hop_time_sweep(std::span<const RoutedPayment> routed,
                                       std::span<const Tick> hop_times,
                                       const std::optional<BucketStrategy>& value_filter,
                                       bool multi_hop_only) {
  if (hop_times.empty()) throw std::invalid_argument("hop time sweep needs at least one hop time");
  std::vector<SweepPoint> out;
  for (const Tick h : hop_times) {
    const auto events = build_mixing(routed, h);
    const auto mins = path_anon_min(routed, events, value_filter);
    const auto maxs = path_anon_max(routed, events, {false, value_filter});
    const auto loops = path_anon_max(routed, events, {true, value_filter});
    SweepPoint point;
    point.hop_time = h;
    for (std::size_t k = 0; k < routed.size(); ++k) {
      if (multi_hop_only && routed[k].intermediates().empty()) continue;
      point.min.add(static_cast<double>(mins[k].size));
      point.max.add(static_cast<double>(maxs[k]));
      point.max_loops.add(static_cast<double>(loops[k]));
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace anonsim
