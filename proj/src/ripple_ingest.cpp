#include "anonsim/ripple_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"

namespace anonsim {

void IngestConfig::validate() const {
  if (!(time_scale >= 1.0)) throw std::invalid_argument("time scale must be >= 1");
  if (window_start && window_end && !(*window_start < *window_end)) {
    throw std::invalid_argument("window start must precede window end");
  }
}

NodeId IdMap::intern(std::string_view name) {
  const auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<NodeId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<NodeId> IdMap::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string IdMap::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "anonsim.ids/1";
  j["nodes"] = names_;
  return j.dump(1) + "\n";
}

IdMap IdMap::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("schema", "") != "anonsim.ids/1") throw DataError("unsupported id map schema");
  IdMap m;
  for (const auto& n : j.at("nodes")) m.intern(n.get<std::string>());
  return m;
}

namespace {

struct RawPayment {
  double time;
  std::string sender;
  std::string receiver;
  double value;
  std::size_t line;
};

struct RawUpdate {
  double time;
  std::string src;
  std::string dst;
  double capacity;
  std::size_t line;
};

bool in_window(const IngestConfig& c, double t) {
  return (!c.window_start || t >= *c.window_start) && (!c.window_end || t < *c.window_end);
}

Tick to_tick(const IngestConfig& c, double raw) { return static_cast<Tick>(std::floor(raw / c.time_scale)); }

Usd to_usd(double v) { return std::max<Usd>(1, std::llround(v)); }

}  // namespace

IngestResult ingest(std::istream& payments_in, std::istream& graph_in, const IngestConfig& config) {
  config.validate();
  IngestResult result;
  auto& stats = result.stats;
  std::string line;

  // Graph rows first so channel endpoints get the lowest ids.
  std::vector<RawUpdate> updates;
  std::size_t lineno = 1;
  if (!csv::next_line(graph_in, line) || csv::trim(line) != "time,src,dst,capacity") {
    throw DataError("graph file: expected header 'time,src,dst,capacity'", 1);
  }
  while (csv::next_line(graph_in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw DataError("graph file: expected 4 fields", lineno);
    RawUpdate u{csv::parse_number<double>(f[0], lineno, "time"), std::string(csv::trim(f[1])),
                std::string(csv::trim(f[2])), csv::parse_number<double>(f[3], lineno, "capacity"), lineno};
    if (u.src.empty() || u.dst.empty()) throw DataError("graph file: empty node id", lineno);
    if (u.src == u.dst) throw DataError("graph file: self-channel", lineno);
    if (u.capacity < 0) throw DataError("graph file: negative capacity", lineno);
    updates.push_back(std::move(u));
  }
  stats.graph_rows = updates.size();
  std::stable_sort(updates.begin(), updates.end(),
                   [](const RawUpdate& a, const RawUpdate& b) { return a.time < b.time; });

  std::vector<RawPayment> raw;
  lineno = 1;
  if (!csv::next_line(payments_in, line)) throw DataError("payments file: empty", 1);
  const auto header = csv::trim(line);
  bool has_currency = false;
  if (header == "time,sender,receiver,value,currency") {
    has_currency = true;
  } else if (header != "time,sender,receiver,value") {
    throw DataError("payments file: expected header 'time,sender,receiver,value[,currency]'", 1);
  }
  while (csv::next_line(payments_in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != (has_currency ? 5u : 4u)) throw DataError("payments file: wrong field count", lineno);
    ++stats.payment_rows;
    RawPayment p{csv::parse_number<double>(f[0], lineno, "time"), std::string(csv::trim(f[1])),
                 std::string(csv::trim(f[2])), csv::parse_number<double>(f[3], lineno, "value"), lineno};
    if (p.sender.empty() || p.receiver.empty()) throw DataError("payments file: empty account", lineno);
    if (p.value < 0 || !std::isfinite(p.value)) throw DataError("payments file: invalid value", lineno);
    if (p.time < 0) throw DataError("payments file: negative time", lineno);
    if (has_currency) {
      const auto cur = csv::trim(f[4]);
      if (!cur.empty() && cur != config.currency) {
        ++stats.dropped_currency;
        continue;
      }
    }
    if (p.sender == p.receiver) {
      ++stats.dropped_self;
      continue;
    }
    if (!in_window(config, p.time)) {
      ++stats.dropped_window;
      continue;
    }
    raw.push_back(std::move(p));
  }
  std::stable_sort(raw.begin(), raw.end(), [](const RawPayment& a, const RawPayment& b) { return a.time < b.time; });

  for (const auto& u : updates) {
    result.ids.intern(u.src);
    result.ids.intern(u.dst);
  }
  for (const auto& p : raw) {
    result.ids.intern(p.sender);
    result.ids.intern(p.receiver);
  }

  auto& graph = result.graph;
  if (result.ids.size() > 0) graph.ensure_node(static_cast<NodeId>(result.ids.size() - 1));
  const RawUpdate* previous = nullptr;
  for (const auto& u : updates) {
    const NodeId src = *result.ids.find(u.src);
    const NodeId dst = *result.ids.find(u.dst);
    if (config.window_start && u.time < *config.window_start) {
      graph.set_capacity(src, dst, to_usd(u.capacity));
      continue;
    }
    if (config.window_end && u.time >= *config.window_end) continue;
    if (previous && u.time - previous->time > config.update_gap_warning) {
      std::ostringstream msg;
      msg << "graph updates missing between " << previous->time << " and " << u.time
          << "; carrying last known capacities";
      stats.warnings.push_back(msg.str());
    }
    previous = &u;
    graph.updates.push_back({to_tick(config, u.time), src, dst, to_usd(u.capacity)});
  }
  stats.initial_channels = graph.channels().size();
  stats.timed_updates = graph.updates.size();

  PaymentId next_id = 0;
  for (const auto& p : raw) {
    Payment out;
    out.id = next_id++;
    out.sender = *result.ids.find(p.sender);
    out.receiver = *result.ids.find(p.receiver);
    out.value = to_usd(p.value);
    out.time = to_tick(config, p.time);
    result.payments.push_back(out);
  }
  stats.kept = result.payments.size();
  if (raw.size() >= 2) {
    const double span = raw.back().time - raw.front().time;
    if (span > 0) {
      stats.raw_payments_per_hour = static_cast<double>(raw.size()) / (span / 3600.0);
      stats.scaled_payments_per_minute = static_cast<double>(raw.size()) / (span / config.time_scale / 60.0);
    }
  }
  return result;
}

}  // namespace anonsim
