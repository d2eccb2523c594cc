#include "anonsim/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace anonsim {

Distribution::Distribution(std::span<const double> sample) {
  for (double v : sample) add(v);
}

void Distribution::add(double value, std::uint64_t count) {
  if (count == 0) return;
  if (std::isnan(value)) throw std::invalid_argument("NaN sample");
  runs_[value] += count;
  n_ += count;
  sum_ += value * static_cast<double>(count);
}

void Distribution::merge(const Distribution& other) {
  for (const auto& [v, c] : other.runs_) runs_[v] += c;
  n_ += other.n_;
  sum_ += other.sum_;
}

double Distribution::min() const {
  if (empty()) throw std::invalid_argument("empty distribution");
  return runs_.begin()->first;
}

double Distribution::max() const {
  if (empty()) throw std::invalid_argument("empty distribution");
  return runs_.rbegin()->first;
}

double Distribution::mean() const {
  if (empty()) throw std::invalid_argument("empty distribution");
  return sum_ / static_cast<double>(n_);
}

double Distribution::at_rank(std::uint64_t rank) const {
  if (rank >= n_) throw std::out_of_range("rank beyond distribution size");
  std::uint64_t seen = 0;
  for (const auto& [v, c] : runs_) {
    seen += c;
    if (rank < seen) return v;
  }
  return runs_.rbegin()->first;
}

double Distribution::quantile(double p) const {
  if (empty()) throw std::invalid_argument("quantile of an empty distribution");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  const double pos = static_cast<double>(n_ - 1) * p;
  const auto lo = static_cast<std::uint64_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  const double a = at_rank(lo);
  if (frac == 0.0 || lo + 1 >= n_) return a;
  const double b = at_rank(lo + 1);
  return a + (b - a) * frac;
}

Quartiles Distribution::quartiles() const { return {quantile(0.25), quantile(0.5), quantile(0.75)}; }

std::uint64_t Distribution::count_equal(double value) const {
  const auto it = runs_.find(value);
  return it == runs_.end() ? 0 : it->second;
}

std::uint64_t Distribution::count_below(double value) const {
  std::uint64_t n = 0;
  for (auto it = runs_.begin(); it != runs_.end() && it->first < value; ++it) n += it->second;
  return n;
}

std::uint64_t Distribution::count_above(double value) const {
  std::uint64_t n = 0;
  for (auto it = runs_.upper_bound(value); it != runs_.end(); ++it) n += it->second;
  return n;
}

Quartiles quartiles(std::span<const double> sample) { return Distribution(sample).quartiles(); }

BoxPlot box_plot(const std::string& label, const Distribution& dist) {
  BoxPlot b;
  b.label = label;
  b.q = dist.quartiles();
  const double iqr = b.q.q75 - b.q.q25;
  const double lo_fence = b.q.q25 - 1.5 * iqr;
  const double hi_fence = b.q.q75 + 1.5 * iqr;
  b.whisker_lo = dist.runs().lower_bound(lo_fence)->first;
  b.whisker_hi = std::prev(dist.runs().upper_bound(hi_fence))->first;
  b.outlier_count = dist.count_below(lo_fence) + dist.count_above(hi_fence);
  return b;
}

const char* to_string(SampleUnit unit) { return unit == SampleUnit::set ? "set" : "payment"; }

SampleUnit parse_sample_unit(const std::string& token) {
  if (token == "set") return SampleUnit::set;
  if (token == "payment") return SampleUnit::payment;
  throw std::invalid_argument("unknown sample unit '" + token + "' (expected set | payment)");
}

SummaryAccumulator::Entry& SummaryAccumulator::entry(const std::string& config,
                                                     const std::string& metric) {
  for (auto& e : entries_) {
    if (e.config == config && e.metric == metric) return e;
  }
  entries_.push_back(Entry{config, metric, {}, 0, 0});
  return entries_.back();
}

void SummaryAccumulator::add_epoch(const std::string& config, const std::string& metric,
                                   std::span<const std::int64_t> set_sizes,
                                   std::span<const std::int64_t> set_payments) {
  if (set_sizes.size() != set_payments.size()) {
    throw std::invalid_argument("set sizes and payment counts differ in length");
  }
  auto& e = entry(config, metric);
  ++e.epochs;
  for (std::size_t i = 0; i < set_sizes.size(); ++i) {
    const auto size = static_cast<double>(set_sizes[i]);
    const auto weight = static_cast<std::uint64_t>(set_payments[i]);
    e.dist.add(size, unit_ == SampleUnit::set ? 1 : weight);
    if (set_sizes[i] == 1) e.deanon += weight;
  }
}

void SummaryAccumulator::merge(const SummaryAccumulator& other) {
  if (other.unit_ != unit_) throw std::invalid_argument("cannot merge different sample units");
  for (const auto& o : other.entries_) {
    auto& e = entry(o.config, o.metric);
    e.dist.merge(o.dist);
    e.epochs += o.epochs;
    e.deanon += o.deanon;
  }
}

std::vector<SummaryRow> SummaryAccumulator::rows() const {
  std::vector<SummaryRow> out;
  for (const auto& e : entries_) {
    SummaryRow r;
    r.config = e.config;
    r.metric = e.metric;
    r.samples = e.dist.size();
    r.epochs = e.epochs;
    if (!e.dist.empty()) {
      r.q = e.dist.quartiles();
      r.mean = e.dist.mean();
    }
    r.deanon_count = e.epochs ? static_cast<double>(e.deanon) / static_cast<double>(e.epochs) : 0.0;
    out.push_back(r);
  }
  return out;
}

const Distribution* SummaryAccumulator::distribution(const std::string& config,
                                                     const std::string& metric) const {
  for (const auto& e : entries_) {
    if (e.config == config && e.metric == metric) return &e.dist;
  }
  return nullptr;
}

std::vector<SummaryRow> summarize(std::span<const SetRecord> records, SampleUnit unit) {
  using Key = std::tuple<std::string, std::string, std::int64_t>;
  std::map<Key, std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> epochs;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : records) {
    if (r.set_size < 1 || r.payments < 1) throw std::invalid_argument("set record with size < 1");
    auto& slot = epochs[{r.config, r.metric, r.epoch}];
    slot.first.push_back(r.set_size);
    slot.second.push_back(r.payments);
    const std::pair<std::string, std::string> ck{r.config, r.metric};
    if (std::find(order.begin(), order.end(), ck) == order.end()) order.push_back(ck);
  }
  SummaryAccumulator acc(unit);
  for (const auto& [config, metric] : order) {
    for (const auto& [key, sets] : epochs) {
      if (std::get<0>(key) == config && std::get<1>(key) == metric) {
        acc.add_epoch(config, metric, sets.first, sets.second);
      }
    }
  }
  return acc.rows();
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(v);
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << "config,metric,q25,q50,q75,mean,deanon_count,samples,epochs\n";
  for (const auto& r : rows) {
    os << r.config << ',' << r.metric << ',' << format_number(r.q.q25) << ','
       << format_number(r.q.q50) << ',' << format_number(r.q.q75) << ',' << format_number(r.mean)
       << ',' << format_number(r.deanon_count) << ',' << r.samples << ',' << r.epochs << '\n';
  }
}

void write_summary_json(std::ostream& os, std::span<const SummaryRow> rows, SampleUnit unit) {
  nlohmann::ordered_json j;
  j["schema"] = kSummarySchema;
  j["sample_unit"] = to_string(unit);
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"config", r.config},
                         {"metric", r.metric},
                         {"q25", r.q.q25},
                         {"q50", r.q.q50},
                         {"q75", r.q.q75},
                         {"mean", r.mean},
                         {"deanon_count", r.deanon_count},
                         {"samples", r.samples},
                         {"epochs", r.epochs}});
  }
  os << j.dump(2) << '\n';
}

void write_summary_table(std::ostream& os, std::span<const SummaryRow> rows) {
  std::vector<std::string> configs;
  std::vector<std::string> metrics;
  for (const auto& r : rows) {
    if (std::find(configs.begin(), configs.end(), r.config) == configs.end()) configs.push_back(r.config);
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
  }
  os << "metric";
  for (const auto& c : configs) os << ',' << c;
  os << '\n';
  for (const auto& m : metrics) {
    os << m;
    for (const auto& c : configs) {
      os << ',';
      for (const auto& r : rows) {
        if (r.config == c && r.metric == m && r.samples > 0) {
          os << format_number(r.q.q25) << ' ' << format_number(r.q.q50) << ' ' << format_number(r.q.q75);
        }
      }
    }
    os << '\n';
  }
}

void write_box_plots(std::ostream& os, std::span<const BoxPlot> plots) {
  os << "label,q25,q50,q75,whisker_lo,whisker_hi,outlier_count\n";
  for (const auto& b : plots) {
    os << b.label << ',' << format_number(b.q.q25) << ',' << format_number(b.q.q50) << ','
       << format_number(b.q.q75) << ',' << format_number(b.whisker_lo) << ','
       << format_number(b.whisker_hi) << ',' << b.outlier_count << '\n';
  }
}

}  // namespace anonsim
