#include "anonsim/epoch_anon.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace anonsim {

std::vector<Epoch> partition_epochs(std::span<const Payment> payments, Tick epoch_len) {
  if (epoch_len < 1) throw std::invalid_argument("epoch length must be >= 1 tick");
  std::vector<Epoch> out;
  for (std::size_t i = 0; i < payments.size(); ++i) {
    const auto& p = payments[i];
    if (i > 0 && p.time < payments[i - 1].time) {
      throw std::invalid_argument("payments must be sorted by time");
    }
    const std::int64_t index = p.time / epoch_len;
    if (out.empty() || out.back().index != index) {
      out.push_back(Epoch{index, index * epoch_len, epoch_len, {}});
    }
    out.back().payments.push_back(p);
  }
  return out;
}

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::all:
      return "all";
    case Metric::active:
      return "active";
    case Metric::active_value:
      return "active+value";
  }
  return "?";
}

std::string metric_label(Metric metric, const BucketStrategy& strategy) {
  std::string label = to_string(metric);
  if (metric == Metric::active_value && strategy.kind() != BucketStrategy::Kind::identity) {
    label += ":" + strategy.token();
  }
  return label;
}

EpochAnon anon_all(std::span<const Payment> epoch, std::uint32_t users) {
  EpochAnon r;
  if (epoch.empty()) return r;
  r.per_payment.assign(epoch.size(), users);
  r.sets.push_back({users, static_cast<std::int64_t>(epoch.size())});
  return r;
}

EpochAnon anon_active(std::span<const Payment> epoch) {
  EpochAnon r;
  if (epoch.empty()) return r;
  std::vector<UserId> senders(epoch.size());
  std::transform(epoch.begin(), epoch.end(), senders.begin(), [](const Payment& p) { return p.sender; });
  std::sort(senders.begin(), senders.end());
  const auto distinct =
      static_cast<std::int64_t>(std::unique(senders.begin(), senders.end()) - senders.begin());
  r.per_payment.assign(epoch.size(), distinct);
  r.sets.push_back({distinct, static_cast<std::int64_t>(epoch.size())});
  return r;
}

EpochAnon anon_active_value(std::span<const Payment> epoch, const BucketStrategy& strategy) {
  EpochAnon r;
  if (epoch.empty()) return r;
  struct Item {
    Usd value;
    UserId sender;
    std::uint32_t index;
  };
  std::vector<Item> items(epoch.size());
  for (std::size_t i = 0; i < epoch.size(); ++i) {
    items[i] = {strategy.apply(epoch[i].value), epoch[i].sender, static_cast<std::uint32_t>(i)};
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.value != b.value ? a.value < b.value : a.sender < b.sender;
  });
  r.per_payment.resize(epoch.size());
  for (std::size_t lo = 0; lo < items.size();) {
    std::size_t hi = lo;
    std::int64_t distinct = 0;
    while (hi < items.size() && items[hi].value == items[lo].value) {
      if (hi == lo || items[hi].sender != items[hi - 1].sender) ++distinct;
      ++hi;
    }
    for (std::size_t k = lo; k < hi; ++k) r.per_payment[items[k].index] = distinct;
    r.sets.push_back({distinct, static_cast<std::int64_t>(hi - lo)});
    lo = hi;
  }
  return r;
}

void write_records_csv(std::ostream& os, std::span<const EpochAnonRecord> records) {
  os << "payment_id,metric,set_size\n";
  for (const auto& r : records) {
    os << r.payment_id << ',' << metric_label(r.metric, r.strategy) << ',' << r.set_size << '\n';
  }
}

std::vector<std::optional<Usd>> pay_more_targets(std::span<const Payment> epoch) {
  // Distinct values ascending; for each value either "two or more senders" or its sole sender.
  struct Group {
    Usd value;
    UserId sole_sender;
    bool shared;
  };
  std::vector<std::pair<Usd, UserId>> vs(epoch.size());
  for (std::size_t i = 0; i < epoch.size(); ++i) vs[i] = {epoch[i].value, epoch[i].sender};
  std::sort(vs.begin(), vs.end());
  std::vector<Group> groups;
  for (const auto& [v, s] : vs) {
    if (groups.empty() || groups.back().value != v) {
      groups.push_back({v, s, false});
    } else if (groups.back().sole_sender != s) {
      groups.back().shared = true;
    }
  }

  std::vector<std::optional<Usd>> out(epoch.size());
  for (std::size_t i = 0; i < epoch.size(); ++i) {
    const auto& p = epoch[i];
    auto it = std::lower_bound(groups.begin(), groups.end(), p.value,
                               [](const Group& g, Usd v) { return g.value < v; });
    if (it->shared) {
      out[i] = p.value;
      continue;
    }
    for (++it; it != groups.end(); ++it) {
      if (it->shared || it->sole_sender != p.sender) {
        out[i] = it->value;
        break;
      }
    }
  }
  return out;
}

std::vector<std::optional<double>> pay_more(std::span<const Payment> epoch) {
  const auto targets = pay_more_targets(epoch);
  std::vector<std::optional<double>> out(epoch.size());
  for (std::size_t i = 0; i < epoch.size(); ++i) {
    if (targets[i]) out[i] = relative_cost(epoch[i].value, *targets[i]);
  }
  return out;
}

std::vector<Tick> wait_time_to_match(std::span<const Payment> stream, Tick cap) {
  if (cap < 1) throw std::invalid_argument("wait cap must be >= 1 tick");
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].time < stream[i - 1].time) throw std::invalid_argument("stream must be sorted by time");
  }
  // Order by (value, time, position) so each value's payments form a time-sorted run.
  std::vector<std::uint32_t> order(stream.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return stream[a].value < stream[b].value;
  });

  std::vector<Tick> out(stream.size(), cap);
  std::vector<std::size_t> next_other;  // next run position whose sender differs from this one
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && stream[order[hi]].value == stream[order[lo]].value) ++hi;
    const auto run = std::span<const std::uint32_t>(order).subspan(lo, hi - lo);
    const std::size_t n = run.size();
    next_other.assign(n, n);
    for (std::size_t k = n; k-- > 1;) {
      const auto& cur = stream[run[k - 1]];
      next_other[k - 1] = stream[run[k]].sender != cur.sender ? k : next_other[k];
    }
    std::size_t first_of_tick = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = stream[run[k]];
      if (stream[run[first_of_tick]].time != p.time) first_of_tick = k;
      // Candidates start at the first payment initiated in the same tick.
      std::size_t j = first_of_tick;
      if (stream[run[j]].sender == p.sender) j = next_other[j];
      if (j < n) out[run[k]] = std::min(cap, stream[run[j]].time - p.time);
    }
    lo = hi;
  }
  return out;
}

}  // namespace anonsim
