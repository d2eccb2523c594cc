#include "anonsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace anonsim {

void PayMoreSummary::merge(const PayMoreSummary& other) {
  positive_costs.merge(other.positive_costs);
  zero_cost += other.zero_cost;
  no_match += other.no_match;
}

void EpochResults::merge(const EpochResults& other) {
  summary.merge(other.summary);
  pay_more.merge(other.pay_more);
}

namespace {

void accumulate(const EpochAnon& anon, const std::string& label, const std::string& metric,
                EpochResults& results, std::vector<std::int64_t>& sizes,
                std::vector<std::int64_t>& counts) {
  sizes.clear();
  counts.clear();
  for (const auto& s : anon.sets) {
    sizes.push_back(s.size);
    counts.push_back(s.payments);
  }
  results.summary.add_epoch(label, metric, sizes, counts);
}

void append_records(std::span<const Payment> epoch, const EpochAnon& anon, Metric metric,
                    std::vector<EpochAnonRecord>* records, const BucketStrategy& strategy = {}) {
  if (!records) return;
  for (std::size_t i = 0; i < epoch.size(); ++i) {
    records->push_back({epoch[i].id, metric, anon.per_payment[i], strategy});
  }
}

}  // namespace

void analyze_epoch(std::span<const Payment> epoch, const EpochAnalysis& analysis,
                   const std::string& label, EpochResults& results,
                   std::vector<EpochAnonRecord>* records) {
  if (epoch.empty()) return;
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> counts;
  if (analysis.all_users) {
    const auto anon = anon_all(epoch, analysis.users);
    accumulate(anon, label, metric_label(Metric::all), results, sizes, counts);
    append_records(epoch, anon, Metric::all, records);
  }
  if (analysis.active) {
    const auto anon = anon_active(epoch);
    accumulate(anon, label, metric_label(Metric::active), results, sizes, counts);
    append_records(epoch, anon, Metric::active, records);
  }
  for (const auto& strategy : analysis.strategies) {
    const auto anon = anon_active_value(epoch, strategy);
    accumulate(anon, label, metric_label(Metric::active_value, strategy), results, sizes, counts);
    append_records(epoch, anon, Metric::active_value, records, strategy);
  }
  if (analysis.pay_more) {
    for (const auto& cost : pay_more(epoch)) {
      if (!cost) {
        ++results.pay_more.no_match;
      } else if (*cost == 0.0) {
        ++results.pay_more.zero_cost;
      } else {
        results.pay_more.positive_costs.add(*cost);
      }
    }
  }
}

EpochResults analyze_stream(std::span<const Payment> stream, Tick epoch_len,
                            const EpochAnalysis& analysis, const std::string& label,
                            std::vector<EpochAnonRecord>* records) {
  std::vector<Payment> measured;
  measured.reserve(stream.size());
  std::copy_if(stream.begin(), stream.end(), std::back_inserter(measured),
               [](const Payment& p) { return !p.warmup; });
  EpochResults results(analysis.unit);
  for (const auto& epoch : partition_epochs(measured, epoch_len)) {
    analyze_epoch(epoch.payments, analysis, label, results, records);
  }
  return results;
}

Tick measurement_start(const SimConfig& config) {
  return (config.warmup_ticks + config.epoch_len - 1) / config.epoch_len * config.epoch_len;
}

namespace {

EpochResults run_repetition(const EpochExperiment& ex, int rep) {
  StreamGenerator gen(ex.config, Rng(rep_seed(ex.config.seed, rep)));
  EpochResults results(ex.analysis.unit);
  std::vector<Payment> buffer;
  gen.advance_to(measurement_start(ex.config), buffer);
  for (std::int64_t e = 0; e < ex.epochs_per_rep; ++e) {
    buffer.clear();
    gen.advance_to(gen.now() + ex.config.epoch_len, buffer);
    analyze_epoch(buffer, ex.analysis, ex.label, results);
  }
  return results;
}

}  // namespace

EpochResults run_epoch_experiment(const EpochExperiment& ex) {
  ex.config.validate();
  if (ex.epochs_per_rep < 0) throw std::invalid_argument("epochs per repetition must be >= 0");
  const int reps = ex.config.reps;
  unsigned threads = ex.threads ? ex.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));

  std::vector<std::optional<EpochResults>> per_rep(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int rep = next++; rep < reps; rep = next++) {
      try {
        per_rep[static_cast<std::size_t>(rep)] = run_repetition(ex, rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EpochResults merged(ex.analysis.unit);
  for (auto& r : per_rep) merged.merge(*r);
  return merged;
}

std::vector<Payment> generate_measured(const SimConfig& config, std::uint64_t count, int rep) {
  StreamGenerator gen(config, Rng(rep_seed(config.seed, rep)));
  std::vector<Payment> out;
  gen.advance_to(config.warmup_ticks, out);
  out.clear();
  while (out.size() < count) gen.advance_to(gen.now() + 1, out);
  out.resize(count);
  return out;
}

}  // namespace anonsim
