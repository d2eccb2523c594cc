#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anonsim/core.hpp"
#include "anonsim/epoch_anon.hpp"
#include "anonsim/stats.hpp"
#include "anonsim/synthgen.hpp"

namespace anonsim {

struct PayMoreSummary {
  Distribution positive_costs;
  std::uint64_t zero_cost = 0;
  std::uint64_t no_match = 0;

  void merge(const PayMoreSummary& other);
};

struct EpochAnalysis {
  std::vector<BucketStrategy> strategies{BucketStrategy::identity()};
  bool all_users = false;
  bool active = true;
  bool pay_more = false;
  std::uint32_t users = 0;  // for the all-users metric
  SampleUnit unit = SampleUnit::set;
};

struct EpochResults {
  SummaryAccumulator summary;
  PayMoreSummary pay_more;

  explicit EpochResults(SampleUnit unit = SampleUnit::set) : summary(unit) {}
  void merge(const EpochResults& other);
};

// Runs the configured metrics over one epoch and accumulates them under `label`.
// Per-payment records are appended when `records` is non-null.
void analyze_epoch(std::span<const Payment> epoch, const EpochAnalysis& analysis,
                   const std::string& label, EpochResults& results,
                   std::vector<EpochAnonRecord>* records = nullptr);

// Partitions a stream into epochs and analyzes each one; warm-up payments are skipped.
EpochResults analyze_stream(std::span<const Payment> stream, Tick epoch_len,
                            const EpochAnalysis& analysis, const std::string& label,
                            std::vector<EpochAnonRecord>* records = nullptr);

struct EpochExperiment {
  SimConfig config;
  std::int64_t epochs_per_rep = 100;
  EpochAnalysis analysis;
  std::string label = "run";
  unsigned threads = 0;  // 0 = hardware concurrency
};

// First epoch boundary at or after the end of warm-up.
Tick measurement_start(const SimConfig& config);

// `config.reps` independent repetitions, each generating a fresh stream and
// measuring `epochs_per_rep` full epochs after warm-up. Repetitions are pooled
// in repetition order, so the result does not depend on the thread count.
EpochResults run_epoch_experiment(const EpochExperiment& experiment);

// Generates one repetition and returns the first `count` measured payments.
std::vector<Payment> generate_measured(const SimConfig& config, std::uint64_t count, int rep = 0);

}  // namespace anonsim
