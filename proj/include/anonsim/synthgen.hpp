#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "anonsim/core.hpp"

namespace anonsim {

using Rng = std::mt19937_64;

// Lognormal payment values: median e^log_median, log-space sigma.
struct ValueModel {
  double log_median = std::log(84.0);
  double log_sigma = 2.4;
};

// Maps a standard-normal draw to a whole-USD value (half away from zero, min 1).
Usd value_from_normal(const ValueModel& model, double z);
Usd sample_value(const ValueModel& model, Rng& rng);

// Draws the gap in ticks until a user's next send.
using GapSampler = std::function<Tick(Rng&)>;

GapSampler poisson_gaps(double lambda);
GapSampler fixed_gaps(Tick gap);

// Independent, reproducible seed for repetition `rep` of a run seeded with `seed`.
std::uint64_t rep_seed(std::uint64_t seed, int rep);

// Tick-by-tick payment generator. Every user sends at t0, t0+g1, t0+g1+g2, ...
// where t0 and the gaps come from the gap sampler. Within a tick payments are
// ordered by sender id; a zero gap re-queues the sender in the same tick.
class StreamGenerator {
 public:
  StreamGenerator(const SimConfig& config, Rng rng, ValueModel values = {}, GapSampler gaps = {});

  Tick now() const { return now_; }
  std::uint64_t emitted() const { return next_id_; }

  // Appends every payment with time in [now(), end) to `out` and advances.
  void advance_to(Tick end, std::vector<Payment>& out);

 private:
  void schedule(UserId user, Tick at);
  void emit_tick(std::vector<Payment>& out);

  SimConfig config_;
  Rng rng_;
  ValueModel values_;
  GapSampler gaps_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Tick now_ = 0;
  PaymentId next_id_ = 0;
  std::vector<std::vector<UserId>> ring_;
  using Pending = std::pair<Tick, UserId>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> overflow_;
  std::vector<UserId> due_;
};

// Whole stream up to (excluding) `horizon`, warm-up payments included and flagged.
std::vector<Payment> generate_stream(const SimConfig& config, Tick horizon, Rng rng,
                                     GapSampler gaps = {});

}  // namespace anonsim
