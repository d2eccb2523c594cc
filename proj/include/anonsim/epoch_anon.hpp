#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anonsim/buckets.hpp"
#include "anonsim/core.hpp"

namespace anonsim {

// All payments initiated in [start, start + length).
struct Epoch {
  std::int64_t index = 0;
  Tick start = 0;
  Tick length = 1;
  std::vector<Payment> payments;
};

// Epoch index = time / epoch_len. Empty epochs are skipped; indices are kept.
std::vector<Epoch> partition_epochs(std::span<const Payment> payments, Tick epoch_len);

enum class Metric { all, active, active_value };

const char* to_string(Metric metric);

// One anonymity set of an epoch: distinct senders and payments it covers.
struct AnonSet {
  std::int64_t size = 1;
  std::int64_t payments = 1;
};

struct EpochAnon {
  // Aligned with the input payments.
  std::vector<std::int64_t> per_payment;
  std::vector<AnonSet> sets;
};

// Every payment hides among all users of the system.
EpochAnon anon_all(std::span<const Payment> epoch, std::uint32_t users);

// Every payment hides among the distinct senders of the epoch.
EpochAnon anon_active(std::span<const Payment> epoch);

// Every payment hides among distinct senders whose bucketed value equals its own.
EpochAnon anon_active_value(std::span<const Payment> epoch, const BucketStrategy& strategy);

struct EpochAnonRecord {
  PaymentId payment_id = 0;
  Metric metric = Metric::active;
  std::int64_t set_size = 1;
  BucketStrategy strategy;
};

// "active+value" for identity values, "active+value:<token>" for bucketed ones.
std::string metric_label(Metric metric, const BucketStrategy& strategy = {});

// `payment_id,metric,set_size`
void write_records_csv(std::ostream& os, std::span<const EpochAnonRecord> records);

// Smallest value that makes each payment collide with a different sender in
// its epoch: its own value if already shared, otherwise the next higher value
// paid by someone else. Empty when no higher value exists.
std::vector<std::optional<Usd>> pay_more_targets(std::span<const Payment> epoch);

// Relative cost (target - value) / value of the pay-more strategy.
std::vector<std::optional<double>> pay_more(std::span<const Payment> epoch);

// Ticks until a payment of the same value by a different sender is initiated
// at the same tick or later; `cap` when none occurs within `cap` ticks.
std::vector<Tick> wait_time_to_match(std::span<const Payment> stream, Tick cap);

}  // namespace anonsim
