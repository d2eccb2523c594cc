#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anonsim/buckets.hpp"

namespace anonsim {

using Tick = std::int64_t;
using UserId = std::uint32_t;
using PaymentId = std::uint64_t;

// Thrown for malformed input files; carries the 1-based line number when known.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Payment {
  PaymentId id = 0;
  UserId sender = 0;
  std::optional<UserId> receiver;
  Usd value = 1;
  Tick time = 0;
  // Generated before the measurement window opened; excluded from metrics.
  bool warmup = false;

  friend bool operator==(const Payment&, const Payment&) = default;
};

struct SimConfig {
  std::uint32_t users = 100'000;
  // Mean gap between two sends of one user, in ticks.
  double lambda = 50.0;
  Tick epoch_len = 10;
  int reps = 30;
  Tick warmup_ticks = 500;
  std::uint64_t seed = 1;
  BucketStrategy bucket;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// max(10 * lambda, 500) ticks.
Tick default_warmup(double lambda);

// Real seconds represented by one tick when the simulated population
// produces as many payments per day as a reference network.
double seconds_per_tick(const SimConfig& config, double payments_per_day);

// Throws std::invalid_argument if payments are not sorted by time or ids repeat.
void check_stream(std::span<const Payment> payments);

// CSV with header `id,time,sender,receiver,value`; receiver empty when absent.
void write_payments_csv(std::ostream& os, std::span<const Payment> payments, bool header = true);
std::vector<Payment> read_payments_csv(std::istream& is);

}  // namespace anonsim
