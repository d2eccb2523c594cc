#include "anonsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "csv.hpp"

namespace anonsim {

void SimConfig::validate() const {
  if (users < 1) throw std::invalid_argument("users must be >= 1");
  if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
  if (epoch_len < 1) throw std::invalid_argument("epoch length must be >= 1 tick");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (warmup_ticks < 0) throw std::invalid_argument("warm-up must be >= 0 ticks");
}

Tick default_warmup(double lambda) {
  return std::max<Tick>(static_cast<Tick>(std::ceil(10.0 * lambda)), 500);
}

double seconds_per_tick(const SimConfig& config, double payments_per_day) {
  if (!(payments_per_day > 0.0)) throw std::invalid_argument("payments per day must be > 0");
  if (config.users < 1 || !(config.lambda > 0.0)) {
    throw std::invalid_argument("users and lambda must be positive");
  }
  const double payments_per_tick = static_cast<double>(config.users) / config.lambda;
  const double ticks_per_day = payments_per_day / payments_per_tick;
  return 86400.0 / ticks_per_day;
}

void check_stream(std::span<const Payment> payments) {
  std::unordered_set<PaymentId> ids;
  ids.reserve(payments.size());
  for (std::size_t i = 0; i < payments.size(); ++i) {
    if (i > 0 && payments[i].time < payments[i - 1].time) {
      throw std::invalid_argument("payments not sorted by time at index " + std::to_string(i));
    }
    if (!ids.insert(payments[i].id).second) {
      throw std::invalid_argument("duplicate payment id " + std::to_string(payments[i].id));
    }
  }
}

void write_payments_csv(std::ostream& os, std::span<const Payment> payments, bool header) {
  if (header) os << "id,time,sender,receiver,value\n";
  for (const auto& p : payments) {
    os << p.id << ',' << p.time << ',' << p.sender << ',';
    if (p.receiver) os << *p.receiver;
    os << ',' << p.value << '\n';
  }
}

std::vector<Payment> read_payments_csv(std::istream& is) {
  std::vector<Payment> out;
  std::string line;
  std::size_t lineno = 0;
  if (!csv::next_line(is, line)) return out;
  ++lineno;
  if (csv::trim(line) != "id,time,sender,receiver,value") {
    throw DataError("expected header 'id,time,sender,receiver,value'", lineno);
  }
  while (csv::next_line(is, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 5) throw DataError("expected 5 fields", lineno);
    Payment p;
    p.id = csv::parse_number<PaymentId>(fields[0], lineno, "id");
    p.time = csv::parse_number<Tick>(fields[1], lineno, "time");
    p.sender = csv::parse_number<UserId>(fields[2], lineno, "sender");
    if (!csv::trim(fields[3]).empty()) {
      p.receiver = csv::parse_number<UserId>(fields[3], lineno, "receiver");
    }
    p.value = csv::parse_number<Usd>(fields[4], lineno, "value");
    if (p.time < 0) throw DataError("negative time", lineno);
    if (p.value < 1) throw DataError("value must be >= 1", lineno);
    if (p.receiver && *p.receiver == p.sender) throw DataError("sender equals receiver", lineno);
    if (!out.empty() && p.time < out.back().time) throw DataError("payments not sorted by time", lineno);
    out.push_back(p);
  }
  return out;
}

}  // namespace anonsim
