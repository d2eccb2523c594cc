#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace anonsim {

using Usd = std::int64_t;

// Rounds v up to the next multiple of k.
Usd bucket_fixed(Usd v, Usd k);

// Rounds v up to two significant digits; relative surcharge stays below 10%.
Usd bucket_cheap(Usd v);

// Rounds v up to one significant digit; relative surcharge stays below 100%.
Usd bucket_expensive(Usd v);

// Number of decimal digits minus one, i.e. floor(log10(v)) for v >= 1.
int decimal_exponent(Usd v);

// Value-transformation policy applied to every payment before value sets are
// formed. Parsed from and printed as the CLI tokens
// `none | fixed:<k> | scaled-cheap | scaled-exp`.
class BucketStrategy {
 public:
  enum class Kind { identity, fixed, scaled_cheap, scaled_expensive };

  constexpr BucketStrategy() = default;

  static BucketStrategy identity() { return BucketStrategy(Kind::identity, 1); }
  static BucketStrategy fixed(Usd step);
  static BucketStrategy scaled_cheap() { return BucketStrategy(Kind::scaled_cheap, 1); }
  static BucketStrategy scaled_expensive() { return BucketStrategy(Kind::scaled_expensive, 1); }

  // Throws std::invalid_argument on unknown tokens.
  static BucketStrategy parse(std::string_view token);

  Kind kind() const { return kind_; }
  Usd step() const { return step_; }

  Usd apply(Usd v) const;
  std::string token() const;

  friend bool operator==(const BucketStrategy&, const BucketStrategy&) = default;

 private:
  constexpr BucketStrategy(Kind kind, Usd step) : kind_(kind), step_(step) {}

  Kind kind_ = Kind::identity;
  Usd step_ = 1;
};

// (bucketed - original) / original
double relative_cost(Usd original, Usd bucketed);

}  // namespace anonsim
