#include "anonsim/buckets.hpp"

#include <charconv>
#include <stdexcept>

namespace anonsim {

namespace {

void require_positive(Usd v, const char* what) {
  if (v < 1) {
    throw std::invalid_argument(std::string(what) + " must be >= 1, got " + std::to_string(v));
  }
}

Usd pow10(int e) {
  Usd r = 1;
  while (e-- > 0) r *= 10;
  return r;
}

Usd round_up_to(Usd v, Usd step) { return ((v + step - 1) / step) * step; }

}  // namespace

int decimal_exponent(Usd v) {
  require_positive(v, "value");
  int e = 0;
  while (v >= 10) {
    v /= 10;
    ++e;
  }
  return e;
}

Usd bucket_fixed(Usd v, Usd k) {
  require_positive(v, "value");
  require_positive(k, "bucket size");
  return round_up_to(v, k);
}

Usd bucket_cheap(Usd v) {
  const int e = decimal_exponent(v);
  // Below 10 the divisor is 10^-1 and every integer is already a multiple of it.
  if (e == 0) return v;
  return round_up_to(v, pow10(e - 1));
}

Usd bucket_expensive(Usd v) {
  const int e = decimal_exponent(v);
  return round_up_to(v, pow10(e));
}

BucketStrategy BucketStrategy::fixed(Usd step) {
  require_positive(step, "bucket size");
  return BucketStrategy(Kind::fixed, step);
}

BucketStrategy BucketStrategy::parse(std::string_view token) {
  if (token == "none" || token == "identity") return identity();
  if (token == "scaled-cheap") return scaled_cheap();
  if (token == "scaled-exp") return scaled_expensive();
  constexpr std::string_view prefix = "fixed:";
  if (token.starts_with(prefix)) {
    const auto digits = token.substr(prefix.size());
    Usd k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 1) return fixed(k);
  }
  throw std::invalid_argument("unknown bucket strategy '" + std::string(token) +
                              "' (expected none | fixed:<k> | scaled-cheap | scaled-exp)");
}

Usd BucketStrategy::apply(Usd v) const {
  switch (kind_) {
    case Kind::identity:
      require_positive(v, "value");
      return v;
    case Kind::fixed:
      return bucket_fixed(v, step_);
    case Kind::scaled_cheap:
      return bucket_cheap(v);
    case Kind::scaled_expensive:
      return bucket_expensive(v);
  }
  return v;
}

std::string BucketStrategy::token() const {
  switch (kind_) {
    case Kind::identity:
      return "none";
    case Kind::fixed:
      return "fixed:" + std::to_string(step_);
    case Kind::scaled_cheap:
      return "scaled-cheap";
    case Kind::scaled_expensive:
      return "scaled-exp";
  }
  return "none";
}

double relative_cost(Usd original, Usd bucketed) {
  require_positive(original, "value");
  return static_cast<double>(bucketed - original) / static_cast<double>(original);
}

}  // namespace anonsim
