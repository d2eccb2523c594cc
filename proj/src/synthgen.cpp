#include "anonsim/synthgen.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace anonsim {

Usd value_from_normal(const ValueModel& model, double z) {
  const double v = std::exp(model.log_median + model.log_sigma * z);
  if (!(v < 9.0e18)) return static_cast<Usd>(9.0e18);
  return std::max<Usd>(1, std::llround(v));
}

Usd sample_value(const ValueModel& model, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return value_from_normal(model, normal(rng));
}

GapSampler poisson_gaps(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  return [dist = std::poisson_distribution<Tick>(lambda)](Rng& rng) mutable { return dist(rng); };
}

GapSampler fixed_gaps(Tick gap) {
  if (gap < 0) throw std::invalid_argument("gap must be >= 0");
  return [gap](Rng&) { return gap; };
}

std::uint64_t rep_seed(std::uint64_t seed, int rep) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(rep + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StreamGenerator::StreamGenerator(const SimConfig& config, Rng rng, ValueModel values,
                                 GapSampler gaps)
    : config_(config), rng_(std::move(rng)), values_(values), gaps_(std::move(gaps)) {
  config_.validate();
  if (!gaps_) gaps_ = poisson_gaps(config_.lambda);
  const auto width = std::bit_ceil(static_cast<std::size_t>(std::max(64.0, 4.0 * config_.lambda + 64.0)));
  ring_.resize(width);
  for (UserId u = 0; u < config_.users; ++u) schedule(u, gaps_(rng_));
}

void StreamGenerator::schedule(UserId user, Tick at) {
  if (at < now_) throw std::logic_error("gap sampler returned a negative gap");
  if (at - now_ < static_cast<Tick>(ring_.size())) {
    ring_[static_cast<std::size_t>(at) & (ring_.size() - 1)].push_back(user);
  } else {
    overflow_.emplace(at, user);
  }
}

void StreamGenerator::emit_tick(std::vector<Payment>& out) {
  auto& slot = ring_[static_cast<std::size_t>(now_) & (ring_.size() - 1)];
  due_.swap(slot);
  slot.clear();
  while (!overflow_.empty() && overflow_.top().first == now_) {
    due_.push_back(overflow_.top().second);
    overflow_.pop();
  }
  std::sort(due_.begin(), due_.end());
  for (std::size_t i = 0; i < due_.size(); ++i) {
    const UserId u = due_[i];
    Payment p;
    p.id = next_id_++;
    p.sender = u;
    p.value = value_from_normal(values_, normal_(rng_));
    p.time = now_;
    p.warmup = now_ < config_.warmup_ticks;
    out.push_back(p);
    const Tick gap = gaps_(rng_);
    if (gap < 0) throw std::logic_error("gap sampler returned a negative gap");
    if (gap == 0) {
      due_.push_back(u);
    } else {
      schedule(u, now_ + gap);
    }
  }
  due_.clear();
}

void StreamGenerator::advance_to(Tick end, std::vector<Payment>& out) {
  while (now_ < end) {
    emit_tick(out);
    ++now_;
  }
}

std::vector<Payment> generate_stream(const SimConfig& config, Tick horizon, Rng rng,
                                     GapSampler gaps) {
  if (horizon < config.warmup_ticks) {
    throw std::invalid_argument("horizon must not precede the end of warm-up");
  }
  StreamGenerator gen(config, std::move(rng), ValueModel{}, std::move(gaps));
  std::vector<Payment> out;
  gen.advance_to(horizon, out);
  return out;
}

}  // namespace anonsim
