#include <cmath>
#include <limits>

#include "vulncov/search.hpp"

namespace vulncov {

void FitnessConfig::validate() const {
  if (window_lo > window_hi) throw ConfigInvalid("fitness window lower bound exceeds upper bound");
  if (!(penalty > 10.0)) throw ConfigInvalid("penalty must exceed the maximum score 10.0");
  if (best < window_lo || best > window_hi) throw ConfigInvalid("best score must lie inside the window");
}

void SearchConfig::validate() const {
  auto is_probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population < 2) throw ConfigInvalid("population must be at least 2");
  if (!is_probability(elite_fraction) || !is_probability(random_fraction))
    throw ConfigInvalid("selection fractions must lie in [0, 1]");
  if (elite_fraction + random_fraction > 1.0)
    throw ConfigInvalid("elite_fraction + random_fraction must not exceed 1");
  if (!is_probability(mutation_rate)) throw ConfigInvalid("mutation_rate must lie in [0, 1]");
  if (!is_probability(kick_probability)) throw ConfigInvalid("kick_probability must lie in [0, 1]");
}

std::string_view pso_variant_name(PsoVariant v) noexcept {
  return v == PsoVariant::Classic ? "classic" : "attract";
}

std::optional<PsoVariant> parse_pso_variant(std::string_view name) noexcept {
  if (name == "classic" || name == "paper") return PsoVariant::Classic;
  if (name == "attract") return PsoVariant::Attract;
  return std::nullopt;
}

std::string_view algorithm_name(Algorithm a) noexcept { return a == Algorithm::Ga ? "ga" : "pso"; }

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  if (name == "ga") return Algorithm::Ga;
  if (name == "pso") return Algorithm::Pso;
  return std::nullopt;
}

double fitness(const CvssVector& v, const FitnessConfig& cfg) noexcept {
  const Score s = base_score(v);
  if (s >= cfg.window_lo && s <= cfg.window_hi) return s.value();
  return cfg.penalty;
}

EvaluatedVector evaluate(const CvssVector& v, const FitnessConfig& cfg) noexcept {
  const Score s = base_score(v);
  const bool inside = s >= cfg.window_lo && s <= cfg.window_hi;
  return {v, s, inside ? s.value() : cfg.penalty};
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling over the largest multiple of n.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

CvssVector random_vector(Rng& rng) {
  CvssVector v;
  for (std::size_t f = 0; f < kFieldCount; ++f)
    v.set(static_cast<Field>(f), static_cast<std::uint8_t>(rng.below(kDomainSizes[f])));
  return v;
}

void mutate_one_field(CvssVector& v, Rng& rng) {
  const auto f = static_cast<Field>(rng.below(kFieldCount));
  const auto size = kDomainSizes[static_cast<std::size_t>(f)];
  // Draw from the size-1 other values by skipping over the current one.
  auto value = static_cast<std::uint8_t>(rng.below(size - 1));
  if (value >= v.get(f)) ++value;
  v.set(f, value);
}

}  // namespace vulncov
