#include <algorithm>
#include <cmath>
#include <numeric>

#include "vulncov/search.hpp"

namespace vulncov {

namespace {

std::size_t fraction_of(double fraction, std::size_t n) {
  // The epsilon keeps e.g. 0.2 * 100 from rounding up to 21.
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

double best_of(const std::vector<EvaluatedVector>& pool) {
  double best = pool.front().fitness;
  for (const auto& e : pool) best = std::min(best, e.fitness);
  return best;
}

std::vector<EvaluatedVector> evaluate_all(std::span<const CvssVector> vectors, const FitnessConfig& cfg) {
  std::vector<EvaluatedVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(evaluate(v, cfg));
  return out;
}

GaResult evolve(const FitnessConfig& fcfg, const SearchConfig& scfg, std::vector<CvssVector> population,
                Rng& rng) {
  const std::size_t n = scfg.population;
  const std::size_t elite_count = std::min(fraction_of(scfg.elite_fraction, n), n);
  const std::size_t random_count = std::min(fraction_of(scfg.random_fraction, n), n - elite_count);
  if (elite_count < n && elite_count + random_count == 0)
    throw ConfigInvalid("selection yields an empty parent pool");

  GaResult result;
  auto pool = evaluate_all(population, fcfg);
  result.best_trace.push_back(best_of(pool));

  std::vector<std::size_t> order(n);
  std::vector<CvssVector> parents;
  parents.reserve(elite_count + random_count);

  for (std::size_t gen = 0; gen < scfg.iterations; ++gen) {
    // Breeder's selection: best by fitness plus a random draw from the rest.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return pool[l].fitness < pool[r].fitness; });

    parents.clear();
    for (std::size_t k = 0; k < elite_count; ++k) parents.push_back(pool[order[k]].vector);
    for (std::size_t k = 0; k < random_count; ++k) {
      const std::size_t remaining = n - elite_count - k;
      const std::size_t pick = elite_count + k + rng.below(remaining);
      std::swap(order[elite_count + k], order[pick]);
      parents.push_back(pool[order[elite_count + k]].vector);
    }

    std::vector<CvssVector> next(parents.begin(), parents.begin() + static_cast<std::ptrdiff_t>(elite_count));
    while (next.size() < n) {
      const std::size_t p = parents.size();
      std::size_t first = rng.below(p);
      std::size_t second = first;
      if (p > 1) {
        second = rng.below(p - 1);
        if (second >= first) ++second;
      }
      CvssVector child = parents[first];
      for (std::size_t f = 0; f < kFieldCount; ++f) {
        const auto field = static_cast<Field>(f);
        if (rng.below(2)) child.set(field, parents[second].get(field));
      }
      if (rng.chance(scfg.mutation_rate)) mutate_one_field(child, rng);
      next.push_back(child);
    }

    pool = evaluate_all(next, fcfg);
    result.best_trace.push_back(best_of(pool));
  }

  result.final_pool = std::move(pool);
  return result;
}

}  // namespace

GaResult ga_run(const FitnessConfig& fcfg, const SearchConfig& scfg) {
  fcfg.validate();
  scfg.validate();
  Rng rng(scfg.seed);
  std::vector<CvssVector> population(scfg.population);
  for (auto& v : population) v = random_vector(rng);
  return evolve(fcfg, scfg, std::move(population), rng);
}

GaResult ga_run(const FitnessConfig& fcfg, const SearchConfig& scfg, std::span<const CvssVector> initial) {
  fcfg.validate();
  scfg.validate();
  if (initial.size() != scfg.population) throw ConfigInvalid("initial pool size must equal population");
  Rng rng(scfg.seed);
  return evolve(fcfg, scfg, {initial.begin(), initial.end()}, rng);
}

}  // namespace vulncov
