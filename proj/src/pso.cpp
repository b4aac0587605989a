#include <algorithm>
#include <limits>

#include "vulncov/search.hpp"

namespace vulncov {

namespace {

// Particles are discrete: velocity is the Hamming distance to the swarm's
// best position, and movement is a field mutation rather than a vector add.
PsoResult fly(const FitnessConfig& fcfg, const SearchConfig& scfg, std::span<const CvssVector> initial,
              Rng& rng, const PsoObserver& observer) {
  std::vector<Particle> swarm;
  swarm.reserve(initial.size());
  for (const auto& v : initial) swarm.push_back({v, v, kPsoFitnessCeiling, 0});

  PsoResult result;
  double gbest_fitness = kPsoFitnessCeiling;
  CvssVector gbest_position = swarm.front().position;
  bool gbest_set = false;
  double best_raw = std::numeric_limits<double>::infinity();

  std::vector<int> previous(swarm.size());
  std::vector<std::size_t> differing;
  differing.reserve(kFieldCount);

  for (std::size_t iter = 0; iter < scfg.iterations; ++iter) {
    std::size_t counter = 0;
    std::vector<Score> scores(swarm.size());

    for (std::size_t k = 0; k < swarm.size(); ++k) {
      auto& p = swarm[k];
      const auto e = evaluate(p.position, fcfg);
      scores[k] = e.score;
      best_raw = std::min(best_raw, e.fitness);
      const double clamped = std::min(e.fitness, kPsoFitnessCeiling);
      if (clamped < p.pbest_fitness) {
        p.pbest_fitness = clamped;
        p.pbest_position = p.position;
      }
    }

    auto leader = std::min_element(swarm.begin(), swarm.end(), [](const Particle& l, const Particle& r) {
      return l.pbest_fitness < r.pbest_fitness;
    });
    if (!gbest_set || leader->pbest_fitness < gbest_fitness) {
      gbest_fitness = leader->pbest_fitness;
      gbest_position = leader->pbest_position;
      gbest_set = true;
    }

    for (std::size_t k = 0; k < swarm.size(); ++k) {
      previous[k] = swarm[k].velocity;
      swarm[k].velocity = hamming(swarm[k].position, gbest_position);
      if (scores[k] == fcfg.best || swarm[k].velocity == 0) ++counter;
    }
    result.counters.push_back(counter);
    result.best_trace.push_back(gbest_fitness);
    if (observer) observer(iter, swarm, gbest_fitness, gbest_position);

    for (std::size_t k = 0; k < swarm.size(); ++k) {
      auto& p = swarm[k];
      if (p.velocity > previous[k]) {
        mutate_one_field(p.position, rng);
      } else if (p.velocity == 0) {
        if (rng.chance(scfg.kick_probability)) mutate_one_field(p.position, rng);
      } else if (scfg.pso_variant == PsoVariant::Attract) {
        differing.clear();
        for (std::size_t f = 0; f < kFieldCount; ++f)
          if (p.position.get(static_cast<Field>(f)) != gbest_position.get(static_cast<Field>(f)))
            differing.push_back(f);
        const auto field = static_cast<Field>(differing[rng.below(differing.size())]);
        p.position.set(field, gbest_position.get(field));
      }
    }
  }

  result.final_pool.reserve(swarm.size());
  for (const auto& p : swarm) {
    result.final_pool.push_back(evaluate(p.position, fcfg));
    best_raw = std::min(best_raw, result.final_pool.back().fitness);
  }
  result.best_fitness = best_raw;
  result.swarm = std::move(swarm);
  return result;
}

}  // namespace

PsoResult pso_run(const FitnessConfig& fcfg, const SearchConfig& scfg, const PsoObserver& observer) {
  fcfg.validate();
  scfg.validate();
  Rng rng(scfg.seed);
  std::vector<CvssVector> initial(scfg.population);
  for (auto& v : initial) v = random_vector(rng);
  return fly(fcfg, scfg, initial, rng, observer);
}

PsoResult pso_run(const FitnessConfig& fcfg, const SearchConfig& scfg, std::span<const CvssVector> initial,
                  const PsoObserver& observer) {
  fcfg.validate();
  scfg.validate();
  if (initial.size() != scfg.population) throw ConfigInvalid("initial swarm size must equal population");
  Rng rng(scfg.seed);
  return fly(fcfg, scfg, initial, rng, observer);
}

}  // namespace vulncov
