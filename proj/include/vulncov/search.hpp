#pragma once

/// @file search.hpp
/// @brief Windowed CVSS fitness plus the GA and discrete PSO engines that
/// evolve pools of base vectors toward a target severity.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vulncov/cvss.hpp"

namespace vulncov {

/// Thrown for out-of-range search or fitness parameters.
class ConfigInvalid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FitnessConfig {
  Score window_lo = Score::from_tenths(20);
  Score window_hi = Score::from_tenths(55);
  double penalty = 100.0;
  Score best = Score::from_tenths(20);

  void validate() const;
};

enum class PsoVariant : std::uint8_t { Classic, Attract };

std::string_view pso_variant_name(PsoVariant v) noexcept;
std::optional<PsoVariant> parse_pso_variant(std::string_view name) noexcept;

struct SearchConfig {
  std::size_t population = 100;
  std::size_t iterations = 50;
  std::uint64_t seed = 0;
  double elite_fraction = 0.20;
  double random_fraction = 0.10;
  double mutation_rate = 0.20;
  PsoVariant pso_variant = PsoVariant::Classic;
  double kick_probability = 0.10;

  void validate() const;
};

/// Score if it lies inside the (inclusive) window, otherwise the penalty.
double fitness(const CvssVector& v, const FitnessConfig& cfg) noexcept;

/// Portable draws on top of mt19937_64, whose output sequence is fixed by
/// the standard. Distribution objects are not, so bounded draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform double in [0, 1) with 53 random bits.
  double unit();
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Each field drawn independently and uniformly from its domain.
CvssVector random_vector(Rng& rng);

/// Reassigns one uniformly chosen field to a uniformly chosen different value.
void mutate_one_field(CvssVector& v, Rng& rng);

struct EvaluatedVector {
  CvssVector vector;
  Score score;
  double fitness = 0.0;
};

EvaluatedVector evaluate(const CvssVector& v, const FitnessConfig& cfg) noexcept;

struct GaResult {
  std::vector<EvaluatedVector> final_pool;
  /// Best fitness of the initial pool followed by one entry per generation.
  std::vector<double> best_trace;
};

GaResult ga_run(const FitnessConfig& fcfg, const SearchConfig& scfg);
/// Same, starting from a caller-provided pool (size must equal population).
GaResult ga_run(const FitnessConfig& fcfg, const SearchConfig& scfg,
                std::span<const CvssVector> initial);

struct Particle {
  CvssVector position;
  CvssVector pbest_position;
  double pbest_fitness = 10.0;
  int velocity = 0;
};

/// Called once per iteration after pbest/gbest/velocity refresh and before
/// movement.
using PsoObserver = std::function<void(std::size_t iteration, std::span<const Particle> swarm,
                                       double gbest_fitness, const CvssVector& gbest_position)>;

struct PsoResult {
  std::vector<EvaluatedVector> final_pool;
  std::vector<Particle> swarm;
  /// Particles with score == best or velocity == 0, one entry per iteration.
  std::vector<std::size_t> counters;
  /// gbest fitness after each iteration's refresh.
  std::vector<double> best_trace;
  /// Best raw (unclamped) fitness over every position evaluated.
  double best_fitness = 0.0;
};

/// Cap applied to fitness for pbest/gbest bookkeeping.
inline constexpr double kPsoFitnessCeiling = 10.0;

PsoResult pso_run(const FitnessConfig& fcfg, const SearchConfig& scfg,
                  const PsoObserver& observer = {});
PsoResult pso_run(const FitnessConfig& fcfg, const SearchConfig& scfg,
                  std::span<const CvssVector> initial, const PsoObserver& observer = {});

struct ScoredVector {
  CvssVector vector;
  Score score;
};

/// All 2592 vectors with exact scores, in canonical (ordinal) order.
std::vector<ScoredVector> enumerate_all();

/// Lowest fitness any vector can reach under cfg.
double optimum_fitness(const FitnessConfig& cfg);

enum class Algorithm : std::uint8_t { Ga, Pso };

std::string_view algorithm_name(Algorithm a) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

inline constexpr std::size_t kBucketCount = 4;
inline constexpr std::array<std::string_view, kBucketCount> kBucketLabels{"[2.0]", "(2.0,3.0]",
                                                                         "(3.0,4.0]", "(4.0,5.0]"};

/// Score distribution of flattened final pools. Members scoring in
/// [2.0, 5.0] fall into four disjoint buckets; the rest are out of range.
struct Histogram {
  std::array<std::size_t, kBucketCount> counts{};
  std::array<double, kBucketCount> percent{};
  std::size_t in_range = 0;
  std::size_t out_of_range = 0;
  double out_of_range_fraction = 0.0;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Histogram bucket_histogram(std::span<const std::vector<EvaluatedVector>> pools);

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double best_fitness = 0.0;
  std::vector<EvaluatedVector> pool;
  std::vector<double> best_trace;
  std::vector<std::size_t> counters;  // PSO only
};

struct PoolStats {
  Algorithm algorithm = Algorithm::Ga;
  std::vector<RunRecord> runs;
  Histogram histogram;
};

/// Runs `runs` independent searches with seeds scfg.seed, scfg.seed + 1, ...
/// Runs may execute on up to `threads` workers (0 = hardware concurrency);
/// results are ordered by run index, so the output does not depend on it.
PoolStats run_batch(Algorithm algorithm, const FitnessConfig& fcfg, const SearchConfig& scfg,
                    std::size_t runs, unsigned threads = 0);

}  // namespace vulncov
