#include <algorithm>
#include <atomic>
#include <thread>

#include "vulncov/search.hpp"

namespace vulncov {

std::vector<ScoredVector> enumerate_all() {
  std::vector<ScoredVector> out;
  out.reserve(kVectorSpaceSize);
  for (std::size_t n = 0; n < kVectorSpaceSize; ++n) {
    const auto v = CvssVector::from_ordinal(n);
    out.push_back({v, base_score(v)});
  }
  return out;
}

double optimum_fitness(const FitnessConfig& cfg) {
  double best = cfg.penalty;
  for (std::size_t n = 0; n < kVectorSpaceSize; ++n)
    best = std::min(best, fitness(CvssVector::from_ordinal(n), cfg));
  return best;
}

Histogram bucket_histogram(std::span<const std::vector<EvaluatedVector>> pools) {
  if (pools.empty()) throw EmptyInput("histogram needs at least one run");

  Histogram h;
  std::size_t total = 0;
  for (const auto& pool : pools) {
    for (const auto& member : pool) {
      ++total;
      const int t = member.score.tenths();
      if (t < 20 || t > 50) {
        ++h.out_of_range;
        continue;
      }
      ++h.in_range;
      if (t == 20) ++h.counts[0];
      else if (t <= 30) ++h.counts[1];
      else if (t <= 40) ++h.counts[2];
      else ++h.counts[3];
    }
  }
  if (total == 0) throw EmptyInput("histogram needs at least one pool member");

  for (std::size_t b = 0; b < kBucketCount; ++b)
    h.percent[b] = h.in_range ? 100.0 * static_cast<double>(h.counts[b]) / static_cast<double>(h.in_range) : 0.0;
  h.out_of_range_fraction = static_cast<double>(h.out_of_range) / static_cast<double>(total);
  return h;
}

namespace {

RunRecord single_run(Algorithm algorithm, const FitnessConfig& fcfg, SearchConfig scfg, std::size_t index) {
  scfg.seed += index;
  RunRecord rec;
  rec.index = index;
  rec.seed = scfg.seed;
  if (algorithm == Algorithm::Ga) {
    auto r = ga_run(fcfg, scfg);
    rec.best_fitness = r.best_trace.back();
    rec.pool = std::move(r.final_pool);
    rec.best_trace = std::move(r.best_trace);
  } else {
    auto r = pso_run(fcfg, scfg);
    rec.best_fitness = r.best_fitness;
    rec.pool = std::move(r.final_pool);
    rec.best_trace = std::move(r.best_trace);
    rec.counters = std::move(r.counters);
  }
  return rec;
}

}  // namespace

PoolStats run_batch(Algorithm algorithm, const FitnessConfig& fcfg, const SearchConfig& scfg, std::size_t runs,
                    unsigned threads) {
  fcfg.validate();
  scfg.validate();
  if (runs == 0) throw EmptyInput("at least one run is required");

  PoolStats stats;
  stats.algorithm = algorithm;
  stats.runs.resize(runs);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < runs;) {
          try {
            stats.runs[k] = single_run(algorithm, fcfg, scfg, k);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<EvaluatedVector>> pools;
  pools.reserve(runs);
  for (const auto& r : stats.runs) pools.push_back(r.pool);
  stats.histogram = bucket_histogram(pools);
  return stats;
}

}  // namespace vulncov
