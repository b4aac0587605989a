#include "vulncov/coverage.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace vulncov {

CoverageReport compute_coverage(std::span<const CvssVector> pool, const PatternIndex& index,
                                std::optional<std::string_view> product_filter, MatchMode mode) {
  if (pool.empty()) throw CoverageError(CoverageError::Kind::EmptyPool, "vector pool is empty");

  std::map<std::string, ClassDetail> classes;
  for (const auto& [id, rec] : index.records()) {
    if (product_filter && !has_product(rec, *product_filter)) continue;
    auto pattern = record_pattern(rec, mode);
    if (!pattern) continue;
    auto key = pattern->to_string();
    auto& cls = classes[key];
    if (cls.pattern.empty()) {
      cls.pattern = std::move(key);
      cls.query = *pattern;
    }
    cls.cve_ids.push_back(id);  // records() iterates in CVE id order
  }
  if (classes.empty())
    throw CoverageError(CoverageError::Kind::TotalClassesZero, "no pattern classes in the filtered corpus");

  std::set<CvssVector> distinct(pool.begin(), pool.end());

  CoverageReport report;
  report.mode = mode;
  if (product_filter) report.product_filter = std::string(*product_filter);
  report.pool_size = pool.size();
  report.total_classes = classes.size();

  for (auto& [key, cls] : classes) {
    for (const auto& v : distinct)
      if (cls.query.matches(v)) cls.matched_by.push_back(v);
    std::sort(cls.matched_by.begin(), cls.matched_by.end(),
              [](const CvssVector& l, const CvssVector& r) { return l.ordinal() < r.ordinal(); });
    cls.covered = !cls.matched_by.empty();
    report.total_cves += cls.cve_ids.size();
    if (cls.covered) {
      ++report.covered_classes;
      report.selected_cves += cls.cve_ids.size();
      cls.representative = cls.cve_ids.front();
    } else {
      report.uncovered.push_back(key);
    }
    report.classes.push_back(std::move(cls));
  }

  report.coverage_ratio = static_cast<double>(report.covered_classes) / static_cast<double>(report.total_classes);
  report.space_ratio = static_cast<double>(report.covered_classes) / static_cast<double>(kVectorSpaceSize);
  return report;
}

DiversityStats diversity_summary(std::span<const CvssVector> pool) {
  if (pool.size() < 2) throw CoverageError(CoverageError::Kind::PoolTooSmall, "diversity needs at least two vectors");

  DiversityStats stats;
  stats.min = static_cast<int>(kFieldCount);
  stats.max = 0;
  std::size_t sum = 0;
  for (std::size_t a = 0; a < pool.size(); ++a) {
    for (std::size_t b = a + 1; b < pool.size(); ++b) {
      const int d = hamming(pool[a], pool[b]);
      sum += static_cast<std::size_t>(d);
      stats.min = std::min(stats.min, d);
      stats.max = std::max(stats.max, d);
      ++stats.pairs;
    }
  }
  stats.mean = static_cast<double>(sum) / static_cast<double>(stats.pairs);
  stats.distinct = std::set<CvssVector>(pool.begin(), pool.end()).size();
  return stats;
}

}  // namespace vulncov
