#pragma once

/// @file coverage.hpp
/// @brief Vulnerability coverage: how many pattern classes of a CVE corpus
/// are hit by a generated vector pool, and which CVEs that selects.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vulncov/corpus.hpp"
#include "vulncov/cvss.hpp"

namespace vulncov {

class CoverageError : public std::runtime_error {
 public:
  enum class Kind { TotalClassesZero, EmptyPool, PoolTooSmall };

  CoverageError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ClassDetail {
  /// Canonical vector, or a normalized v2 pattern with '*' fields in loose mode.
  std::string pattern;
  PatternQuery query;
  bool covered = false;
  /// Pool vectors matching the pattern, in canonical order.
  std::vector<CvssVector> matched_by;
  /// Ordered by CVE id.
  std::vector<std::string> cve_ids;
  /// Lowest CVE id of a covered class; empty when uncovered.
  std::string representative;
};

struct CoverageReport {
  MatchMode mode = MatchMode::Exact;
  std::optional<std::string> product_filter;
  std::size_t pool_size = 0;
  std::size_t total_classes = 0;
  std::size_t covered_classes = 0;
  double coverage_ratio = 0.0;
  /// covered_classes over the full 2592-vector space, for comparison.
  double space_ratio = 0.0;
  std::size_t selected_cves = 0;
  std::size_t total_cves = 0;
  /// All classes, sorted by pattern string.
  std::vector<ClassDetail> classes;
  std::vector<std::string> uncovered;
};

CoverageReport compute_coverage(std::span<const CvssVector> pool, const PatternIndex& index,
                                std::optional<std::string_view> product_filter, MatchMode mode);

struct DiversityStats {
  double mean = 0.0;
  int min = 0;
  int max = 0;
  std::size_t distinct = 0;
  std::size_t pairs = 0;
};

/// Pairwise Hamming statistics over all unordered pairs; needs >= 2 vectors.
DiversityStats diversity_summary(std::span<const CvssVector> pool);

}  // namespace vulncov
