#include "vulncov/coverage.hpp"
#include "vulncov/search.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

namespace vulncov {
namespace {

const std::filesystem::path kData = VULNCOV_TEST_DATA;

CveRecord v3_record(std::string id, std::string_view vector, std::vector<std::string> products = {}) {
  CveRecord r;
  r.cve_id = std::move(id);
  r.v3_vector = parse_vector(vector);
  r.v3_score = base_score(*r.v3_vector);
  r.products = std::move(products);
  return r;
}

std::vector<CvssVector> all_vectors() {
  std::vector<CvssVector> out;
  for (std::size_t k = 0; k < kVectorSpaceSize; ++k) out.push_back(CvssVector::from_ordinal(k));
  return out;
}

PatternIndex four_class_index() {
  PatternIndex index;
  index.upsert(v3_record("CVE-2020-0001", "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"));
  index.upsert(v3_record("CVE-2020-0002", "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"));
  index.upsert(v3_record("CVE-2020-0003", "AV:L/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N"));
  index.upsert(v3_record("CVE-2020-0004", "AV:P/AC:H/PR:H/UI:R/S:U/C:L/I:N/A:N"));
  index.upsert(v3_record("CVE-2020-0005", "AV:A/AC:L/PR:L/UI:N/S:C/C:L/I:L/A:N"));
  return index;
}

TEST(Coverage, HalfOfFourClasses) {
  const auto index = four_class_index();
  const std::vector<CvssVector> pool{parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
                                     parse_vector("AV:L/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N"),
                                     parse_vector("AV:L/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N"),
                                     parse_vector("AV:N/AC:H/PR:H/UI:R/S:U/C:N/I:N/A:L")};
  const auto report = compute_coverage(pool, index, std::nullopt, MatchMode::Exact);
  EXPECT_EQ(report.total_classes, 4u);
  EXPECT_EQ(report.covered_classes, 2u);
  EXPECT_DOUBLE_EQ(report.coverage_ratio, 0.5);
  EXPECT_DOUBLE_EQ(report.space_ratio, 2.0 / 2592.0);
  EXPECT_EQ(report.pool_size, 4u);
  EXPECT_EQ(report.total_cves, 5u);
  EXPECT_EQ(report.selected_cves, 3u);
  EXPECT_EQ(report.uncovered.size(), 2u);

  const auto it = std::find_if(report.classes.begin(), report.classes.end(), [](const ClassDetail& c) {
    return c.pattern == "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H";
  });
  ASSERT_NE(it, report.classes.end());
  EXPECT_EQ(it->representative, "CVE-2020-0001");
  EXPECT_EQ(it->cve_ids, (std::vector<std::string>{"CVE-2020-0001", "CVE-2020-0002"}));
}

TEST(Coverage, FullSpacePoolCoversEverything) {
  PatternIndex index;
  ingest_feed(kData / "nvd_decoys.json", index);
  ingest_feed(kData / "nvd_api_v2.json", index);
  const auto pool = all_vectors();
  for (auto mode : {MatchMode::Exact, MatchMode::Loose}) {
    const auto report = compute_coverage(pool, index, std::nullopt, mode);
    EXPECT_EQ(report.covered_classes, report.total_classes);
    EXPECT_DOUBLE_EQ(report.coverage_ratio, 1.0);
    EXPECT_TRUE(report.uncovered.empty());
  }
}

TEST(Coverage, MysqlLocalLooseSelection) {
  PatternIndex index;
  ingest_feed(kData / "nvd_mysql_local.json", index);
  ingest_feed(kData / "nvd_decoys.json", index);
  const std::vector<CvssVector> pool{parse_vector("AV:L/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N")};
  const auto report = compute_coverage(pool, index, "mysql", MatchMode::Loose);
  // mysql records: the five local-read CVEs plus two AV:N ones.
  EXPECT_EQ(report.total_classes, 3u);
  const auto it = std::find_if(report.classes.begin(), report.classes.end(),
                               [](const ClassDetail& c) { return c.pattern == "AV:L/AC:L/PR:N/UI:*/S:*/C:L/I:N/A:N"; });
  ASSERT_NE(it, report.classes.end());
  EXPECT_TRUE(it->covered);
  EXPECT_EQ(it->cve_ids.size(), 5u);
  EXPECT_EQ(it->representative, "CVE-2006-4031");
  EXPECT_EQ(report.selected_cves, 5u);

  PatternIndex only_mysql;
  ingest_feed(kData / "nvd_mysql_local.json", only_mysql);
  const auto solo = compute_coverage(pool, only_mysql, "mysql", MatchMode::Loose);
  EXPECT_EQ(solo.total_classes, 1u);
  EXPECT_DOUBLE_EQ(solo.coverage_ratio, 1.0);
  EXPECT_EQ(solo.selected_cves, 5u);
}

TEST(Coverage, Errors) {
  const auto index = four_class_index();
  const std::vector<CvssVector> pool{parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H")};
  try {
    compute_coverage({}, index, std::nullopt, MatchMode::Exact);
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.kind(), CoverageError::Kind::EmptyPool);
  }
  try {
    compute_coverage(pool, index, "no-such-product", MatchMode::Exact);
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.kind(), CoverageError::Kind::TotalClassesZero);
  }
  PatternIndex v2_only;
  ingest_feed(kData / "nvd_mysql_local.json", v2_only);
  try {
    compute_coverage(pool, v2_only, std::nullopt, MatchMode::Exact);
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.kind(), CoverageError::Kind::TotalClassesZero);
  }
}

TEST(Coverage, MonotoneInPool) {
  PatternIndex index;
  ingest_feed(kData / "nvd_mysql_local.json", index);
  ingest_feed(kData / "nvd_decoys.json", index);
  ingest_feed(kData / "nvd_api_v2.json", index);
  Rng rng(11);
  for (auto mode : {MatchMode::Exact, MatchMode::Loose}) {
    std::vector<CvssVector> pool{random_vector(rng)};
    std::size_t prev = compute_coverage(pool, index, std::nullopt, mode).covered_classes;
    for (int step = 0; step < 300; ++step) {
      pool.push_back(random_vector(rng));
      const auto now = compute_coverage(pool, index, std::nullopt, mode).covered_classes;
      ASSERT_GE(now, prev);
      prev = now;
    }
  }
}

TEST(Coverage, ExactClassesPartitionRecords) {
  PatternIndex index;
  ingest_feed(kData / "nvd_decoys.json", index);
  ingest_feed(kData / "nvd_api_v2.json", index);
  const auto report = compute_coverage(all_vectors(), index, std::nullopt, MatchMode::Exact);
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& c : report.classes) {
    for (const auto& id : c.cve_ids) EXPECT_TRUE(seen.insert(id).second) << id;
    total += c.cve_ids.size();
    EXPECT_EQ(c.matched_by.size(), 1u);
    EXPECT_TRUE(c.query.fully_constrained());
  }
  std::size_t v3_records = 0;
  for (const auto& [id, rec] : index.records()) v3_records += rec.v3_vector.has_value();
  EXPECT_EQ(total, v3_records);
  EXPECT_EQ(report.total_cves, v3_records);
}

TEST(Coverage, ReportIsConsistent) {
  PatternIndex index;
  ingest_feed(kData / "nvd_mysql_local.json", index);
  ingest_feed(kData / "nvd_decoys.json", index);
  ingest_feed(kData / "nvd_api_v2.json", index);
  SearchConfig scfg;
  scfg.seed = 3;
  std::vector<CvssVector> pool;
  for (const auto& e : ga_run(FitnessConfig{}, scfg).final_pool) pool.push_back(e.vector);

  for (auto mode : {MatchMode::Exact, MatchMode::Loose}) {
    const auto r = compute_coverage(pool, index, std::nullopt, mode);
    std::size_t covered = 0, selected = 0;
    for (const auto& c : r.classes) {
      covered += c.covered;
      if (c.covered) selected += c.cve_ids.size();
      EXPECT_EQ(c.covered, !c.representative.empty());
      if (c.covered) EXPECT_EQ(c.representative, c.cve_ids.front());
      for (const auto& v : c.matched_by) EXPECT_TRUE(c.query.matches(v));
    }
    EXPECT_EQ(covered, r.covered_classes);
    EXPECT_EQ(selected, r.selected_cves);
    EXPECT_EQ(r.uncovered.size(), r.total_classes - r.covered_classes);
    EXPECT_LE(r.coverage_ratio, 1.0);
    EXPECT_TRUE(std::is_sorted(r.classes.begin(), r.classes.end(),
                               [](const ClassDetail& a, const ClassDetail& b) { return a.pattern < b.pattern; }));
  }
}

TEST(Diversity, Examples) {
  const auto v = parse_vector("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
  const std::vector<CvssVector> same{v, v, v};
  const auto d = diversity_summary(same);
  EXPECT_DOUBLE_EQ(d.mean, 0.0);
  EXPECT_EQ(d.min, 0);
  EXPECT_EQ(d.max, 0);
  EXPECT_EQ(d.distinct, 1u);
  EXPECT_EQ(d.pairs, 3u);

  const std::vector<CvssVector> opposite{v, parse_vector("AV:L/AC:H/PR:L/UI:R/S:C/C:L/I:N/A:N")};
  const auto o = diversity_summary(opposite);
  EXPECT_DOUBLE_EQ(o.mean, 8.0);
  EXPECT_EQ(o.min, 8);
  EXPECT_EQ(o.max, 8);
  EXPECT_EQ(o.distinct, 2u);

  try {
    diversity_summary(std::span<const CvssVector>(same.data(), 1));
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.kind(), CoverageError::Kind::PoolTooSmall);
  }
}

TEST(Diversity, GaSeedRegression) {
  SearchConfig scfg;
  scfg.seed = 42;
  std::vector<CvssVector> pool;
  for (const auto& e : ga_run(FitnessConfig{}, scfg).final_pool) pool.push_back(e.vector);
  const auto d = diversity_summary(pool);
  EXPECT_EQ(d.pairs, 4950u);
  // Recorded at first build.
  EXPECT_NEAR(d.mean, 3.18, 1e-9);
  EXPECT_EQ(d.distinct, 53u);
}

}  // namespace
}  // namespace vulncov
