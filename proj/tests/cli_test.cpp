#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kData = VULNCOV_TEST_DATA;

struct Result {
  int exit_code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string("\"") + VULNCOV_CLI + "\" " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("vulncov-cli-") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return "\"" + (dir_ / name).string() + "\""; }
  fs::path dir_;
};

TEST_F(Cli, ScoreCritical) {
  const auto r = run("score AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "9.8 Critical\nAV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H\n");
}

TEST_F(Cli, ScoreLowAndPrefix) {
  const auto r = run("score CVSS:3.1/AV:P/AC:H/PR:N/UI:N/S:U/C:L/I:N/A:N");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "2.0 Low");
}

TEST_F(Cli, ScoreRejectsBadVector) {
  EXPECT_EQ(run("score AV:X/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H").exit_code, 2);
  EXPECT_EQ(run("score AV:N/AC:L").exit_code, 2);
  EXPECT_EQ(run("bogus-subcommand").exit_code, 2);
  EXPECT_EQ(run("").exit_code, 2);
}

TEST_F(Cli, GenerateIsDeterministic) {
  ASSERT_EQ(run("generate --algo ga --runs 4 --seed 9 --out " + path("a.json") + " --csv " + path("a.csv")).exit_code, 0);
  ASSERT_EQ(run("generate --algo ga --runs 4 --seed 9 --threads 1 --out " + path("b.json")).exit_code, 0);
  const auto a = slurp(dir_ / "a.json");
  EXPECT_FALSE(a.empty());
  // Only the recorded output paths differ.
  const auto doc_a = json::parse(a), doc_b = json::parse(slurp(dir_ / "b.json"));
  EXPECT_EQ(doc_a.at("runs"), doc_b.at("runs"));
  EXPECT_EQ(doc_a.at("histogram"), doc_b.at("histogram"));
  ASSERT_EQ(run("generate --algo ga --runs 4 --seed 9 --out " + path("a2.json")).exit_code, 0);
  auto again = json::parse(slurp(dir_ / "a2.json"));
  again["manifest"]["outputs"] = doc_a["manifest"]["outputs"];
  EXPECT_EQ(again.dump(2) + "\n", a);

  EXPECT_EQ(doc_a.at("runs").size(), 4u);
  EXPECT_EQ(doc_a.at("runs")[0].at("pool").size(), 100u);
  double sum = 0;
  for (const auto& b : doc_a.at("histogram").at("buckets")) sum += b.at("percent").get<double>();
  EXPECT_NEAR(sum, 100.0, 0.1);
  EXPECT_FALSE(doc_a.at("manifest").contains("wall_clock_ms"));
  EXPECT_EQ(count_lines(slurp(dir_ / "a.csv")), 6u);
}

TEST_F(Cli, GeneratePsoHasCounters) {
  ASSERT_EQ(run("generate --algo pso --runs 2 --seed 1 --iters 10 --record-timing --out " + path("p.json")).exit_code, 0);
  const auto doc = json::parse(slurp(dir_ / "p.json"));
  EXPECT_EQ(doc.at("algorithm"), "pso");
  EXPECT_EQ(doc.at("runs")[0].at("counters").size(), 10u);
  EXPECT_TRUE(doc.at("manifest").contains("wall_clock_ms"));
}

TEST_F(Cli, GenerateRejectsBadConfig) {
  EXPECT_EQ(run("generate --pop 0 --out " + path("x.json")).exit_code, 2);
  EXPECT_EQ(run("generate --window 5:2 --out " + path("x.json")).exit_code, 2);
  EXPECT_EQ(run("generate --algo tabu --out " + path("x.json")).exit_code, 2);
  EXPECT_EQ(run("generate --mutation 1.5 --out " + path("x.json")).exit_code, 2);
}

TEST_F(Cli, EnumerateCsv) {
  const auto r = run("enumerate --format csv");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(count_lines(r.out), 2593u);
  EXPECT_NE(r.out.find("\nAV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H,9.8,Critical\n"), std::string::npos);
  EXPECT_NE(r.out.find("\nAV:P/AC:H/PR:N/UI:N/S:U/C:L/I:N/A:N,2.0,Low\n"), std::string::npos);
}

TEST_F(Cli, EnumerateJson) {
  ASSERT_EQ(run("enumerate --out " + path("all.json")).exit_code, 0);
  const auto doc = json::parse(slurp(dir_ / "all.json"));
  EXPECT_EQ(doc.at("rows").size(), 2592u);
}

TEST_F(Cli, IngestMatchCover) {
  const auto db = path("corpus.idx");
  auto r = run("ingest " + (kData / "nvd_mysql_local.json").string() + " " + (kData / "nvd_decoys.json.gz").string() +
               " --db " + db + " --timestamp 2026-01-01T00:00:00Z");
  ASSERT_EQ(r.exit_code, 0) << r.out;

  r = run("match --db " + db + " --pattern AV:L/AC:L/PR:N/S:N/C:P/I:N/A:N --mode loose --product mysql");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(count_lines(r.out), 5u);
  for (const auto* id : {"CVE-2006-4031", "CVE-2012-3160", "CVE-2014-6551", "CVE-2016-7440", "CVE-2019-14939"})
    EXPECT_NE(r.out.find(id), std::string::npos) << id;

  r = run("match --db " + db + " --pattern AV:L/AC:L/PR:N/C:L/I:N/A:N --mode loose --product mysql --format json");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out).at("count"), 5);

  r = run("match --db " + db + " --pattern AV:N --mode exact");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(count_lines(r.out), 1u);

  EXPECT_EQ(run("match --db " + db + " --pattern AV:*").exit_code, 2);
  EXPECT_EQ(run("match --db " + db + " --pattern AV:Q").exit_code, 2);
  EXPECT_EQ(run("match --db " + path("missing.idx") + " --pattern AV:N").exit_code, 1);

  ASSERT_EQ(run("enumerate --format csv --out " + path("all.csv")).exit_code, 0);
  r = run("cover --db " + db + " --pool " + path("all.csv") + " --mode loose --out " + path("cov.json"));
  ASSERT_EQ(r.exit_code, 0);
  const auto cov = json::parse(slurp(dir_ / "cov.json")).at("report");
  EXPECT_EQ(cov.at("coverage_ratio"), 1.0);
  EXPECT_EQ(cov.at("covered_classes"), cov.at("total_classes"));

  EXPECT_EQ(run("cover --db " + db + " --pool " + path("all.csv") + " --product nothing-here").exit_code, 1);
}

TEST_F(Cli, ConfigFile) {
  std::ofstream(dir_ / "gen.toml") << "[generate]\nalgo = \"pso\"\nruns = 1\niters = 3\nseed = 5\n";
  ASSERT_EQ(run("--config " + path("gen.toml") + " generate --out " + path("c.json")).exit_code, 0);
  const auto doc = json::parse(slurp(dir_ / "c.json"));
  EXPECT_EQ(doc.at("algorithm"), "pso");
  EXPECT_EQ(doc.at("runs").size(), 1u);
  EXPECT_EQ(doc.at("runs")[0].at("seed"), 5);
  EXPECT_EQ(doc.at("runs")[0].at("counters").size(), 3u);
}

}  // namespace
