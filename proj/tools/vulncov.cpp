// vulncov: command-line front end.
//
//   vulncov score "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"
//   vulncov generate --algo ga --runs 100 --seed 7 --out ga.json
//   vulncov enumerate --format csv --out all.csv
//   vulncov stats ga.json pso.json
//   vulncov ingest nvdcve-1.1-2019.json.gz --db corpus.idx
//   vulncov match --db corpus.idx --pattern "AV:L/AC:L/PR:N/C:P/I:N/A:N" --mode loose --product mysql
//   vulncov cover --db corpus.idx --pool ga.json --mode loose
//
// Exit codes: 0 success, 1 operational error, 2 usage or parse error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vulncov/corpus.hpp"
#include "vulncov/coverage.hpp"
#include "vulncov/cvss.hpp"
#include "vulncov/report.hpp"
#include "vulncov/search.hpp"

namespace {

using namespace vulncov;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot write " + path);
  out << content;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

MatchMode mode_from(const std::string& name) {
  auto m = parse_match_mode(name);
  if (!m) throw UsageError("unknown mode '" + name + "' (expected exact or loose)");
  return *m;
}

std::optional<std::string_view> filter_from(const std::string& product) {
  if (product.empty()) return std::nullopt;
  return product;
}

struct ScoreArgs {
  std::string vector;
};

int run_score(const ScoreArgs& args) {
  const auto v = parse_vector(args.vector);
  const auto s = base_score(v);
  std::cout << s.to_string() << ' ' << severity_name(s.band()) << '\n' << to_canonical_string(v) << '\n';
  return kExitOk;
}

struct GenerateArgs {
  std::string algo = "ga";
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::size_t population = 100;
  std::size_t iterations = 50;
  std::string window = "2.0:5.5";
  double penalty = 100.0;
  double elite_fraction = 0.20;
  double random_fraction = 0.10;
  double mutation_rate = 0.20;
  std::string pso_variant = "classic";
  double kick_probability = 0.10;
  unsigned threads = 0;
  std::string out = "-";
  std::string csv;
  bool record_timing = false;
};

std::pair<Score, Score> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigInvalid("window must be lo:hi, got '" + text + "'");
  try {
    std::size_t used_lo = 0, used_hi = 0;
    const auto lo_text = text.substr(0, colon), hi_text = text.substr(colon + 1);
    const double lo = std::stod(lo_text, &used_lo);
    const double hi = std::stod(hi_text, &used_hi);
    if (used_lo != lo_text.size() || used_hi != hi_text.size()) throw std::invalid_argument(text);
    return {Score::from_double(lo), Score::from_double(hi)};
  } catch (const std::logic_error&) {
    throw ConfigInvalid("window bounds must be scores in [0, 10], got '" + text + "'");
  }
}

int run_generate(const GenerateArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const auto algo = parse_algorithm(args.algo);
  if (!algo) throw UsageError("unknown algorithm '" + args.algo + "' (expected ga or pso)");
  const auto variant = parse_pso_variant(args.pso_variant);
  if (!variant) throw UsageError("unknown PSO variant '" + args.pso_variant + "' (expected classic or attract)");
  if (args.runs == 0) throw ConfigInvalid("--runs must be at least 1");

  FitnessConfig fcfg;
  std::tie(fcfg.window_lo, fcfg.window_hi) = parse_window(args.window);
  fcfg.penalty = args.penalty;
  fcfg.best = fcfg.window_lo;

  SearchConfig scfg;
  scfg.population = args.population;
  scfg.iterations = args.iterations;
  scfg.seed = args.seed;
  scfg.elite_fraction = args.elite_fraction;
  scfg.random_fraction = args.random_fraction;
  scfg.mutation_rate = args.mutation_rate;
  scfg.pso_variant = *variant;
  scfg.kick_probability = args.kick_probability;

  const auto stats = run_batch(*algo, fcfg, scfg, args.runs, args.threads);

  RunManifest manifest;
  manifest.subcommand = "generate";
  manifest.seed = args.seed;
  manifest.config = {{"algorithm", args.algo}, {"runs", args.runs}, {"fitness", to_json(fcfg)}, {"search", to_json(scfg)}};
  manifest.outputs.push_back(args.out);
  if (!args.csv.empty()) manifest.outputs.push_back(args.csv);
  if (args.record_timing)
    manifest.wall_clock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

  write_output(args.out, dump(pool_document(stats, fcfg, scfg, manifest)));
  if (!args.csv.empty()) write_output(args.csv, histogram_csv(stats.histogram));
  return kExitOk;
}

struct EnumerateArgs {
  std::string out = "-";
  std::string format = "json";
};

int run_enumerate(const EnumerateArgs& args) {
  const auto rows = enumerate_all();
  if (args.format == "csv") {
    write_output(args.out, enumerate_csv(rows));
  } else if (args.format == "json") {
    RunManifest manifest;
    manifest.subcommand = "enumerate";
    manifest.config = {{"format", args.format}};
    manifest.outputs.push_back(args.out);
    write_output(args.out, dump(enumerate_document(rows, manifest)));
  } else {
    throw UsageError("unknown format '" + args.format + "' (expected json or csv)");
  }
  return kExitOk;
}

struct StatsArgs {
  std::vector<std::string> pools;
  std::string out = "-";
  std::string csv;
};

int run_stats(const StatsArgs& args) {
  json docs = json::array();
  std::string csv;
  for (const auto& path : args.pools) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot open " + path);
    const json doc = json::parse(in);
    const auto pools = pools_from_document(doc);
    const auto histogram = bucket_histogram(pools);

    json diversity = json::array();
    double mean_sum = 0.0;
    for (const auto& pool : pools) {
      std::vector<CvssVector> vectors;
      for (const auto& e : pool) vectors.push_back(e.vector);
      if (vectors.size() < 2) continue;
      const auto d = diversity_summary(vectors);
      mean_sum += d.mean;
      diversity.push_back(to_json(d));
    }
    docs.push_back({{"input", path},
                    {"algorithm", doc.value("algorithm", "")},
                    {"runs", pools.size()},
                    {"optimum_hits", doc.at("summary").at("optimum_hits")},
                    {"histogram", to_json(histogram)},
                    {"mean_pairwise_hamming", diversity.empty() ? json(nullptr) : json(mean_sum / diversity.size())},
                    {"diversity", diversity}});
    if (!args.csv.empty()) {
      csv += "# " + path + "\n";
      csv += histogram_csv(histogram);
    }
  }

  RunManifest manifest;
  manifest.subcommand = "stats";
  manifest.inputs = args.pools;
  manifest.outputs.push_back(args.out);
  write_output(args.out, dump({{"format", "vulncov-stats"}, {"version", 1}, {"manifest", to_json(manifest)}, {"documents", docs}}));
  if (!args.csv.empty()) write_output(args.csv, csv);
  return kExitOk;
}

struct IngestArgs {
  std::vector<std::string> feeds;
  std::string db;
  std::string timestamp;
};

int run_ingest(const IngestArgs& args) {
  PatternIndex index;
  if (std::filesystem::exists(args.db)) index = load_index(args.db);

  for (const auto& feed : args.feeds) {
    const auto report = ingest_feed(feed, index);
    std::cout << feed << ": added " << report.added << ", updated " << report.updated << ", skipped " << report.skipped
              << ", malformed " << report.malformed << '\n';
    for (const auto& id : report.score_mismatches)
      std::cerr << "warning: " << id << ": feed baseScore differs from recomputed v3 score\n";
  }
  index.metadata().ingested_at = args.timestamp.empty() ? utc_now() : args.timestamp;
  save_index(index, args.db);
  std::cout << args.db << ": " << index.size() << " records, " << index.by_vector().size() << " v3 patterns\n";
  return kExitOk;
}

struct MatchArgs {
  std::string db;
  std::string pattern;
  std::string product;
  std::string mode = "exact";
  std::string format = "table";
  std::string out = "-";
};

int run_match(const MatchArgs& args) {
  const auto mode = mode_from(args.mode);
  const auto query = PatternQuery::parse(args.pattern, mode == MatchMode::Loose);
  const auto index = load_index(args.db);
  const auto records = match_pattern(index, query, filter_from(args.product), mode);

  if (args.format == "json") {
    RunManifest manifest;
    manifest.subcommand = "match";
    manifest.config = {{"pattern", args.pattern}, {"product", args.product}, {"mode", args.mode}};
    manifest.inputs.push_back(args.db);
    manifest.outputs.push_back(args.out);
    write_output(args.out, dump(match_document(records, query, mode, manifest)));
  } else if (args.format == "table") {
    write_output(args.out, match_table(records));
  } else {
    throw UsageError("unknown format '" + args.format + "' (expected table or json)");
  }
  return kExitOk;
}

struct CoverArgs {
  std::string db;
  std::string pool;
  std::string product;
  std::string mode = "exact";
  std::string out;
};

int run_cover(const CoverArgs& args) {
  const auto mode = mode_from(args.mode);
  const auto index = load_index(args.db);
  const auto pool = load_pool(args.pool);
  const auto report = compute_coverage(pool, index, filter_from(args.product), mode);

  std::cout << coverage_table(report);
  if (!args.out.empty()) {
    RunManifest manifest;
    manifest.subcommand = "cover";
    manifest.config = {{"product", args.product}, {"mode", args.mode}};
    manifest.inputs = {args.db, args.pool};
    manifest.outputs.push_back(args.out);
    write_output(args.out, dump(coverage_document(report, manifest)));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vulnerability coverage: CVSS v3 vector search, CVE matching and coverage reports"};
  app.set_config("--config", "", "TOML/INI file whose keys mirror the flags; flags override it");
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score a CVSS v3 base vector");
  score_cmd->add_option("vector", score.vector, "Base vector, optionally prefixed with CVSS:3.x/")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Evolve vector pools with GA or PSO");
  gen_cmd->add_option("--algo", gen.algo, "ga or pso")->capture_default_str();
  gen_cmd->add_option("--runs", gen.runs, "Independent runs (seeds S, S+1, ...)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Base seed")->capture_default_str();
  gen_cmd->add_option("--pop", gen.population, "Population / swarm size")->capture_default_str();
  gen_cmd->add_option("--iters", gen.iterations, "Generations / iterations")->capture_default_str();
  gen_cmd->add_option("--window", gen.window, "Fitness window lo:hi")->capture_default_str();
  gen_cmd->add_option("--penalty", gen.penalty, "Fitness outside the window")->capture_default_str();
  gen_cmd->add_option("--elite", gen.elite_fraction, "GA elite fraction")->capture_default_str();
  gen_cmd->add_option("--random", gen.random_fraction, "GA random-parent fraction")->capture_default_str();
  gen_cmd->add_option("--mutation", gen.mutation_rate, "GA mutation probability")->capture_default_str();
  gen_cmd->add_option("--pso-variant", gen.pso_variant, "classic or attract")->capture_default_str();
  gen_cmd->add_option("--kick", gen.kick_probability, "PSO mutation probability at velocity 0")->capture_default_str();
  gen_cmd->add_option("--threads", gen.threads, "Worker threads (0 = all cores)")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Pool document path ('-' for stdout)")->capture_default_str();
  gen_cmd->add_option("--csv", gen.csv, "Also write the histogram as CSV");
  gen_cmd->add_flag("--record-timing", gen.record_timing, "Embed wall-clock duration in the manifest");

  EnumerateArgs en;
  auto* en_cmd = app.add_subcommand("enumerate", "Score all 2592 base vectors");
  en_cmd->add_option("--out", en.out, "Output path ('-' for stdout)")->capture_default_str();
  en_cmd->add_option("--format", en.format, "json or csv")->capture_default_str();

  StatsArgs st;
  auto* st_cmd = app.add_subcommand("stats", "Histogram and diversity statistics of pool documents");
  st_cmd->add_option("pools", st.pools, "Pool documents written by generate")->required();
  st_cmd->add_option("--out", st.out, "Output path ('-' for stdout)")->capture_default_str();
  st_cmd->add_option("--csv", st.csv, "Also write histograms as CSV");

  IngestArgs ing;
  auto* ing_cmd = app.add_subcommand("ingest", "Ingest NVD JSON feeds or API v2 pages into an index file");
  ing_cmd->add_option("feeds", ing.feeds, "Feed files (.json or .json.gz)")->required();
  ing_cmd->add_option("--db", ing.db, "Index file (created or updated)")->required();
  ing_cmd->add_option("--timestamp", ing.timestamp, "Ingest timestamp to record (default: now, UTC)");

  MatchArgs mat;
  auto* mat_cmd = app.add_subcommand("match", "List CVEs whose vectors match a pattern");
  mat_cmd->add_option("--db", mat.db, "Index file")->required();
  mat_cmd->add_option("--pattern", mat.pattern, "Pattern, e.g. AV:L/AC:L/PR:N/UI:*/C:L/I:N/A:N")->required();
  mat_cmd->add_option("--product", mat.product, "Case-insensitive product substring");
  mat_cmd->add_option("--mode", mat.mode, "exact or loose")->capture_default_str();
  mat_cmd->add_option("--format", mat.format, "table or json")->capture_default_str();
  mat_cmd->add_option("--out", mat.out, "Output path ('-' for stdout)")->capture_default_str();

  CoverArgs cov;
  auto* cov_cmd = app.add_subcommand("cover", "Coverage of a vector pool over the corpus pattern classes");
  cov_cmd->add_option("--db", cov.db, "Index file")->required();
  cov_cmd->add_option("--pool", cov.pool, "Pool document, enumerate output, or vector list")->required();
  cov_cmd->add_option("--product", cov.product, "Case-insensitive product substring");
  cov_cmd->add_option("--mode", cov.mode, "exact or loose")->capture_default_str();
  cov_cmd->add_option("--out", cov.out, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*score_cmd) return run_score(score);
    if (*gen_cmd) return run_generate(gen);
    if (*en_cmd) return run_enumerate(en);
    if (*st_cmd) return run_stats(st);
    if (*ing_cmd) return run_ingest(ing);
    if (*mat_cmd) return run_match(mat);
    if (*cov_cmd) return run_cover(cov);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigInvalid& e) {
    std::cerr << "error: ConfigInvalid: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CorpusError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == CorpusError::Kind::EmptyQuery ? kExitUsage : kExitOperational;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOperational;
  }
  return kExitUsage;
}
