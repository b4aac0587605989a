#include "vulncov/report.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace vulncov {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json evaluated_json(const EvaluatedVector& e) {
  return {{"vector", to_canonical_string(e.vector)}, {"score", e.score.value()}, {"fitness", e.fitness}};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

json to_json(const RunManifest& m) {
  json j{{"subcommand", m.subcommand}, {"tool_version", m.tool_version}, {"config", m.config}};
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  if (m.wall_clock_ms) j["wall_clock_ms"] = *m.wall_clock_ms;
  return j;
}

json to_json(const FitnessConfig& cfg) {
  return {{"window_lo", cfg.window_lo.value()},
          {"window_hi", cfg.window_hi.value()},
          {"penalty", cfg.penalty},
          {"best", cfg.best.value()}};
}

json to_json(const SearchConfig& cfg) {
  return {{"population", cfg.population},
          {"iterations", cfg.iterations},
          {"seed", cfg.seed},
          {"elite_fraction", cfg.elite_fraction},
          {"random_fraction", cfg.random_fraction},
          {"mutation_rate", cfg.mutation_rate},
          {"pso_variant", pso_variant_name(cfg.pso_variant)},
          {"kick_probability", cfg.kick_probability}};
}

json to_json(const Histogram& h) {
  json buckets = json::array();
  for (std::size_t b = 0; b < kBucketCount; ++b)
    buckets.push_back({{"label", kBucketLabels[b]}, {"count", h.counts[b]}, {"percent", h.percent[b]}});
  return {{"buckets", buckets},
          {"in_range", h.in_range},
          {"out_of_range", h.out_of_range},
          {"out_of_range_fraction", h.out_of_range_fraction}};
}

json to_json(const DiversityStats& d) {
  return {{"mean", d.mean}, {"min", d.min}, {"max", d.max}, {"distinct", d.distinct}, {"pairs", d.pairs}};
}

json to_json(const CveRecord& r) {
  json j{{"cve_id", r.cve_id}, {"description", r.description}, {"products", r.products}, {"published", r.published}};
  j["v3_vector"] = r.v3_vector ? json(to_canonical_string(*r.v3_vector)) : json(nullptr);
  j["v3_score"] = r.v3_score ? json(r.v3_score->value()) : json(nullptr);
  j["v2_vector"] = r.v2_vector ? json(*r.v2_vector) : json(nullptr);
  j["v2_score"] = r.v2_score ? json(*r.v2_score) : json(nullptr);
  return j;
}

json to_json(const CoverageReport& r) {
  json classes = json::array();
  for (const auto& c : r.classes) {
    json matched = json::array();
    for (const auto& v : c.matched_by) matched.push_back(to_canonical_string(v));
    classes.push_back({{"pattern", c.pattern},
                       {"covered", c.covered},
                       {"matched_by", matched},
                       {"cve_ids", c.cve_ids},
                       {"representative", c.covered ? json(c.representative) : json(nullptr)}});
  }
  return {{"mode", match_mode_name(r.mode)},
          {"product_filter", r.product_filter ? json(*r.product_filter) : json(nullptr)},
          {"pool_size", r.pool_size},
          {"total_classes", r.total_classes},
          {"covered_classes", r.covered_classes},
          {"coverage_ratio", r.coverage_ratio},
          {"space_ratio", r.space_ratio},
          {"total_cves", r.total_cves},
          {"selected_cves", r.selected_cves},
          {"classes", classes},
          {"uncovered", r.uncovered}};
}

json pool_document(const PoolStats& stats, const FitnessConfig& fcfg, const SearchConfig& scfg,
                   const RunManifest& manifest) {
  const double optimum = optimum_fitness(fcfg);
  json runs = json::array();
  std::size_t hits = 0;
  for (const auto& r : stats.runs) {
    json pool = json::array();
    std::vector<CvssVector> vectors;
    for (const auto& e : r.pool) {
      pool.push_back(evaluated_json(e));
      vectors.push_back(e.vector);
    }
    const bool reached = r.best_fitness == optimum;
    hits += reached;
    json run{{"run", r.index},
             {"seed", r.seed},
             {"best_fitness", r.best_fitness},
             {"reached_optimum", reached},
             {"best_trace", r.best_trace}};
    if (stats.algorithm == Algorithm::Pso) run["counters"] = r.counters;
    run["diversity"] = vectors.size() >= 2 ? to_json(diversity_summary(vectors)) : json(nullptr);
    run["pool"] = std::move(pool);
    runs.push_back(std::move(run));
  }

  return {{"format", "vulncov-pool"},
          {"version", 1},
          {"manifest", to_json(manifest)},
          {"algorithm", algorithm_name(stats.algorithm)},
          {"fitness", to_json(fcfg)},
          {"search", to_json(scfg)},
          {"optimum_fitness", optimum},
          {"summary", {{"runs", stats.runs.size()}, {"optimum_hits", hits}}},
          {"histogram", to_json(stats.histogram)},
          {"runs", std::move(runs)}};
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bucket,count,percent\n";
  for (std::size_t b = 0; b < kBucketCount; ++b)
    out << '"' << kBucketLabels[b] << "\"," << h.counts[b] << ',' << fixed(h.percent[b], 3) << '\n';
  out << "out_of_range," << h.out_of_range << ',' << fixed(100.0 * h.out_of_range_fraction, 3) << '\n';
  return out.str();
}

json enumerate_document(const std::vector<ScoredVector>& rows, const RunManifest& manifest) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"vector", to_canonical_string(r.vector)},
                   {"score", r.score.value()},
                   {"severity", severity_name(r.score.band())}});
  return {{"format", "vulncov-enumerate"}, {"version", 1}, {"manifest", to_json(manifest)}, {"rows", out}};
}

std::string enumerate_csv(const std::vector<ScoredVector>& rows) {
  std::string out = "vector,score,severity\n";
  for (const auto& r : rows) {
    out += to_canonical_string(r.vector);
    out += ',';
    out += r.score.to_string();
    out += ',';
    out += severity_name(r.score.band());
    out += '\n';
  }
  return out;
}

json match_document(const std::vector<CveRecord>& records, const PatternQuery& query, MatchMode mode,
                    const RunManifest& manifest) {
  json rows = json::array();
  for (const auto& r : records) rows.push_back(to_json(r));
  return {{"format", "vulncov-match"},
          {"version", 1},
          {"manifest", to_json(manifest)},
          {"pattern", query.to_string()},
          {"mode", match_mode_name(mode)},
          {"count", records.size()},
          {"records", rows}};
}

std::string match_table(const std::vector<CveRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.cve_id << '\t';
    if (r.v3_vector) out << to_canonical_string(*r.v3_vector) << '\t' << r.v3_score->to_string();
    else out << "(v2) " << r.v2_vector.value_or("-") << '\t' << (r.v2_score ? fixed(*r.v2_score, 1) : "-");
    out << '\t';
    for (std::size_t k = 0; k < r.products.size(); ++k) out << (k ? "," : "") << r.products[k];
    out << '\n';
  }
  return out.str();
}

json coverage_document(const CoverageReport& report, const RunManifest& manifest) {
  return {{"format", "vulncov-coverage"}, {"version", 1}, {"manifest", to_json(manifest)}, {"report", to_json(report)}};
}

std::string coverage_table(const CoverageReport& r) {
  std::ostringstream out;
  out << "coverage " << r.covered_classes << '/' << r.total_classes << " classes = " << fixed(r.coverage_ratio, 4)
      << " (" << match_mode_name(r.mode) << " mode, " << r.selected_cves << '/' << r.total_cves
      << " CVEs selected)\n";
  for (const auto& c : r.classes) {
    out << (c.covered ? "[x] " : "[ ] ") << c.pattern << '\t' << c.cve_ids.size() << " CVE";
    if (c.cve_ids.size() != 1) out << 's';
    if (c.covered) out << "\trepresentative " << c.representative;
    out << '\n';
  }
  return out.str();
}

std::vector<std::vector<EvaluatedVector>> pools_from_document(const json& doc) {
  if (doc.value("format", "") != "vulncov-pool") throw std::invalid_argument("not a vulncov pool document");
  FitnessConfig fcfg;
  const auto& f = doc.at("fitness");
  fcfg.window_lo = Score::from_double(f.at("window_lo").get<double>());
  fcfg.window_hi = Score::from_double(f.at("window_hi").get<double>());
  fcfg.penalty = f.at("penalty").get<double>();
  fcfg.best = Score::from_double(f.at("best").get<double>());

  std::vector<std::vector<EvaluatedVector>> pools;
  for (const auto& run : doc.at("runs")) {
    auto& pool = pools.emplace_back();
    for (const auto& m : run.at("pool")) pool.push_back(evaluate(parse_vector(m.at("vector").get<std::string>()), fcfg));
  }
  return pools;
}

std::vector<CvssVector> load_pool(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<CvssVector> pool;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const json doc = json::parse(text);
    const auto format = doc.value("format", "");
    if (format == "vulncov-pool") {
      for (const auto& run : doc.at("runs"))
        for (const auto& m : run.at("pool")) pool.push_back(parse_vector(m.at("vector").get<std::string>()));
    } else if (format == "vulncov-enumerate") {
      for (const auto& row : doc.at("rows")) pool.push_back(parse_vector(row.at("vector").get<std::string>()));
    } else {
      throw std::invalid_argument(path.string() + ": unrecognized pool document");
    }
    return pool;
  }

  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto field = trim(std::string_view(line).substr(0, line.find(',')));
    if (field.empty() || field.front() == '#' || field == "vector") continue;
    pool.push_back(parse_vector(field));
  }
  return pool;
}

}  // namespace vulncov
