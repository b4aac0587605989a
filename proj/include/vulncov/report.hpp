#pragma once

/// @file report.hpp
/// @brief JSON/CSV/table renderings of search runs, the oracle table,
/// match results and coverage reports, plus pool loading.

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "vulncov/corpus.hpp"
#include "vulncov/coverage.hpp"
#include "vulncov/search.hpp"

namespace vulncov {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string tool_version{kToolVersion};
  /// Only recorded on request; keeps documents byte-reproducible otherwise.
  std::optional<double> wall_clock_ms;
};

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const FitnessConfig& cfg);
nlohmann::json to_json(const SearchConfig& cfg);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const DiversityStats& d);
nlohmann::json to_json(const CveRecord& r);
nlohmann::json to_json(const CoverageReport& r);

nlohmann::json pool_document(const PoolStats& stats, const FitnessConfig& fcfg, const SearchConfig& scfg,
                             const RunManifest& manifest);
std::string histogram_csv(const Histogram& h);

nlohmann::json enumerate_document(const std::vector<ScoredVector>& rows, const RunManifest& manifest);
std::string enumerate_csv(const std::vector<ScoredVector>& rows);

nlohmann::json match_document(const std::vector<CveRecord>& records, const PatternQuery& query, MatchMode mode,
                              const RunManifest& manifest);
std::string match_table(const std::vector<CveRecord>& records);

nlohmann::json coverage_document(const CoverageReport& report, const RunManifest& manifest);
std::string coverage_table(const CoverageReport& report);

/// Final pools of a pool document, one per run, re-evaluated under its
/// embedded fitness window.
std::vector<std::vector<EvaluatedVector>> pools_from_document(const nlohmann::json& doc);

/// Loads vectors from a pool document, an enumerate document (JSON or CSV),
/// or plain text with one vector per line ('#' comments allowed).
std::vector<CvssVector> load_pool(const std::filesystem::path& path);

}  // namespace vulncov
