#pragma once

/// @file corpus.hpp
/// @brief CVE corpus: NVD feed ingestion, a pattern index keyed by canonical
/// v3 vectors, persistence, and pattern matching.
///
/// Records carrying only CVSS v2 data are reachable through loose matching,
/// which maps v2 base fields onto v3 ones (Partial reads as Low, Complete as
/// High, Medium complexity as High, Au:N/S/M as PR:N/L/H). UI and S have no
/// v2 counterpart and act as wildcards.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vulncov/cvss.hpp"

namespace vulncov {

class CorpusError : public std::runtime_error {
 public:
  enum class Kind {
    UnreadableFile,
    UnrecognizedSchema,
    MalformedRecord,
    VersionMismatch,
    CorruptRecord,
    EmptyQuery,
  };

  CorpusError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Orders CVE ids by year, then sequence number (CVE-2019-999 < CVE-2019-1000).
struct CveIdLess {
  using is_transparent = void;
  bool operator()(std::string_view l, std::string_view r) const noexcept;
};

bool is_valid_cve_id(std::string_view id) noexcept;

struct CveRecord {
  std::string cve_id;
  std::string description;
  std::optional<CvssVector> v3_vector;
  std::optional<Score> v3_score;
  std::optional<std::string> v2_vector;
  std::optional<double> v2_score;
  /// "vendor:product" pairs from CPE applicability data.
  std::vector<std::string> products;
  /// ISO-8601 date as published by NVD; may be empty.
  std::string published;

  friend bool operator==(const CveRecord&, const CveRecord&) = default;
};

/// Per-field constraint: a value index or a wildcard.
class PatternQuery {
 public:
  PatternQuery() = default;
  /// Fully constrained query equal to v.
  static PatternQuery exactly(const CvssVector& v);

  /// Parses "AV:L/AC:L/PR:N/C:L/I:N/A:N" style patterns. Fields may be
  /// omitted or given as '*'. With allow_v2_notation, v2 spellings are
  /// normalized (C:P -> C:L, C:C -> C:H, AC:M -> AC:H, Au:x -> PR) and an
  /// illegal S value such as "S:N" is treated as a wildcard.
  static PatternQuery parse(std::string_view text, bool allow_v2_notation = false);

  const std::optional<std::uint8_t>& operator[](Field f) const { return fields_[static_cast<std::size_t>(f)]; }
  PatternQuery& constrain(Field f, std::uint8_t value);
  PatternQuery& wildcard(Field f);

  bool empty() const noexcept;
  bool fully_constrained() const noexcept;

  bool matches(const CvssVector& v) const noexcept;
  /// True when some vector satisfies both patterns.
  bool compatible(const PatternQuery& other) const noexcept;

  /// Every field written out, '*' for wildcards.
  std::string to_string() const;

  friend bool operator==(const PatternQuery&, const PatternQuery&) = default;
  friend auto operator<=>(const PatternQuery&, const PatternQuery&) = default;

 private:
  std::array<std::optional<std::uint8_t>, kFieldCount> fields_{};
};

/// Maps a raw v2 vector ("AV:L/AC:L/Au:N/C:P/I:N/A:N", optionally wrapped in
/// parentheses) onto a v3 pattern with UI and S wildcarded.
std::optional<PatternQuery> normalize_v2(std::string_view v2_vector);

enum class MatchMode : std::uint8_t { Exact, Loose };

std::string_view match_mode_name(MatchMode m) noexcept;
std::optional<MatchMode> parse_match_mode(std::string_view name) noexcept;

/// The pattern a record contributes in the given mode: its v3 vector when it
/// has one, otherwise (loose mode only) its normalized v2 vector.
std::optional<PatternQuery> record_pattern(const CveRecord& record, MatchMode mode);

/// Case-insensitive substring test against the record's product list.
bool has_product(const CveRecord& record, std::string_view filter);

struct CorpusMetadata {
  std::vector<std::string> feeds;
  std::string ingested_at;
};

class PatternIndex {
 public:
  using RecordMap = std::map<std::string, CveRecord, CveIdLess>;

  /// Returns true when the record is new.
  bool upsert(CveRecord record);

  const CveRecord* find(std::string_view cve_id) const;
  const RecordMap& records() const noexcept { return records_; }
  /// Canonical v3 vector string -> CVE ids (ordered by CveIdLess).
  const std::map<std::string, std::vector<std::string>>& by_vector() const noexcept { return by_vector_; }
  std::size_t size() const noexcept { return records_.size(); }

  CorpusMetadata& metadata() noexcept { return metadata_; }
  const CorpusMetadata& metadata() const noexcept { return metadata_; }

 private:
  void unlink(const CveRecord& record);

  RecordMap records_;
  std::map<std::string, std::vector<std::string>> by_vector_;
  CorpusMetadata metadata_;
};

struct IngestReport {
  std::size_t added = 0;
  std::size_t updated = 0;
  /// Records with neither v3 nor v2 data.
  std::size_t skipped = 0;
  std::size_t malformed = 0;
  /// CVE ids whose feed baseScore disagrees with the recomputed v3 score.
  std::vector<std::string> score_mismatches;
  std::vector<std::string> malformed_ids;
};

/// Ingests an NVD JSON 1.1 data feed or an NVD API v2 response page,
/// optionally gzip-compressed.
IngestReport ingest_feed(const std::filesystem::path& path, PatternIndex& index);
/// Same, from an in-memory document; `source` is recorded in the metadata.
IngestReport ingest_document(std::string_view json_text, std::string_view source, PatternIndex& index);

/// Results ordered by cve_id.
std::vector<CveRecord> match_pattern(const PatternIndex& index, const PatternQuery& query,
                                     std::optional<std::string_view> product_filter, MatchMode mode);

inline constexpr std::string_view kIndexHeader = "VULNCOV-INDEX v1";

void save_index(const PatternIndex& index, const std::filesystem::path& path);
PatternIndex load_index(const std::filesystem::path& path);

}  // namespace vulncov
