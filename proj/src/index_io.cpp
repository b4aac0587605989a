#include <charconv>
#include <fstream>
#include <sstream>

#include "vulncov/corpus.hpp"

// On-disk index: header line, '#'-prefixed metadata lines, one tab-separated
// record per line, and an "#end <count>" trailer that detects truncation.
//
//   cve_id  v3-vector  v3-score  v2-vector  v2-score  products  description  published
//
// Absent values are written as "-".

namespace vulncov {

namespace {

constexpr std::string_view kHeaderPrefix = "VULNCOV-INDEX ";
constexpr std::string_view kAbsent = "-";

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::optional<std::string> unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '\\') {
      out += s[k];
      continue;
    }
    if (++k == s.size()) return std::nullopt;
    switch (s[k]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: return std::nullopt;
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  for (std::size_t start = 0;;) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void corrupt(std::size_t line_no, const std::string& why) {
  throw CorpusError(CorpusError::Kind::CorruptRecord, "line " + std::to_string(line_no) + ": " + why);
}

CveRecord parse_record(std::string_view line, std::size_t line_no) {
  auto cols = split_tabs(line);
  if (cols.size() != 7 && cols.size() != 8)
    corrupt(line_no, "expected 8 tab-separated columns, found " + std::to_string(cols.size()));

  CveRecord rec;
  rec.cve_id = std::string(cols[0]);
  if (!is_valid_cve_id(rec.cve_id)) corrupt(line_no, "bad CVE id '" + rec.cve_id + "'");

  try {
    if (cols[1] != kAbsent) rec.v3_vector = parse_vector(cols[1]);
  } catch (const ParseError& e) {
    corrupt(line_no, e.what());
  }

  auto parse_number = [&](std::string_view text) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0.0 || v > 10.0)
      corrupt(line_no, "bad score '" + std::string(text) + "'");
    return v;
  };
  if (cols[2] != kAbsent) rec.v3_score = Score::from_double(parse_number(cols[2]));
  if (cols[3] != kAbsent) rec.v2_vector = std::string(cols[3]);
  if (cols[4] != kAbsent) rec.v2_score = parse_number(cols[4]);

  if (!cols[5].empty()) {
    for (std::size_t start = 0;;) {
      auto pos = cols[5].find(',', start);
      rec.products.emplace_back(cols[5].substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }

  auto description = unescape(cols[6]);
  if (!description) corrupt(line_no, "bad escape in description");
  rec.description = std::move(*description);
  if (cols.size() == 8) rec.published = std::string(cols[7]);
  return rec;
}

}  // namespace

void save_index(const PatternIndex& index, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kIndexHeader << '\n';
  out << "#feeds";
  for (const auto& f : index.metadata().feeds) out << '\t' << escape(f);
  out << '\n';
  out << "#ingested\t" << escape(index.metadata().ingested_at) << '\n';

  for (const auto& [id, rec] : index.records()) {
    out << rec.cve_id << '\t';
    out << (rec.v3_vector ? to_canonical_string(*rec.v3_vector) : std::string(kAbsent)) << '\t';
    out << (rec.v3_score ? rec.v3_score->to_string() : std::string(kAbsent)) << '\t';
    out << (rec.v2_vector ? escape(*rec.v2_vector) : std::string(kAbsent)) << '\t';
    out << (rec.v2_score ? format_double(*rec.v2_score) : std::string(kAbsent)) << '\t';
    for (std::size_t k = 0; k < rec.products.size(); ++k) out << (k ? "," : "") << rec.products[k];
    out << '\t' << escape(rec.description) << '\t' << rec.published << '\n';
  }
  out << "#end\t" << index.size() << '\n';

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot write " + path.string());
  file << out.str();
  if (!file) throw CorpusError(CorpusError::Kind::UnreadableFile, "write failed for " + path.string());
}

PatternIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot open " + path.string());

  PatternIndex index;
  std::string line;
  std::size_t line_no = 0;
  bool ended = false;
  std::size_t records = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line == kIndexHeader) continue;
      if (line.starts_with(kHeaderPrefix))
        throw CorpusError(CorpusError::Kind::VersionMismatch,
                          "unsupported index version '" + line.substr(kHeaderPrefix.size()) + "'");
      corrupt(line_no, "missing VULNCOV-INDEX header");
    }
    if (ended) corrupt(line_no, "data after end marker");

    if (line.starts_with('#')) {
      auto cols = split_tabs(line);
      if (cols[0] == "#feeds") {
        for (std::size_t k = 1; k < cols.size(); ++k) {
          auto feed = unescape(cols[k]);
          if (!feed) corrupt(line_no, "bad escape in feed name");
          index.metadata().feeds.push_back(std::move(*feed));
        }
      } else if (cols[0] == "#ingested" && cols.size() == 2) {
        auto when = unescape(cols[1]);
        if (!when) corrupt(line_no, "bad escape in timestamp");
        index.metadata().ingested_at = std::move(*when);
      } else if (cols[0] == "#end" && cols.size() == 2) {
        if (cols[1] != std::to_string(records))
          corrupt(line_no, "end marker counts " + std::string(cols[1]) + " records, found " + std::to_string(records));
        ended = true;
      } else {
        corrupt(line_no, "unknown metadata line");
      }
      continue;
    }

    index.upsert(parse_record(line, line_no));
    ++records;
  }
  if (in.bad()) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot read " + path.string());
  if (line_no == 0) corrupt(1, "empty file");
  if (!ended) corrupt(line_no + 1, "missing end marker (file truncated)");
  return index;
}

}  // namespace vulncov
