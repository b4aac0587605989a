#include "vulncov/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <set>

namespace vulncov {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kFieldCount> kV3Keys{"AV", "AC", "PR", "UI", "S", "C", "I", "A"};
constexpr std::array<std::string_view, kFieldCount> kV3Values{"NALP", "LH", "NLH", "NR", "UC", "NLH", "NLH", "NLH"};

struct CveIdParts {
  unsigned long year = 0;
  unsigned long long sequence = 0;
  bool ok = false;
};

CveIdParts split_cve_id(std::string_view id) {
  CveIdParts parts;
  if (id.size() < 13 || !id.starts_with("CVE-") || id[8] != '-') return parts;
  auto year = id.substr(4, 4);
  auto seq = id.substr(9);
  auto all_digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(year) || !all_digits(seq) || seq.size() < 4 || seq.size() > 19) return parts;
  std::from_chars(year.data(), year.data() + year.size(), parts.year);
  std::from_chars(seq.data(), seq.data() + seq.size(), parts.sequence);
  parts.ok = true;
  return parts;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  for (std::size_t start = 0;;) {
    auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw CorpusError(CorpusError::Kind::UnreadableFile, "cannot read " + path.string());
  return bytes;
}

std::string gunzip(const std::string& bytes, const std::filesystem::path& path) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw CorpusError(CorpusError::Kind::UnreadableFile, "zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());

  std::string out;
  char buf[1 << 16];
  int rc;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw CorpusError(CorpusError::Kind::UnreadableFile, "corrupt gzip stream in " + path.string());
    }
    out.append(buf, sizeof buf - zs.avail_out);
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  if (rc != Z_STREAM_END)
    throw CorpusError(CorpusError::Kind::UnreadableFile, "truncated gzip stream in " + path.string());
  return out;
}

// "cpe:2.3:a:oracle:mysql:5.5.38:..." -> "oracle:mysql"
std::optional<std::string> product_from_cpe(std::string_view cpe) {
  auto parts = split(cpe, ':');
  if (parts.size() < 5 || parts[0] != "cpe" || parts[1] != "2.3") return std::nullopt;
  if (parts[3].empty() || parts[4].empty()) return std::nullopt;
  return std::string(parts[3]) + ":" + std::string(parts[4]);
}

void collect_feed_cpes(const json& node, std::set<std::string>& out) {
  if (auto it = node.find("cpe_match"); it != node.end()) {
    for (const auto& m : *it) {
      if (!m.value("vulnerable", true)) continue;
      if (auto p = product_from_cpe(m.at("cpe23Uri").get<std::string>())) out.insert(*p);
    }
  }
  if (auto it = node.find("children"); it != node.end())
    for (const auto& child : *it) collect_feed_cpes(child, out);
}

void collect_api_cpes(const json& node, std::set<std::string>& out) {
  if (auto it = node.find("cpeMatch"); it != node.end()) {
    for (const auto& m : *it) {
      if (!m.value("vulnerable", true)) continue;
      if (auto p = product_from_cpe(m.at("criteria").get<std::string>())) out.insert(*p);
    }
  }
}

std::string english(const json& list) {
  for (const auto& d : list)
    if (d.value("lang", "") == "en") return d.at("value").get<std::string>();
  return {};
}

// Prefers the NVD "Primary" entry of an API v2 metric list.
const json* primary_metric(const json& metrics, std::string_view key) {
  auto it = metrics.find(key);
  if (it == metrics.end() || !it->is_array() || it->empty()) return nullptr;
  for (const auto& m : *it)
    if (m.value("type", "") == "Primary") return &m;
  return &it->front();
}

void set_v3(CveRecord& rec, const std::string& vector, const json* score) {
  rec.v3_vector = parse_vector(vector);
  rec.v3_score = score ? Score::from_double(score->get<double>()) : base_score(*rec.v3_vector);
}

CveRecord record_from_feed_item(const json& item) {
  CveRecord rec;
  const auto& cve = item.at("cve");
  rec.cve_id = cve.at("CVE_data_meta").at("ID").get<std::string>();
  if (auto d = cve.find("description"); d != cve.end()) rec.description = english(d->at("description_data"));
  rec.published = item.value("publishedDate", "");

  if (auto impact = item.find("impact"); impact != item.end()) {
    if (auto m = impact->find("baseMetricV3"); m != impact->end()) {
      const auto& data = m->at("cvssV3");
      auto score = data.find("baseScore");
      set_v3(rec, data.at("vectorString").get<std::string>(), score != data.end() ? &*score : nullptr);
    }
    if (auto m = impact->find("baseMetricV2"); m != impact->end()) {
      const auto& data = m->at("cvssV2");
      rec.v2_vector = data.at("vectorString").get<std::string>();
      if (auto s = data.find("baseScore"); s != data.end()) rec.v2_score = s->get<double>();
    }
  }

  std::set<std::string> products;
  if (auto cfg = item.find("configurations"); cfg != item.end())
    if (auto nodes = cfg->find("nodes"); nodes != cfg->end())
      for (const auto& node : *nodes) collect_feed_cpes(node, products);
  rec.products.assign(products.begin(), products.end());
  return rec;
}

CveRecord record_from_api_item(const json& item) {
  CveRecord rec;
  const auto& cve = item.at("cve");
  rec.cve_id = cve.at("id").get<std::string>();
  if (auto d = cve.find("descriptions"); d != cve.end()) rec.description = english(*d);
  rec.published = cve.value("published", "");

  if (auto metrics = cve.find("metrics"); metrics != cve.end()) {
    const json* v3 = primary_metric(*metrics, "cvssMetricV31");
    if (!v3) v3 = primary_metric(*metrics, "cvssMetricV30");
    if (v3) {
      const auto& data = v3->at("cvssData");
      auto score = data.find("baseScore");
      set_v3(rec, data.at("vectorString").get<std::string>(), score != data.end() ? &*score : nullptr);
    }
    if (const json* v2 = primary_metric(*metrics, "cvssMetricV2")) {
      const auto& data = v2->at("cvssData");
      rec.v2_vector = data.at("vectorString").get<std::string>();
      if (auto s = data.find("baseScore"); s != data.end()) rec.v2_score = s->get<double>();
    }
  }

  std::set<std::string> products;
  if (auto cfgs = cve.find("configurations"); cfgs != cve.end())
    for (const auto& cfg : *cfgs)
      if (auto nodes = cfg.find("nodes"); nodes != cfg.end())
        for (const auto& node : *nodes) collect_api_cpes(node, products);
  rec.products.assign(products.begin(), products.end());
  return rec;
}

}  // namespace

bool CveIdLess::operator()(std::string_view l, std::string_view r) const noexcept {
  const auto a = split_cve_id(l);
  const auto b = split_cve_id(r);
  if (a.ok && b.ok) {
    if (a.year != b.year) return a.year < b.year;
    if (a.sequence != b.sequence) return a.sequence < b.sequence;
    return l < r;
  }
  if (a.ok != b.ok) return a.ok;  // well-formed ids first
  return l < r;
}

bool is_valid_cve_id(std::string_view id) noexcept { return split_cve_id(id).ok; }

PatternQuery PatternQuery::exactly(const CvssVector& v) {
  PatternQuery q;
  for (std::size_t f = 0; f < kFieldCount; ++f) q.fields_[f] = v.get(static_cast<Field>(f));
  return q;
}

PatternQuery PatternQuery::parse(std::string_view text, bool allow_v2_notation) {
  using Kind = ParseError::Kind;
  if (text.starts_with("CVSS:3.0/") || text.starts_with("CVSS:3.1/")) text.remove_prefix(9);
  if (text.size() >= 2 && text.front() == '(' && text.back() == ')') text = text.substr(1, text.size() - 2);

  PatternQuery q;
  std::array<bool, kFieldCount> seen{};
  for (auto token : split(text, '/')) {
    auto colon = token.find(':');
    if (colon == std::string_view::npos || colon == 0) throw ParseError(Kind::BadSyntax, std::string(token));
    auto key = token.substr(0, colon);
    auto value = token.substr(colon + 1);

    if (allow_v2_notation && key == "Au") {
      key = "PR";
      if (value == "S") value = "L";
      else if (value == "M") value = "H";
      else if (value != "N" && value != "*") throw ParseError(Kind::UnknownValue, std::string(token));
    }

    auto it = std::find(kV3Keys.begin(), kV3Keys.end(), key);
    if (it == kV3Keys.end()) throw ParseError(Kind::BadSyntax, std::string(token));
    const auto f = static_cast<std::size_t>(it - kV3Keys.begin());
    if (seen[f]) throw ParseError(Kind::DuplicateField, std::string(token));
    seen[f] = true;

    if (value == "*") continue;
    if (allow_v2_notation) {
      const auto field = static_cast<Field>(f);
      if (field == Field::C || field == Field::I || field == Field::A) {
        if (value == "P") value = "L";
        else if (value == "C") value = "H";
      } else if (field == Field::AC && value == "M") {
        value = "H";
      } else if (field == Field::S && value.size() == 1 && kV3Values[f].find(value[0]) == std::string_view::npos) {
        continue;
      }
    }
    auto pos = value.size() == 1 ? kV3Values[f].find(value[0]) : std::string_view::npos;
    if (pos == std::string_view::npos) throw ParseError(Kind::UnknownValue, std::string(token));
    q.fields_[f] = static_cast<std::uint8_t>(pos);
  }
  return q;
}

PatternQuery& PatternQuery::constrain(Field f, std::uint8_t value) {
  fields_[static_cast<std::size_t>(f)] = value;
  return *this;
}

PatternQuery& PatternQuery::wildcard(Field f) {
  fields_[static_cast<std::size_t>(f)].reset();
  return *this;
}

bool PatternQuery::empty() const noexcept {
  return std::none_of(fields_.begin(), fields_.end(), [](const auto& x) { return x.has_value(); });
}

bool PatternQuery::fully_constrained() const noexcept {
  return std::all_of(fields_.begin(), fields_.end(), [](const auto& x) { return x.has_value(); });
}

bool PatternQuery::matches(const CvssVector& v) const noexcept {
  for (std::size_t f = 0; f < kFieldCount; ++f)
    if (fields_[f] && *fields_[f] != v.get(static_cast<Field>(f))) return false;
  return true;
}

bool PatternQuery::compatible(const PatternQuery& other) const noexcept {
  for (std::size_t f = 0; f < kFieldCount; ++f)
    if (fields_[f] && other.fields_[f] && *fields_[f] != *other.fields_[f]) return false;
  return true;
}

std::string PatternQuery::to_string() const {
  std::string out;
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    if (f) out += '/';
    out += kV3Keys[f];
    out += ':';
    out += fields_[f] ? kV3Values[f][*fields_[f]] : '*';
  }
  return out;
}

std::optional<PatternQuery> normalize_v2(std::string_view v2_vector) {
  if (v2_vector.size() >= 2 && v2_vector.front() == '(' && v2_vector.back() == ')')
    v2_vector = v2_vector.substr(1, v2_vector.size() - 2);
  auto tokens = split(v2_vector, '/');
  static constexpr std::array<std::string_view, 6> kV2Keys{"AV", "AC", "Au", "C", "I", "A"};
  if (tokens.size() < kV2Keys.size()) return std::nullopt;

  PatternQuery q;
  for (std::size_t k = 0; k < kV2Keys.size(); ++k) {
    auto token = tokens[k];
    if (token.size() != kV2Keys[k].size() + 2 || !token.starts_with(kV2Keys[k]) || token[kV2Keys[k].size()] != ':')
      return std::nullopt;
    const char v = token.back();
    switch (k) {
      case 0:  // AV: N, A, L map onto the same letters
        if (v == 'N') q.constrain(Field::AV, 0);
        else if (v == 'A') q.constrain(Field::AV, 1);
        else if (v == 'L') q.constrain(Field::AV, 2);
        else return std::nullopt;
        break;
      case 1:
        if (v == 'L') q.constrain(Field::AC, 0);
        else if (v == 'M' || v == 'H') q.constrain(Field::AC, 1);
        else return std::nullopt;
        break;
      case 2:
        if (v == 'N') q.constrain(Field::PR, 0);
        else if (v == 'S') q.constrain(Field::PR, 1);
        else if (v == 'M') q.constrain(Field::PR, 2);
        else return std::nullopt;
        break;
      default: {
        const Field f = k == 3 ? Field::C : k == 4 ? Field::I : Field::A;
        if (v == 'N') q.constrain(f, 0);
        else if (v == 'P') q.constrain(f, 1);
        else if (v == 'C') q.constrain(f, 2);
        else return std::nullopt;
      }
    }
  }
  return q;
}

std::string_view match_mode_name(MatchMode m) noexcept { return m == MatchMode::Exact ? "exact" : "loose"; }

std::optional<MatchMode> parse_match_mode(std::string_view name) noexcept {
  if (name == "exact") return MatchMode::Exact;
  if (name == "loose") return MatchMode::Loose;
  return std::nullopt;
}

std::optional<PatternQuery> record_pattern(const CveRecord& record, MatchMode mode) {
  if (record.v3_vector) return PatternQuery::exactly(*record.v3_vector);
  if (mode == MatchMode::Loose && record.v2_vector) return normalize_v2(*record.v2_vector);
  return std::nullopt;
}

bool has_product(const CveRecord& record, std::string_view filter) {
  const auto needle = lowercase(filter);
  return std::any_of(record.products.begin(), record.products.end(),
                     [&](const std::string& p) { return lowercase(p).find(needle) != std::string::npos; });
}

bool PatternIndex::upsert(CveRecord record) {
  auto it = records_.find(record.cve_id);
  const bool added = it == records_.end();
  if (!added) {
    unlink(it->second);
    records_.erase(it);
  }
  if (record.v3_vector) {
    auto& ids = by_vector_[to_canonical_string(*record.v3_vector)];
    ids.insert(std::upper_bound(ids.begin(), ids.end(), record.cve_id, CveIdLess{}), record.cve_id);
  }
  auto id = record.cve_id;
  records_.emplace(std::move(id), std::move(record));
  return added;
}

void PatternIndex::unlink(const CveRecord& record) {
  if (!record.v3_vector) return;
  auto key = to_canonical_string(*record.v3_vector);
  auto it = by_vector_.find(key);
  if (it == by_vector_.end()) return;
  std::erase(it->second, record.cve_id);
  if (it->second.empty()) by_vector_.erase(it);
}

const CveRecord* PatternIndex::find(std::string_view cve_id) const {
  auto it = records_.find(cve_id);
  return it == records_.end() ? nullptr : &it->second;
}

IngestReport ingest_document(std::string_view json_text, std::string_view source, PatternIndex& index) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw CorpusError(CorpusError::Kind::UnrecognizedSchema, std::string(source) + ": not a JSON object");

  const json* items = nullptr;
  bool api = false;
  if (auto it = doc.find("CVE_Items"); it != doc.end() && it->is_array()) {
    items = &*it;
  } else if (auto it = doc.find("vulnerabilities"); it != doc.end() && it->is_array()) {
    items = &*it;
    api = true;
  } else {
    throw CorpusError(CorpusError::Kind::UnrecognizedSchema,
                      std::string(source) + ": neither an NVD 1.1 feed nor an API v2 response");
  }

  IngestReport report;
  for (std::size_t k = 0; k < items->size(); ++k) {
    const auto& item = (*items)[k];
    CveRecord rec;
    try {
      rec = api ? record_from_api_item(item) : record_from_feed_item(item);
      if (!is_valid_cve_id(rec.cve_id)) throw CorpusError(CorpusError::Kind::MalformedRecord, rec.cve_id);
    } catch (const std::exception&) {
      ++report.malformed;
      report.malformed_ids.push_back(rec.cve_id.empty() ? "#" + std::to_string(k) : rec.cve_id);
      continue;
    }

    if (!rec.v3_vector && !rec.v2_vector) {
      ++report.skipped;
      continue;
    }
    if (rec.v3_vector && rec.v3_score && base_score(*rec.v3_vector) != *rec.v3_score)
      report.score_mismatches.push_back(rec.cve_id);

    if (index.upsert(std::move(rec))) ++report.added;
    else ++report.updated;
  }

  auto& feeds = index.metadata().feeds;
  if (std::find(feeds.begin(), feeds.end(), source) == feeds.end()) feeds.emplace_back(source);
  return report;
}

IngestReport ingest_feed(const std::filesystem::path& path, PatternIndex& index) {
  auto bytes = read_file(path);
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f && static_cast<unsigned char>(bytes[1]) == 0x8b)
    bytes = gunzip(bytes, path);
  return ingest_document(bytes, path.filename().string(), index);
}

std::vector<CveRecord> match_pattern(const PatternIndex& index, const PatternQuery& query,
                                     std::optional<std::string_view> product_filter, MatchMode mode) {
  if (query.empty()) throw CorpusError(CorpusError::Kind::EmptyQuery, "pattern constrains no field");

  std::vector<CveRecord> out;
  for (const auto& [id, rec] : index.records()) {
    if (product_filter && !has_product(rec, *product_filter)) continue;
    bool hit = rec.v3_vector && query.matches(*rec.v3_vector);
    if (!hit && mode == MatchMode::Loose && rec.v2_vector) {
      auto pattern = normalize_v2(*rec.v2_vector);
      hit = pattern && query.compatible(*pattern);
    }
    if (hit) out.push_back(rec);
  }
  return out;
}

}  // namespace vulncov
