#include "vulncov/cvss.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace vulncov {

namespace {

constexpr std::array<std::string_view, kFieldCount> kFieldNames{"AV", "AC", "PR", "UI",
                                                                "S",  "C",  "I",  "A"};
constexpr std::array<std::string_view, kFieldCount> kValueSymbols{"NALP", "LH",  "NLH", "NR",
                                                                  "UC",   "NLH", "NLH", "NLH"};

constexpr double kImpactWeight[] = {0.0, 0.22, 0.56};
constexpr double kAttackVectorWeight[] = {0.85, 0.62, 0.55, 0.2};
constexpr double kAttackComplexityWeight[] = {0.77, 0.44};
constexpr double kPrivilegesUnchanged[] = {0.85, 0.62, 0.27};
constexpr double kPrivilegesChanged[] = {0.85, 0.68, 0.5};
constexpr double kUserInteractionWeight[] = {0.85, 0.62};

std::optional<std::size_t> field_index(std::string_view name) {
  auto it = std::find(kFieldNames.begin(), kFieldNames.end(), name);
  if (it == kFieldNames.end()) return std::nullopt;
  return static_cast<std::size_t>(it - kFieldNames.begin());
}

std::string describe(ParseError::Kind kind, const std::string& token) {
  std::string msg(parse_error_kind_name(kind));
  msg += ": '";
  msg += token;
  msg += "'";
  return msg;
}

}  // namespace

std::string_view field_name(Field f) noexcept { return kFieldNames[static_cast<std::size_t>(f)]; }

char value_symbol(Field f, std::uint8_t value) noexcept {
  return kValueSymbols[static_cast<std::size_t>(f)][value];
}

std::uint8_t CvssVector::get(Field f) const noexcept {
  switch (f) {
    case Field::AV: return static_cast<std::uint8_t>(av);
    case Field::AC: return static_cast<std::uint8_t>(ac);
    case Field::PR: return static_cast<std::uint8_t>(pr);
    case Field::UI: return static_cast<std::uint8_t>(ui);
    case Field::S: return static_cast<std::uint8_t>(s);
    case Field::C: return static_cast<std::uint8_t>(c);
    case Field::I: return static_cast<std::uint8_t>(i);
    case Field::A: return static_cast<std::uint8_t>(a);
  }
  return 0;
}

void CvssVector::set(Field f, std::uint8_t value) noexcept {
  switch (f) {
    case Field::AV: av = static_cast<AttackVector>(value); break;
    case Field::AC: ac = static_cast<AttackComplexity>(value); break;
    case Field::PR: pr = static_cast<PrivilegesRequired>(value); break;
    case Field::UI: ui = static_cast<UserInteraction>(value); break;
    case Field::S: s = static_cast<Scope>(value); break;
    case Field::C: c = static_cast<Impact>(value); break;
    case Field::I: i = static_cast<Impact>(value); break;
    case Field::A: a = static_cast<Impact>(value); break;
  }
}

std::size_t CvssVector::ordinal() const noexcept {
  std::size_t n = 0;
  for (std::size_t f = 0; f < kFieldCount; ++f) n = n * kDomainSizes[f] + get(static_cast<Field>(f));
  return n;
}

CvssVector CvssVector::from_ordinal(std::size_t ordinal) noexcept {
  CvssVector v;
  for (std::size_t f = kFieldCount; f-- > 0;) {
    v.set(static_cast<Field>(f), static_cast<std::uint8_t>(ordinal % kDomainSizes[f]));
    ordinal /= kDomainSizes[f];
  }
  return v;
}

std::string_view severity_name(Severity s) noexcept {
  switch (s) {
    case Severity::None: return "None";
    case Severity::Low: return "Low";
    case Severity::Medium: return "Medium";
    case Severity::High: return "High";
    case Severity::Critical: return "Critical";
  }
  return "None";
}

Score Score::from_double(double value) {
  if (!(value >= 0.0 && value <= 10.0)) throw std::out_of_range("score outside [0.0, 10.0]");
  return Score(static_cast<int>(std::lround(value * 10.0)));
}

Severity Score::band() const noexcept {
  if (tenths_ == 0) return Severity::None;
  if (tenths_ < 40) return Severity::Low;
  if (tenths_ < 70) return Severity::Medium;
  if (tenths_ < 90) return Severity::High;
  return Severity::Critical;
}

std::string Score::to_string() const {
  return std::to_string(tenths_ / 10) + '.' + static_cast<char>('0' + tenths_ % 10);
}

ParseError::ParseError(Kind kind, std::string token)
    : std::runtime_error(describe(kind, token)), kind_(kind), token_(std::move(token)) {}

std::string_view parse_error_kind_name(ParseError::Kind kind) noexcept {
  switch (kind) {
    case ParseError::Kind::MissingField: return "MissingField";
    case ParseError::Kind::DuplicateField: return "DuplicateField";
    case ParseError::Kind::UnknownValue: return "UnknownValue";
    case ParseError::Kind::BadSyntax: return "BadSyntax";
  }
  return "BadSyntax";
}

CvssVector parse_vector(std::string_view text) {
  using Kind = ParseError::Kind;

  if (text.starts_with("CVSS:3.0/") || text.starts_with("CVSS:3.1/")) text.remove_prefix(9);

  std::vector<std::string_view> tokens;
  for (std::size_t start = 0;;) {
    auto slash = text.find('/', start);
    tokens.push_back(text.substr(start, slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }

  struct Entry {
    std::size_t field;
    std::uint8_t value;
    std::string_view token;
  };
  std::vector<Entry> entries;
  std::array<bool, kFieldCount> seen{};

  for (auto token : tokens) {
    auto colon = token.find(':');
    if (colon == std::string_view::npos || colon == 0) throw ParseError(Kind::BadSyntax, std::string(token));
    auto f = field_index(token.substr(0, colon));
    if (!f) throw ParseError(Kind::BadSyntax, std::string(token));
    if (seen[*f]) throw ParseError(Kind::DuplicateField, std::string(token));
    seen[*f] = true;

    auto value = token.substr(colon + 1);
    auto pos = value.size() == 1 ? kValueSymbols[*f].find(value[0]) : std::string_view::npos;
    if (pos == std::string_view::npos) throw ParseError(Kind::UnknownValue, std::string(token));
    entries.push_back({*f, static_cast<std::uint8_t>(pos), token});
  }

  for (std::size_t f = 0; f < kFieldCount; ++f)
    if (!seen[f]) throw ParseError(Kind::MissingField, std::string(kFieldNames[f]));

  CvssVector v;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].field != k) throw ParseError(Kind::BadSyntax, std::string(entries[k].token));
    v.set(static_cast<Field>(k), entries[k].value);
  }
  return v;
}

std::string to_canonical_string(const CvssVector& v) {
  std::string out;
  out.reserve(36);
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    auto field = static_cast<Field>(f);
    if (f) out += '/';
    out += field_name(field);
    out += ':';
    out += value_symbol(field, v.get(field));
  }
  return out;
}

Score roundup(double x) noexcept {
  auto scaled = std::llround(x * 100000.0);
  if (scaled % 10000 == 0) return Score::from_tenths(static_cast<int>(scaled / 10000));
  return Score::from_tenths(static_cast<int>(scaled / 10000 + 1));
}

Score base_score(const CvssVector& v) noexcept {
  const bool changed = v.s == Scope::Changed;

  const double isc_base = 1.0 - (1.0 - kImpactWeight[static_cast<int>(v.c)]) *
                                    (1.0 - kImpactWeight[static_cast<int>(v.i)]) *
                                    (1.0 - kImpactWeight[static_cast<int>(v.a)]);
  const double impact = changed ? 7.52 * (isc_base - 0.029) - 3.25 * std::pow(isc_base - 0.02, 15)
                                : 6.42 * isc_base;
  if (impact <= 0.0) return Score{};

  const double* pr_weights = changed ? kPrivilegesChanged : kPrivilegesUnchanged;
  const double exploitability = 8.22 * kAttackVectorWeight[static_cast<int>(v.av)] *
                                kAttackComplexityWeight[static_cast<int>(v.ac)] *
                                pr_weights[static_cast<int>(v.pr)] *
                                kUserInteractionWeight[static_cast<int>(v.ui)];

  if (changed) return roundup(std::min(1.08 * (impact + exploitability), 10.0));
  return roundup(std::min(impact + exploitability, 10.0));
}

int hamming(const CvssVector& u, const CvssVector& v) noexcept {
  int d = 0;
  for (std::size_t f = 0; f < kFieldCount; ++f) d += u.get(static_cast<Field>(f)) != v.get(static_cast<Field>(f));
  return d;
}

}  // namespace vulncov
