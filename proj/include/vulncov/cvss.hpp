#pragma once

/// @file cvss.hpp
/// @brief CVSS v3 base-metric vectors: parsing, canonical formatting,
/// base-score computation and Hamming distance.
///
/// A vector is eight enumerated fields (AV, AC, PR, UI, S, C, I, A). Every
/// field value also has a dense index into its domain, which is what the
/// search engines mutate; the typed members are what scoring reads.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vulncov {

enum class AttackVector : std::uint8_t { Network, Adjacent, Local, Physical };
enum class AttackComplexity : std::uint8_t { Low, High };
enum class PrivilegesRequired : std::uint8_t { None, Low, High };
enum class UserInteraction : std::uint8_t { None, Required };
enum class Scope : std::uint8_t { Unchanged, Changed };
/// Shared by the Confidentiality, Integrity and Availability metrics.
enum class Impact : std::uint8_t { None, Low, High };

enum class Field : std::uint8_t { AV, AC, PR, UI, S, C, I, A };

inline constexpr std::size_t kFieldCount = 8;
inline constexpr std::array<std::size_t, kFieldCount> kDomainSizes{4, 2, 3, 2, 2, 3, 3, 3};
inline constexpr std::size_t kVectorSpaceSize = 2592;

/// Metric abbreviation, e.g. "AV".
std::string_view field_name(Field f) noexcept;
/// Value letter for a dense domain index, e.g. (AV, 2) -> 'L'.
char value_symbol(Field f, std::uint8_t value) noexcept;

struct CvssVector {
  AttackVector av = AttackVector::Network;
  AttackComplexity ac = AttackComplexity::Low;
  PrivilegesRequired pr = PrivilegesRequired::None;
  UserInteraction ui = UserInteraction::None;
  Scope s = Scope::Unchanged;
  Impact c = Impact::None;
  Impact i = Impact::None;
  Impact a = Impact::None;

  friend constexpr auto operator<=>(const CvssVector&, const CvssVector&) = default;

  /// Dense domain index of one field.
  std::uint8_t get(Field f) const noexcept;
  /// Sets one field from its dense domain index; value must be < kDomainSizes[f].
  void set(Field f, std::uint8_t value) noexcept;

  /// Mixed-radix position in canonical enumeration order (AV most significant).
  std::size_t ordinal() const noexcept;
  static CvssVector from_ordinal(std::size_t ordinal) noexcept;
};

enum class Severity : std::uint8_t { None, Low, Medium, High, Critical };

std::string_view severity_name(Severity s) noexcept;

/// One-decimal fixed-point score in [0.0, 10.0], stored in tenths.
class Score {
 public:
  constexpr Score() = default;
  static constexpr Score from_tenths(int tenths) { return Score(tenths); }
  /// Rounds to the nearest tenth; throws std::out_of_range outside [0, 10].
  static Score from_double(double value);

  constexpr int tenths() const noexcept { return tenths_; }
  constexpr double value() const noexcept { return tenths_ / 10.0; }
  Severity band() const noexcept;
  /// Always one decimal digit, e.g. "9.8", "10.0".
  std::string to_string() const;

  friend constexpr auto operator<=>(Score, Score) = default;

 private:
  constexpr explicit Score(int tenths) : tenths_(tenths) {}
  int tenths_ = 0;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { MissingField, DuplicateField, UnknownValue, BadSyntax };

  ParseError(Kind kind, std::string token);

  Kind kind() const noexcept { return kind_; }
  /// The offending token (or field name for MissingField).
  const std::string& token() const noexcept { return token_; }

 private:
  Kind kind_;
  std::string token_;
};

std::string_view parse_error_kind_name(ParseError::Kind kind) noexcept;

/// Parses "AV:_/AC:_/PR:_/UI:_/S:_/C:_/I:_/A:_" with an optional
/// "CVSS:3.0/" or "CVSS:3.1/" prefix. Fields must be in canonical order.
CvssVector parse_vector(std::string_view text);

/// Canonical form without version prefix.
std::string to_canonical_string(const CvssVector& v);

/// CVSS v3.0 base score.
Score base_score(const CvssVector& v) noexcept;

/// CVSS roundup: smallest one-decimal value >= x, computed on an integer
/// scale so that e.g. 4.000000000000001 rounds to 4.0.
Score roundup(double x) noexcept;

/// Number of differing fields, in [0, 8].
int hamming(const CvssVector& u, const CvssVector& v) noexcept;

}  // namespace vulncov
