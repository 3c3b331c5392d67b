#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace synql {

/// Value domain of a column, derived from its declared SQL type.
enum class ValueKind { integer, real, date, text };

std::string_view to_string(ValueKind kind);

/// Calendar date stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  static Date parse(std::string_view iso);  // YYYY-MM-DD
  std::string to_iso() const;

  auto operator<=>(const Date&) const = default;
};

using Literal = std::variant<std::int64_t, double, Date, std::string>;

ValueKind kind_of(const Literal& value);

/// Classifies a declared type name. Integer/decimal/floating families are
/// numeric (explicit whitelist), `date` is a date, everything else is text.
ValueKind classify_sql_type(std::string_view sql_type);

inline bool is_numeric_kind(ValueKind kind) {
  return kind == ValueKind::integer || kind == ValueKind::real;
}

/// Total order within one kind. Integer and real compare numerically against
/// each other; other cross-kind comparisons throw ValidationError.
std::partial_ordering compare(const Literal& a, const Literal& b);

/// SQL text for the literal in the common dialect core: bare numbers, quoted
/// ISO dates and quoted strings with '' escaping. Reals are printed with the
/// shortest round-trip representation.
std::string to_sql(const Literal& value);

/// Plain text (no quoting); reals use the shortest round-trip representation.
std::string to_text(const Literal& value);

/// Converts a JSON scalar to a literal of the given kind; throws ParseError on
/// a type mismatch.
Literal literal_from_json(const nlohmann::json& value, ValueKind kind);

/// Parses the engine text representation of a value of the given kind.
Literal literal_from_text(std::string_view text, ValueKind kind);

nlohmann::json literal_to_json(const Literal& value);

std::string format_double(double value);

}  // namespace synql
