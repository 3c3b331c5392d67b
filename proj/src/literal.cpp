#include "synql/literal.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <system_error>

#include "synql/error.hpp"

namespace synql {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Base type name without modifiers, e.g. "decimal(15,2)" -> "decimal",
// "double precision" -> "double precision", "int8 unsigned" -> "int8".
std::string base_type(std::string_view sql_type) {
  std::string t = lower(sql_type);
  if (auto paren = t.find('('); paren != std::string::npos) {
    t.erase(paren);
  }
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) {
    t.pop_back();
  }
  std::size_t start = 0;
  while (start < t.size() && std::isspace(static_cast<unsigned char>(t[start]))) {
    ++start;
  }
  t.erase(0, start);
  for (std::string_view suffix : {" unsigned", " signed"}) {
    if (t.size() > suffix.size() && t.ends_with(suffix)) {
      t.erase(t.size() - suffix.size());
    }
  }
  return t;
}

constexpr std::array kIntegerTypes = {
    "smallint", "integer", "int", "int2", "int4", "int8", "bigint", "tinyint",
    "mediumint", "serial", "bigserial", "smallserial", "serial4", "serial8"};
constexpr std::array kRealTypes = {
    "decimal", "numeric", "real", "float", "float4", "float8", "double", "double precision"};

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(std::string("invalid ") + what + " value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::integer:
      return "integer";
    case ValueKind::real:
      return "real";
    case ValueKind::date:
      return "date";
    case ValueKind::text:
      return "text";
  }
  return "unknown";
}

Date Date::parse(std::string_view iso) {
  using namespace std::chrono;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw ParseError("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
  }
  const int y = parse_number<int>(iso.substr(0, 4), "date");
  const auto m = parse_number<unsigned>(iso.substr(5, 2), "date");
  const auto d = parse_number<unsigned>(iso.substr(8, 2), "date");
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date '" + std::string(iso) + "'");
  }
  return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

std::string Date::to_iso() const {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return std::string(buf.data());
}

ValueKind kind_of(const Literal& value) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          return ValueKind::integer;
        } else if constexpr (std::is_same_v<T, double>) {
          return ValueKind::real;
        } else if constexpr (std::is_same_v<T, Date>) {
          return ValueKind::date;
        } else {
          return ValueKind::text;
        }
      },
      value);
}

ValueKind classify_sql_type(std::string_view sql_type) {
  const std::string t = base_type(sql_type);
  if (std::find(kIntegerTypes.begin(), kIntegerTypes.end(), t) != kIntegerTypes.end()) {
    return ValueKind::integer;
  }
  if (std::find(kRealTypes.begin(), kRealTypes.end(), t) != kRealTypes.end()) {
    return ValueKind::real;
  }
  if (t == "date") {
    return ValueKind::date;
  }
  return ValueKind::text;
}

std::partial_ordering compare(const Literal& a, const Literal& b) {
  const ValueKind ka = kind_of(a);
  const ValueKind kb = kind_of(b);
  if (is_numeric_kind(ka) && is_numeric_kind(kb)) {
    if (ka == ValueKind::integer && kb == ValueKind::integer) {
      return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
    }
    const auto as_double = [](const Literal& v) {
      return kind_of(v) == ValueKind::integer ? static_cast<double>(std::get<std::int64_t>(v))
                                              : std::get<double>(v);
    };
    return as_double(a) <=> as_double(b);
  }
  if (ka != kb) {
    throw ValidationError("cannot compare " + std::string(to_string(ka)) + " with " +
                          std::string(to_string(kb)));
  }
  if (ka == ValueKind::date) {
    return std::get<Date>(a) <=> std::get<Date>(b);
  }
  return std::get<std::string>(a).compare(std::get<std::string>(b)) <=> 0;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) {
    throw InternalError("format_double failed");
  }
  std::string text(buf.data(), ptr);
  return text;
}

std::string to_text(const Literal& value) {
  switch (kind_of(value)) {
    case ValueKind::integer:
      return std::to_string(std::get<std::int64_t>(value));
    case ValueKind::real:
      return format_double(std::get<double>(value));
    case ValueKind::date:
      return std::get<Date>(value).to_iso();
    case ValueKind::text:
      return std::get<std::string>(value);
  }
  return {};
}

std::string to_sql(const Literal& value) {
  const auto quote = [](std::string_view s) {
    std::string out = "'";
    for (char c : s) {
      if (c == '\'') {
        out += '\'';
      }
      out += c;
    }
    out += '\'';
    return out;
  };
  switch (kind_of(value)) {
    case ValueKind::integer:
      return std::to_string(std::get<std::int64_t>(value));
    case ValueKind::real: {
      std::string text = format_double(std::get<double>(value));
      // Keep a decimal point so engines never read the literal as an integer.
      if (text.find_first_of(".e") == std::string::npos) {
        text += ".0";
      }
      return text;
    }
    case ValueKind::date:
      return quote(std::get<Date>(value).to_iso());
    case ValueKind::text:
      return quote(std::get<std::string>(value));
  }
  return {};
}

Literal literal_from_json(const nlohmann::json& value, ValueKind kind) {
  switch (kind) {
    case ValueKind::integer:
      if (value.is_number_integer()) {
        return value.get<std::int64_t>();
      }
      if (value.is_number_float()) {
        const double d = value.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9.0e15) {
          return static_cast<std::int64_t>(d);
        }
      }
      throw ParseError("expected an integer value, got " + value.dump());
    case ValueKind::real:
      if (value.is_number()) {
        return value.get<double>();
      }
      throw ParseError("expected a numeric value, got " + value.dump());
    case ValueKind::date:
      if (value.is_string()) {
        return Date::parse(value.get<std::string>());
      }
      throw ParseError("expected a date string, got " + value.dump());
    case ValueKind::text:
      if (value.is_string()) {
        return value.get<std::string>();
      }
      if (value.is_number() || value.is_boolean()) {
        return value.dump();
      }
      throw ParseError("expected a string value, got " + value.dump());
  }
  throw InternalError("unreachable value kind");
}

Literal literal_from_text(std::string_view text, ValueKind kind) {
  switch (kind) {
    case ValueKind::integer:
      return parse_number<std::int64_t>(text, "integer");
    case ValueKind::real: {
      // Engines may render numerics with exponent or trailing zeros; from_chars handles both.
      return parse_number<double>(text, "real");
    }
    case ValueKind::date:
      return Date::parse(text.substr(0, std::min<std::size_t>(text.size(), 10)));
    case ValueKind::text:
      return std::string(text);
  }
  throw InternalError("unreachable value kind");
}

nlohmann::json literal_to_json(const Literal& value) {
  switch (kind_of(value)) {
    case ValueKind::integer:
      return std::get<std::int64_t>(value);
    case ValueKind::real:
      return std::get<double>(value);
    case ValueKind::date:
      return std::get<Date>(value).to_iso();
    case ValueKind::text:
      return std::get<std::string>(value);
  }
  return nullptr;
}

}  // namespace synql
