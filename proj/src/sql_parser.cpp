#include "synql/sql_parser.hpp"

#include <algorithm>
#include <cctype>

#include "synql/error.hpp"

namespace synql {

namespace {

enum class Tok { ident, quoted_ident, number, string, symbol, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;  // identifiers lower-cased unless quoted
  std::size_t offset = 0;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto fail = [&](const std::string& msg) {
    throw ParseError("SQL parse error at offset " + std::to_string(i) + ": " + msg);
  };
  while (i < sql.size()) {
    const auto c = static_cast<unsigned char>(sql[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (sql.substr(i, 2) == "--") {
      while (i < sql.size() && sql[i] != '\n') {
        ++i;
      }
      continue;
    }
    Token t;
    t.offset = i;
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < sql.size() &&
             (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_' || sql[j] == '$')) {
        ++j;
      }
      t.kind = Tok::ident;
      t.text = lower(sql.substr(i, j - i));
      i = j;
    } else if (c == '"') {
      t.kind = Tok::quoted_ident;
      ++i;
      for (;;) {
        if (i >= sql.size()) {
          fail("unterminated quoted identifier");
        }
        if (sql[i] == '"') {
          if (i + 1 < sql.size() && sql[i + 1] == '"') {
            t.text += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        t.text += sql[i++];
      }
    } else if (c == '\'') {
      t.kind = Tok::string;
      t.text = "'";
      ++i;
      for (;;) {
        if (i >= sql.size()) {
          fail("unterminated string literal");
        }
        if (sql[i] == '\'') {
          if (i + 1 < sql.size() && sql[i + 1] == '\'') {
            t.text += "''";
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        t.text += sql[i++];
      }
      t.text += "'";
    } else if (std::isdigit(c) || (c == '.' && i + 1 < sql.size() &&
                                   std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      std::size_t j = i;
      while (j < sql.size()) {
        const auto d = static_cast<unsigned char>(sql[j]);
        if (std::isdigit(d) || d == '.') {
          ++j;
        } else if ((d == 'e' || d == 'E') && j + 1 < sql.size()) {
          ++j;
          if (sql[j] == '+' || sql[j] == '-') {
            ++j;
          }
        } else {
          break;
        }
      }
      t.kind = Tok::number;
      t.text = std::string(sql.substr(i, j - i));
      i = j;
    } else {
      static constexpr std::string_view two[] = {"<=", ">=", "<>", "!="};
      t.kind = Tok::symbol;
      const std::string_view pair = sql.substr(i, 2);
      if (std::find(std::begin(two), std::end(two), pair) != std::end(two)) {
        t.text = std::string(pair);
        i += 2;
      } else if (std::string_view("(),.;*=<>+-").find(static_cast<char>(c)) != std::string_view::npos) {
        t.text = std::string(1, static_cast<char>(c));
        ++i;
      } else {
        fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
      }
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::end, "", sql.size()});
  return out;
}

constexpr std::string_view kClauseWords[] = {
    "select", "from",  "where", "group", "order", "limit", "join",  "inner", "left",
    "right",  "full",  "outer", "cross", "on",    "and",   "or",    "as",    "by",
    "union",  "having", "natural", "using", "offset", "intersect", "except", "asc", "desc"};

bool is_clause_word(const std::string& w) {
  return std::find(std::begin(kClauseWords), std::end(kClauseWords), w) != std::end(kClauseWords);
}

class Parser {
 public:
  explicit Parser(std::string_view sql) : tokens_(tokenize(sql)) {}

  ParsedQuery parse() {
    ParsedQuery q;
    clause_ = "SELECT";
    expect_word("select");
    if (at_word("distinct")) {
      fail("SELECT DISTINCT is outside the supported dialect");
    }
    do {
      q.select.push_back(select_item());
    } while (accept_symbol(","));

    clause_ = "FROM";
    expect_word("from");
    q.from = table_ref();
    if (at_symbol(",")) {
      fail("comma joins are not supported");
    }

    for (;;) {
      clause_ = "JOIN";
      if (at_word("left") || at_word("right") || at_word("full") || at_word("outer") ||
          at_word("cross") || at_word("natural")) {
        fail("only inner joins are supported");
      }
      if (accept_word("inner")) {
        expect_word("join");
      } else if (!accept_word("join")) {
        break;
      }
      ParsedJoin join;
      join.table = table_ref();
      if (at_word("using")) {
        fail("JOIN ... USING is not supported");
      }
      if (!accept_word("on")) {
        fail("JOIN of '" + join.table.table + "' has no ON condition");
      }
      do {
        ParsedColumn left = column();
        expect_symbol("=");
        ParsedColumn right = column();
        join.on.emplace_back(std::move(left), std::move(right));
      } while (accept_word("and"));
      if (at_word("or")) {
        fail("disjunctive join conditions are not supported");
      }
      q.joins.push_back(std::move(join));
      if (at_symbol(",")) {
        fail("comma joins are not supported");
      }
    }

    if (accept_word("where")) {
      clause_ = "WHERE";
      do {
        q.where.push_back(predicate());
      } while (accept_word("and"));
      if (at_word("or")) {
        fail("disjunctive predicates are not supported");
      }
    }
    if (accept_word("group")) {
      clause_ = "GROUP BY";
      expect_word("by");
      do {
        q.group_by.push_back(column());
      } while (accept_symbol(","));
    }
    if (at_word("having")) {
      fail("HAVING is not supported");
    }
    if (accept_word("order")) {
      clause_ = "ORDER BY";
      expect_word("by");
      ParsedOrder order;
      ParsedColumn c = column();
      if (c.qualifier.empty()) {
        order.alias = c.column;
      } else {
        order.column = std::move(c);
      }
      if (accept_word("desc")) {
        order.descending = true;
      } else {
        accept_word("asc");
      }
      if (at_symbol(",")) {
        fail("multi-key ORDER BY is not supported");
      }
      q.order_by = std::move(order);
    }
    if (accept_word("limit")) {
      clause_ = "LIMIT";
      if (peek().kind != Tok::number || peek().text.find_first_not_of("0123456789") != std::string::npos) {
        fail("LIMIT expects a non-negative integer");
      }
      q.limit = std::stoll(next().text);
    }
    clause_ = "end of statement";
    accept_symbol(";");
    if (peek().kind != Tok::end) {
      fail("unexpected trailing token '" + peek().text + "'");
    }
    for (const auto& j : q.joins) {
      for (const auto& [l, r] : j.on) {
        if (l.qualifier.empty() || r.qualifier.empty()) {
          clause_ = "JOIN";
          fail("join condition columns must be qualified");
        }
      }
    }
    return q;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("SQL parse error in " + clause_ + " clause at offset " +
                     std::to_string(peek().offset) + ": " + msg);
  }

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.kind != Tok::end) {
      ++pos_;
    }
    return t;
  }

  bool at_word(std::string_view w) const { return peek().kind == Tok::ident && peek().text == w; }
  bool at_symbol(std::string_view s) const { return peek().kind == Tok::symbol && peek().text == s; }

  bool accept_word(std::string_view w) {
    if (at_word(w)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_symbol(std::string_view s) {
    if (at_symbol(s)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) {
      fail("expected " + upper(w) + (peek().kind == Tok::end ? " before end of input"
                                                             : ", found '" + peek().text + "'"));
    }
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) {
      fail("expected '" + std::string(s) + "'" +
           (peek().kind == Tok::end ? " before end of input" : ", found '" + peek().text + "'"));
    }
  }

  std::string identifier(const char* what) {
    const Token& t = peek();
    if (t.kind == Tok::quoted_ident || (t.kind == Tok::ident && !is_clause_word(t.text))) {
      return next().text;
    }
    if (at_symbol("(")) {
      fail("subqueries are not supported");
    }
    fail(std::string("expected ") + what + (t.kind == Tok::end ? " before end of input"
                                                                : ", found '" + t.text + "'"));
  }

  ParsedColumn column() {
    ParsedColumn c;
    std::string first = identifier("column");
    if (accept_symbol(".")) {
      c.qualifier = std::move(first);
      c.column = identifier("column name");
    } else {
      c.column = std::move(first);
    }
    return c;
  }

  ParsedTable table_ref() {
    if (at_symbol("(")) {
      fail("subqueries are not supported");
    }
    ParsedTable t;
    t.table = identifier("table name");
    if (at_symbol(".")) {
      fail("schema-qualified table names are not supported");
    }
    if (accept_word("as")) {
      t.alias = identifier("table alias");
    } else if (peek().kind == Tok::quoted_ident || (peek().kind == Tok::ident && !is_clause_word(peek().text))) {
      t.alias = next().text;
    } else {
      t.alias = t.table;
    }
    return t;
  }

  ParsedSelectItem select_item() {
    ParsedSelectItem item;
    if (at_symbol("*")) {
      fail("SELECT * is outside the supported dialect");
    }
    if (peek().kind == Tok::ident && tokens_[pos_ + 1].kind == Tok::symbol &&
        tokens_[pos_ + 1].text == "(") {
      item.function = upper(next().text);
      expect_symbol("(");
      if (at_word("select")) {
        fail("subqueries are not supported");
      }
      if (!accept_symbol("*")) {
        accept_word("distinct");
        item.column = column();
      }
      expect_symbol(")");
    } else {
      item.column = column();
    }
    if (accept_word("as")) {
      item.alias = identifier("select alias");
    } else if (peek().kind == Tok::quoted_ident || (peek().kind == Tok::ident && !is_clause_word(peek().text))) {
      item.alias = next().text;
    }
    return item;
  }

  ParsedPredicate predicate() {
    ParsedPredicate p;
    if (at_symbol("(")) {
      fail("parenthesized conditions are not supported");
    }
    if (at_word("exists") || at_word("not")) {
      fail("EXISTS/NOT conditions are not supported");
    }
    p.column = column();
    static constexpr std::string_view ops[] = {"=", "<", ">", "<=", ">=", "<>", "!="};
    if (peek().kind != Tok::symbol || std::find(std::begin(ops), std::end(ops), peek().text) == std::end(ops)) {
      if (at_word("in") || at_word("like") || at_word("between") || at_word("is")) {
        fail("operator " + upper(peek().text) + " is not supported");
      }
      fail("expected a comparison operator");
    }
    p.op = next().text;
    if (at_symbol("(")) {
      fail("subqueries are not supported");
    }
    if (at_symbol("-") || at_symbol("+")) {
      p.operand = next().text;
    }
    const Token& t = peek();
    if (t.kind == Tok::number || t.kind == Tok::string) {
      p.operand += next().text;
    } else if (at_word("date") && tokens_[pos_ + 1].kind == Tok::string) {
      next();
      p.operand += "DATE " + next().text;
    } else if (!accept_word("null")) {
      const ParsedColumn rhs = column();
      p.operand += rhs.qualifier.empty() ? rhs.column : rhs.qualifier + "." + rhs.column;
    } else {
      p.operand = "NULL";
    }
    return p;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::string clause_ = "SELECT";
};

}  // namespace

const std::string& ParsedQuery::resolve(std::string_view qualifier) const {
  if (from.alias == qualifier) {
    return from.table;
  }
  for (const auto& j : joins) {
    if (j.table.alias == qualifier) {
      return j.table.table;
    }
  }
  throw ParseError("unknown table alias '" + std::string(qualifier) + "'");
}

ParsedQuery parse_query(std::string_view sql) { return Parser(sql).parse(); }

JoinGraphSummary join_graph_of(const ParsedQuery& q) {
  JoinGraphSummary s;
  s.root = q.from.table;
  std::vector<std::string> aliases{q.from.alias};
  for (const auto& j : q.joins) {
    if (std::find(aliases.begin(), aliases.end(), j.table.alias) != aliases.end()) {
      throw ParseError("alias '" + j.table.alias + "' is introduced twice");
    }
    std::string other;
    for (const auto& [l, r] : j.on) {
      std::string candidate;
      if (l.qualifier == j.table.alias && r.qualifier != j.table.alias) {
        candidate = r.qualifier;
      } else if (r.qualifier == j.table.alias && l.qualifier != j.table.alias) {
        candidate = l.qualifier;
      } else {
        throw ParseError("ON condition of JOIN '" + j.table.table +
                         "' must compare the joined table with an earlier one");
      }
      if (std::find(aliases.begin(), aliases.end(), candidate) == aliases.end()) {
        throw ParseError("ON condition of JOIN '" + j.table.table + "' references alias '" +
                         candidate + "' before it is introduced");
      }
      if (!other.empty() && other != candidate) {
        throw ParseError("ON condition of JOIN '" + j.table.table +
                         "' references more than one earlier table");
      }
      other = candidate;
    }
    s.edges.emplace_back(q.resolve(other), j.table.table);
    aliases.push_back(j.table.alias);
  }
  return s;
}

JoinGraphSummary parse_join_graph(std::string_view sql) { return join_graph_of(parse_query(sql)); }

std::vector<std::string> split_statements(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  bool in_string = false;
  const auto flush = [&] {
    const auto b = current.find_first_not_of(" \t\r\n");
    if (b != std::string::npos) {
      const auto e = current.find_last_not_of(" \t\r\n");
      out.push_back(current.substr(b, e - b + 1));
    }
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      current += c;
      if (c == '\'') {
        in_string = false;
      }
      continue;
    }
    if (c == '\'') {
      in_string = true;
      current += c;
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') {
        ++i;
      }
      current += ' ';
    } else if (c == ';') {
      flush();
    } else {
      current += (c == '\n' || c == '\r' || c == '\t') ? ' ' : c;
    }
  }
  flush();
  return out;
}

}  // namespace synql
