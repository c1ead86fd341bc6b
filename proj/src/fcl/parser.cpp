#include "fclloop/fcl/parser.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <set>

#include "fclloop/error.hpp"

namespace fclloop::fcl {

std::string Diagnostic::to_string() const {
  return std::to_string(line) + ":" + std::to_string(column) + ": error: " + message;
}

namespace {

constexpr int kMaxNesting = 200;

struct Token {
  enum class Kind { Ident, Int, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t int_value = 0;
  int line = 1;
  int column = 1;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string doc;
};

const std::set<std::string, std::less<>> kKeywords = {
    "constraint", "at", "start", "each", "step", "forall", "exists", "in", "implies", "or",
    "and", "not", "F", "G", "P", "count", "MAX", "BEG", "INF"};

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  Lexer(std::string_view text, std::vector<Diagnostic>& diags) : text_(text), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token tok;
      tok.line = line_;
      tok.column = col_;
      tok.begin = pos_;
      tok.doc = std::move(pending_doc_);
      pending_doc_.clear();
      if (pos_ >= text_.size()) {
        tok.kind = Token::Kind::End;
        tok.end = pos_;
        out.push_back(std::move(tok));
        return out;
      }
      char c = text_[pos_];
      if (is_ident_start(c)) {
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
        tok.kind = Token::Kind::Ident;
        tok.text = std::string(text_.substr(tok.begin, pos_ - tok.begin));
      } else if (is_digit(c)) {
        while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
        tok.kind = Token::Kind::Int;
        tok.text = std::string(text_.substr(tok.begin, pos_ - tok.begin));
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.int_value);
        if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size()) {
          diags_.push_back({tok.line, tok.column, Diagnostic::Kind::Syntax, "integer literal out of range"});
          tok.int_value = 0;
        }
      } else if (c == '"') {
        if (!lex_string(tok)) continue;
      } else if (!lex_punct(tok)) {
        diags_.push_back({tok.line, tok.column, Diagnostic::Kind::Syntax,
                          "unexpected character " + describe_byte(c)});
        advance();
        continue;
      }
      tok.end = pos_;
      out.push_back(std::move(tok));
    }
  }

 private:
  static std::string describe_byte(char c) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
    const char* hex = "0123456789abcdef";
    return std::string("0x") + hex[u >> 4] + hex[u & 0xf];
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    bool line_has_content = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        if (!line_has_content) pending_doc_.clear();
        line_has_content = false;
        advance();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        std::string_view comment = text_.substr(start, pos_ - start);
        if (comment.starts_with("##")) {
          comment.remove_prefix(2);
          while (!comment.empty() && (comment.front() == ' ' || comment.front() == '\t')) comment.remove_prefix(1);
          while (!comment.empty() && (comment.back() == ' ' || comment.back() == '\r')) comment.remove_suffix(1);
          if (!pending_doc_.empty()) pending_doc_ += ' ';
          pending_doc_ += comment;
        } else {
          pending_doc_.clear();
        }
        line_has_content = true;
      } else {
        return;
      }
    }
  }

  bool lex_string(Token& tok) {
    advance();
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '"' || text_[pos_ + 1] == '\\')) {
        advance();
      }
      value += text_[pos_];
      advance();
    }
    if (pos_ >= text_.size() || text_[pos_] != '"') {
      diags_.push_back({tok.line, tok.column, Diagnostic::Kind::Syntax, "unterminated string literal"});
      return false;
    }
    advance();
    tok.kind = Token::Kind::String;
    tok.text = std::move(value);
    return true;
  }

  bool lex_punct(Token& tok) {
    static constexpr std::string_view two[] = {"<=", ">=", "==", "!="};
    static constexpr std::string_view one = "[](),:.-<>";
    for (auto p : two) {
      if (text_.substr(pos_, 2) == p) {
        advance();
        advance();
        tok.kind = Token::Kind::Punct;
        tok.text = std::string(p);
        return true;
      }
    }
    if (one.find(text_[pos_]) != std::string_view::npos) {
      tok.kind = Token::Kind::Punct;
      tok.text = std::string(1, text_[pos_]);
      advance();
      return true;
    }
    return false;
  }

  std::string_view text_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::string pending_doc_;
};

struct SyntaxError {
  Diagnostic diag;
};

enum class TermType { Int, String, Unknown };  // Unknown: already diagnosed

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string_view text, const Catalog& catalog, std::vector<Diagnostic>& diags)
      : toks_(std::move(tokens)), text_(text), catalog_(catalog), diags_(diags) {}

  std::vector<Constraint> parse_file() {
    std::vector<Constraint> out;
    std::set<std::string> names;
    while (peek().kind != Token::Kind::End) {
      std::size_t before = diags_.size();
      constraint_start_ = pos_;
      try {
        Constraint c = parse_constraint();
        if (!names.insert(c.name).second) {
          diags_.push_back({name_line_, name_col_, Diagnostic::Kind::DuplicateName,
                            "duplicate constraint name \"" + c.name + "\""});
        }
        if (diags_.size() == before) out.push_back(std::move(c));
      } catch (const SyntaxError& e) {
        diags_.push_back(e.diag);
        recover();
      }
    }
    return out;
  }

  FormulaPtr parse_single() {
    try {
      FormulaPtr f = parse_formula();
      if (peek().kind != Token::Kind::End) fail(peek(), "expected end of formula");
      return f;
    } catch (const SyntaxError& e) {
      diags_.push_back(e.diag);
      return nullptr;
    }
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }

  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    last_end_ = t.end;
    return t;
  }

  bool at_word(std::string_view word, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Ident && t.text == word;
  }

  bool at_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Punct && t.text == p;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Kind::End:
        return "end of input";
      case Token::Kind::String:
        return "string \"" + t.text + "\"";
      default:
        return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(const Token& at, const std::string& expected) const {
    throw SyntaxError{{at.line, at.column, Diagnostic::Kind::Syntax, expected + ", found " + describe(at)}};
  }

  void expect_word(std::string_view word) {
    if (!at_word(word)) fail(peek(), "expected '" + std::string(word) + "'");
    take();
  }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
    take();
  }

  const Token& expect_ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident || kKeywords.count(t.text) != 0) fail(t, "expected " + what);
    return take();
  }

  void recover() {
    if (pos_ == constraint_start_ && peek().kind != Token::Kind::End) take();
    while (peek().kind != Token::Kind::End && !at_word("constraint")) take();
    scope_.clear();
    nesting_ = 0;
  }

  void semantic(const Token& at, Diagnostic::Kind kind, std::string message) {
    diags_.push_back({at.line, at.column, kind, std::move(message)});
  }

  Constraint parse_constraint() {
    const Token& head = peek();
    if (!at_word("constraint")) fail(head, "expected 'constraint'");
    Constraint c;
    c.gloss = head.doc;
    std::size_t begin = head.begin;
    take();
    const Token& name = peek();
    if (name.kind != Token::Kind::String) fail(name, "expected constraint name string");
    name_line_ = name.line;
    name_col_ = name.column;
    c.name = take().text;
    if (c.name.empty()) semantic(name, Diagnostic::Kind::Syntax, "constraint name must not be empty");
    expect_word("at");
    if (at_word("start")) {
      take();
      c.mode = Mode::AtStart;
    } else if (at_word("each")) {
      take();
      expect_word("step");
      c.mode = Mode::AtEachStep;
    } else {
      fail(peek(), "expected 'start' or 'each step'");
    }
    expect_punct(":");
    c.formula = parse_formula();
    if (peek().kind != Token::Kind::End && !at_word("constraint")) {
      fail(peek(), "expected 'constraint' or end of input");
    }
    c.source_text = std::string(text_.substr(begin, last_end_ - begin));
    return c;
  }

  struct NestGuard {
    explicit NestGuard(Parser& p) : p_(p) {
      if (++p_.nesting_ > kMaxNesting) p_.fail(p_.peek(), "formula nested too deeply; expected a simpler expression");
    }
    ~NestGuard() { --p_.nesting_; }
    Parser& p_;
  };

  FormulaPtr parse_formula() {
    NestGuard guard(*this);
    if (at_word("forall") || at_word("exists")) {
      Quantifier q = peek().text == "forall" ? Quantifier::Forall : Quantifier::Exists;
      take();
      std::string var = expect_ident("variable name").text;
      expect_word("in");
      const Token& dom = expect_ident("set name");
      if (!catalog_.has_set(dom.text)) semantic(dom, Diagnostic::Kind::UnknownSet, "unknown set '" + dom.text + "'");
      std::string domain = dom.text;
      expect_punct(":");
      scope_.push_back(var);
      FormulaPtr body = parse_formula();
      scope_.pop_back();
      return make_quant(q, std::move(var), std::move(domain), std::move(body));
    }
    return parse_implies();
  }

  FormulaPtr parse_implies() {
    FormulaPtr lhs = parse_or();
    if (at_word("implies")) {
      take();
      NestGuard guard(*this);
      FormulaPtr rhs = parse_implies();
      return make_binary(BinOp::Implies, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    while (at_word("or")) {
      take();
      lhs = make_binary(BinOp::Or, std::move(lhs), parse_and());
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_unary();
    while (at_word("and")) {
      take();
      lhs = make_binary(BinOp::And, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    NestGuard guard(*this);
    if (at_word("not")) {
      take();
      return make_not(parse_unary());
    }
    if ((at_word("F") || at_word("G") || at_word("P")) && at_punct("[", 1)) return parse_window();
    if (at_punct("(")) {
      take();
      FormulaPtr f = parse_formula();
      expect_punct(")");
      return f;
    }
    return parse_atom();
  }

  FormulaPtr parse_window() {
    const Token& op = take();
    expect_punct("[");
    if (op.text == "G") {
      const Token& at = peek();
      NumExpr t = parse_num(/*allow_inf=*/false);
      expect_punct("]");
      if (t.negated) {
        semantic(at, Diagnostic::Kind::NegativeCount, "always-window length must not be negative");
        t.negated = false;
      }
      return desugar_always(t, parse_unary());
    }
    expect_punct(">=");
    const Token& n_at = peek();
    NumExpr n = parse_num(/*allow_inf=*/false);
    if (n.negated) semantic(n_at, Diagnostic::Kind::NegativeCount, "window count must not be negative");
    expect_punct(",");
    NumExpr t = parse_num(/*allow_inf=*/true);
    expect_punct("]");
    if (op.text == "P") t = t.negate();
    return make_window(n, t, parse_unary());
  }

  NumExpr parse_num(bool allow_inf) {
    bool negated = false;
    if (at_punct("-")) {
      take();
      negated = true;
    }
    const Token& t = peek();
    NumExpr out;
    if (t.kind == Token::Kind::Int) {
      out = NumExpr{NumExpr::Kind::Literal, t.int_value, false};
    } else if (at_word("MAX")) {
      out = NumExpr::max();
    } else if (at_word("BEG")) {
      out = NumExpr::beg();
    } else if (at_word("INF")) {
      if (!allow_inf) fail(t, "INF is only allowed as a window length; expected integer, MAX or BEG");
      out = NumExpr::inf();
    } else {
      fail(t, "expected integer, MAX, BEG or INF");
    }
    take();
    out.negated = negated;
    return out;
  }

  void check_bound(const Token& at, const std::string& var) {
    if (std::find(scope_.begin(), scope_.end(), var) == scope_.end()) {
      semantic(at, Diagnostic::Kind::FreeVariable, "free variable '" + var + "'; bind it with forall/exists");
    }
  }

  std::pair<Term, TermType> parse_term() {
    const Token& t = peek();
    if (t.kind == Token::Kind::String) {
      take();
      return {StringLit{t.text}, TermType::String};
    }
    if (at_word("count")) {
      take();
      expect_punct("(");
      const Token& set = expect_ident("set name");
      if (!catalog_.has_set(set.text)) semantic(set, Diagnostic::Kind::UnknownSet, "unknown set '" + set.text + "'");
      expect_punct(")");
      return {Cardinality{set.text}, TermType::Int};
    }
    if (t.kind == Token::Kind::Int || at_punct("-") || at_word("MAX") || at_word("BEG") || at_word("INF")) {
      if (at_word("INF")) fail(t, "INF is only allowed as a window length; expected a term");
      return {parse_num(false), TermType::Int};
    }
    if (t.kind == Token::Kind::Ident && kKeywords.count(t.text) == 0 && at_punct(".", 1)) {
      const Token& var = take();
      take();
      const Token& attr = expect_ident("attribute name");
      check_bound(var, var.text);
      if (!catalog_.has_attribute(attr.text)) {
        semantic(attr, Diagnostic::Kind::UnknownAttribute, "unknown attribute '" + attr.text + "'");
        return {AttrAccess{var.text, attr.text}, TermType::Unknown};
      }
      return {AttrAccess{var.text, attr.text},
              catalog_.is_int_attribute(attr.text) ? TermType::Int : TermType::String};
    }
    fail(t, "expected a term (integer, MAX, BEG, var.attr, count(Set) or string)");
  }

  FormulaPtr parse_atom() {
    if (peek().kind == Token::Kind::Ident && kKeywords.count(peek().text) == 0 && at_word("in", 1)) {
      const Token& var = take();
      take();
      const Token& set = expect_ident("set name");
      check_bound(var, var.text);
      if (!catalog_.has_set(set.text)) semantic(set, Diagnostic::Kind::UnknownSet, "unknown set '" + set.text + "'");
      return make_member(var.text, set.text);
    }
    const Token& start = peek();
    auto [lhs, lhs_type] = parse_term();
    const Token& op_tok = peek();
    std::optional<CmpOp> op;
    if (op_tok.kind == Token::Kind::Punct) {
      if (op_tok.text == "<") op = CmpOp::Lt;
      if (op_tok.text == "<=") op = CmpOp::Le;
      if (op_tok.text == "==") op = CmpOp::Eq;
      if (op_tok.text == "!=") op = CmpOp::Ne;
      if (op_tok.text == ">=") op = CmpOp::Ge;
      if (op_tok.text == ">") op = CmpOp::Gt;
    }
    if (!op) fail(op_tok, "expected comparison operator (<, <=, ==, !=, >=, >)");
    take();
    auto [rhs, rhs_type] = parse_term();
    bool typed = lhs_type != TermType::Unknown && rhs_type != TermType::Unknown;
    if (typed && lhs_type != rhs_type) {
      semantic(start, Diagnostic::Kind::TypeMismatch, "cannot compare a number with a string");
    } else if (typed && lhs_type == TermType::String && *op != CmpOp::Eq && *op != CmpOp::Ne) {
      semantic(op_tok, Diagnostic::Kind::TypeMismatch, "strings may only be compared with == or !=");
    }
    return make_compare(std::move(lhs), *op, std::move(rhs));
  }

  std::vector<Token> toks_;
  std::size_t constraint_start_ = 0;
  std::string_view text_;
  const Catalog& catalog_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  std::vector<std::string> scope_;
  int nesting_ = 0;
  int name_line_ = 0;
  int name_col_ = 0;
};

}  // namespace

ParseResult parse_constraints(std::string_view text, const Catalog& catalog) {
  ParseResult result;
  Lexer lexer(text, result.diagnostics);
  auto tokens = lexer.run();
  Parser parser(std::move(tokens), text, catalog, result.diagnostics);
  auto constraints = parser.parse_file();
  if (result.diagnostics.empty()) result.constraints = std::move(constraints);
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(), [](const auto& a, const auto& b) {
    return a.line != b.line ? a.line < b.line : a.column < b.column;
  });
  return result;
}

FormulaParseResult parse_formula(std::string_view text, const Catalog& catalog) {
  FormulaParseResult result;
  Lexer lexer(text, result.diagnostics);
  auto tokens = lexer.run();
  Parser parser(std::move(tokens), text, catalog, result.diagnostics);
  FormulaPtr f = parser.parse_single();
  if (result.diagnostics.empty()) result.formula = std::move(f);
  return result;
}

}  // namespace fclloop::fcl
