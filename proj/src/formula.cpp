#include "agimstl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "agimstl/errors.hpp"
#include "agimstl/util.hpp"

namespace agim {

namespace {

struct Token {
  enum Kind { Ident, Number, Amp, Pipe, Bang, LParen, RParen, LBracket, RBracket, Comma, Ge, Le, End };
  Kind kind;
  std::string text;
  double num = 0.0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.kind = Token::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.kind = Token::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                 ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
                  (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '.'))) {
        const char* begin = src_.data() + pos_;
        const char* end = src_.data() + src_.size();
        double value = 0.0;
        auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc{}) throw SyntaxError("malformed number", line_, col_);
        t.kind = Token::Number;
        t.num = value;
        while (src_.data() + pos_ != res.ptr) advance();
      } else if (c == '>' || c == '<') {
        if (pos_ + 1 >= src_.size() || src_[pos_ + 1] != '=') {
          throw SyntaxError(std::string("expected '") + c + "=', strict comparisons are not supported",
                            line_, col_);
        }
        t.kind = (c == '>') ? Token::Ge : Token::Le;
        advance();
        advance();
      } else {
        switch (c) {
          case '&': t.kind = Token::Amp; break;
          case '|': t.kind = Token::Pipe; break;
          case '!': t.kind = Token::Bang; break;
          case '(': t.kind = Token::LParen; break;
          case ')': t.kind = Token::RParen; break;
          case '[': t.kind = Token::LBracket; break;
          case ']': t.kind = Token::RBracket; break;
          case ',': t.kind = Token::Comma; break;
          default:
            throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
        }
        advance();
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  FormulaPtr run() {
    FormulaPtr f = parse_or();
    expect(Token::End, "unexpected trailing input");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& get() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  void expect(Token::Kind kind, const char* what) {
    const Token& t = get();
    if (t.kind != kind) throw SyntaxError(what, t.line, t.col);
  }

  FormulaPtr parse_or() {
    std::vector<FormulaPtr> terms;
    terms.push_back(parse_and());
    while (peek().kind == Token::Pipe) {
      get();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return terms.front();
    return Formula::disj(std::move(terms));
  }

  FormulaPtr parse_and() {
    std::vector<FormulaPtr> terms;
    terms.push_back(parse_until());
    while (peek().kind == Token::Amp) {
      get();
      terms.push_back(parse_until());
    }
    if (terms.size() == 1) return terms.front();
    return Formula::conj(std::move(terms));
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_unary();
    if (peek().kind == Token::Ident && peek().text == "U" && peek(1).kind == Token::LBracket) {
      get();
      auto [a, b] = parse_interval();
      FormulaPtr rhs = parse_until();  // right associative
      return Formula::until(a, b, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Bang:
        get();
        return Formula::negation(parse_unary());
      case Token::LParen: {
        get();
        FormulaPtr f = parse_or();
        expect(Token::RParen, "expected ')'");
        return f;
      }
      case Token::Ident: {
        if ((t.text == "G" || t.text == "F") && peek(1).kind == Token::LBracket) {
          bool globally = t.text == "G";
          get();
          auto [a, b] = parse_interval();
          FormulaPtr child = parse_unary();
          return globally ? Formula::globally(a, b, std::move(child))
                          : Formula::eventually(a, b, std::move(child));
        }
        if (t.text == "true") {
          get();
          return Formula::truth();
        }
        return parse_predicate();
      }
      default:
        throw SyntaxError("expected formula", t.line, t.col);
    }
  }

  FormulaPtr parse_predicate() {
    const Token& name = get();
    if (name.kind != Token::Ident) throw SyntaxError("expected signal name", name.line, name.col);
    const Token& op = get();
    if (op.kind != Token::Ge && op.kind != Token::Le)
      throw SyntaxError("expected '>=' or '<='", op.line, op.col);
    const Token& num = get();
    if (num.kind != Token::Number) throw SyntaxError("expected threshold number", num.line, num.col);
    return Formula::pred(name.text, op.kind == Token::Ge ? Cmp::Ge : Cmp::Le, num.num);
  }

  std::pair<double, double> parse_interval() {
    expect(Token::LBracket, "expected '['");
    const Token& ta = get();
    if (ta.kind != Token::Number) throw SyntaxError("expected interval start", ta.line, ta.col);
    expect(Token::Comma, "expected ','");
    const Token& tb = get();
    if (tb.kind != Token::Number) throw SyntaxError("expected interval end", tb.line, tb.col);
    expect(Token::RBracket, "expected ']'");
    return {ta.num, tb.num};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void check_interval(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw IntervalError("temporal interval bounds must be finite");
  if (a < 0.0 || b < 0.0)
    throw IntervalError("temporal interval bounds must be non-negative, got [" +
                        detail::format_double(a) + "," + detail::format_double(b) + "]");
  if (a > b)
    throw IntervalError("temporal interval start exceeds end: [" + detail::format_double(a) + "," +
                        detail::format_double(b) + "]");
}

// Compound children get parenthesized so precedence never leaks into the output.
std::string wrap(const Formula& f) {
  if (f.op() == Op::True || f.op() == Op::Pred) return to_string(f);
  return "(" + to_string(f) + ")";
}

}  // namespace

FormulaPtr Formula::truth() { return FormulaPtr(new Formula()); }

FormulaPtr Formula::pred(std::string var, Cmp cmp, double threshold) {
  if (var.empty()) throw Error("predicate needs a signal name");
  if (!std::isfinite(threshold)) throw Error("predicate threshold must be finite");
  Formula* f = new Formula();
  f->op_ = Op::Pred;
  f->var_ = std::move(var);
  f->cmp_ = cmp;
  f->threshold_ = threshold;
  return FormulaPtr(f);
}

FormulaPtr Formula::negation(FormulaPtr child) {
  if (!child) throw Error("negation needs a child");
  Formula* f = new Formula();
  f->op_ = Op::Not;
  f->children_.push_back(std::move(child));
  return FormulaPtr(f);
}

FormulaPtr Formula::conj(std::vector<FormulaPtr> children) {
  if (children.size() < 2) throw Error("conjunction needs at least two children");
  Formula* f = new Formula();
  f->op_ = Op::And;
  f->children_ = std::move(children);
  return FormulaPtr(f);
}

FormulaPtr Formula::disj(std::vector<FormulaPtr> children) {
  if (children.size() < 2) throw Error("disjunction needs at least two children");
  Formula* f = new Formula();
  f->op_ = Op::Or;
  f->children_ = std::move(children);
  return FormulaPtr(f);
}

FormulaPtr Formula::eventually(double a, double b, FormulaPtr child) {
  check_interval(a, b);
  Formula* f = new Formula();
  f->op_ = Op::Eventually;
  f->lo_ = a;
  f->hi_ = b;
  f->children_.push_back(std::move(child));
  return FormulaPtr(f);
}

FormulaPtr Formula::globally(double a, double b, FormulaPtr child) {
  check_interval(a, b);
  Formula* f = new Formula();
  f->op_ = Op::Globally;
  f->lo_ = a;
  f->hi_ = b;
  f->children_.push_back(std::move(child));
  return FormulaPtr(f);
}

FormulaPtr Formula::until(double a, double b, FormulaPtr lhs, FormulaPtr rhs) {
  check_interval(a, b);
  Formula* f = new Formula();
  f->op_ = Op::Until;
  f->lo_ = a;
  f->hi_ = b;
  f->children_.push_back(std::move(lhs));
  f->children_.push_back(std::move(rhs));
  return FormulaPtr(f);
}

bool Formula::operator==(const Formula& other) const {
  if (op_ != other.op_) return false;
  switch (op_) {
    case Op::True:
      return true;
    case Op::Pred:
      return var_ == other.var_ && cmp_ == other.cmp_ && threshold_ == other.threshold_;
    default:
      break;
  }
  if (op_ == Op::Eventually || op_ == Op::Globally || op_ == Op::Until) {
    if (lo_ != other.lo_ || hi_ != other.hi_) return false;
  }
  if (children_.size() != other.children_.size()) return false;
  for (std::size_t i = 0; i < children_.size(); ++i) {
    if (!(*children_[i] == *other.children_[i])) return false;
  }
  return true;
}

FormulaPtr parse(std::string_view text) {
  Lexer lex(text);
  Parser parser(lex.run());
  return parser.run();
}

FormulaPtr parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open formula file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string to_string(const Formula& f) {
  using detail::format_double;
  switch (f.op()) {
    case Op::True:
      return "true";
    case Op::Pred:
      return f.var() + (f.cmp() == Cmp::Ge ? " >= " : " <= ") + format_double(f.threshold());
    case Op::Not:
      return "!" + wrap(*f.child());
    case Op::And:
    case Op::Or: {
      const char* sep = f.op() == Op::And ? " & " : " | ";
      std::string out;
      for (std::size_t i = 0; i < f.arity(); ++i) {
        if (i) out += sep;
        out += wrap(*f.child(i));
      }
      return out;
    }
    case Op::Eventually:
    case Op::Globally: {
      std::string head = f.op() == Op::Eventually ? "F[" : "G[";
      return head + format_double(f.lo()) + "," + format_double(f.hi()) + "] " + wrap(*f.child());
    }
    case Op::Until:
      return wrap(*f.child(0)) + " U[" + format_double(f.lo()) + "," + format_double(f.hi()) +
             "] " + wrap(*f.child(1));
  }
  throw Error("unreachable formula kind");
}

double horizon(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::Pred:
      return 0.0;
    case Op::Not:
      return horizon(*f.child());
    case Op::And:
    case Op::Or: {
      double h = 0.0;
      for (const auto& c : f.children()) h = std::max(h, horizon(*c));
      return h;
    }
    case Op::Eventually:
    case Op::Globally:
      return f.hi() + horizon(*f.child());
    case Op::Until: {
      double h = 0.0;
      for (const auto& c : f.children()) h = std::max(h, horizon(*c));
      return f.hi() + h;
    }
  }
  throw Error("unreachable formula kind");
}

namespace {
void collect(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  out.push_back(f);
  for (const auto& c : f->children()) collect(c, out);
}
}  // namespace

std::vector<FormulaPtr> subformulae(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  collect(f, out);
  return out;
}

bool contains_until(const Formula& f) {
  if (f.op() == Op::Until) return true;
  return std::any_of(f.children().begin(), f.children().end(),
                     [](const FormulaPtr& c) { return contains_until(*c); });
}

}  // namespace agim
