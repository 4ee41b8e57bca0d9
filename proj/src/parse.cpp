#include "sform/parse.hpp"

#include "sform/errors.hpp"

#include <string>
#include <vector>

namespace sform {

namespace {

enum class Tok : std::uint8_t {
  Number,
  Ident,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  End,
};

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;  // Ident
  Rational value;         // Number
};

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_digit(c)) {
      __int128 num = 0;
      while (i < text.size() && is_digit(text[i])) {
        num = num * 10 + (text[i] - '0');
        if (num > INT64_MAX) throw ExpressionOverflowError("numeric literal out of range");
        ++i;
      }
      __int128 den = 1;
      if (i < text.size() && text[i] == '.') {
        ++i;
        if (i >= text.size() || !is_digit(text[i])) {
          throw ParseError(i, "digit after decimal point");
        }
        while (i < text.size() && is_digit(text[i])) {
          num = num * 10 + (text[i] - '0');
          den *= 10;
          if (num > INT64_MAX || den > INT64_MAX) {
            throw ExpressionOverflowError("numeric literal out of range");
          }
          ++i;
        }
      }
      out.push_back({Tok::Number, start, {},
                     Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den))});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < text.size() && is_ident_char(text[i])) ++i;
      out.push_back({Tok::Ident, start, text.substr(start, i - start), Rational(0)});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '^': kind = Tok::Caret; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      default: throw ParseError(start, "valid character");
    }
    out.push_back({kind, start, {}, Rational(0)});
    ++i;
  }
  out.push_back({Tok::End, text.size(), {}, Rational(0)});
  return out;
}

bool lookup_func(std::string_view name, FuncKind& out) {
  if (name == "sin") out = FuncKind::Sin;
  else if (name == "cos") out = FuncKind::Cos;
  else if (name == "exp") out = FuncKind::Exp;
  else if (name == "log") out = FuncKind::Log;
  else if (name == "tanh") out = FuncKind::Tanh;
  else if (name == "sqrt") out = FuncKind::Sqrt;
  else return false;
  return true;
}

class Parser {
public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  Expression run() {
    Expression e = parse_sum();
    if (peek().kind != Tok::End) throw ParseError(peek().offset, "operator or end of input");
    return simplify(e);
  }

private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  Expression parse_sum() {
    Expression acc = parse_term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      bool minus = advance().kind == Tok::Minus;
      Expression rhs = parse_term();
      acc = minus ? Expression::sum({std::move(acc), Expression::negate(std::move(rhs))})
                  : Expression::sum({std::move(acc), std::move(rhs)});
    }
    return acc;
  }

  Expression parse_term() {
    Expression acc = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      bool divide = advance().kind == Tok::Slash;
      Expression rhs = parse_unary();
      acc = divide ? Expression::quotient(std::move(acc), std::move(rhs))
                   : Expression::product({std::move(acc), std::move(rhs)});
    }
    return acc;
  }

  Expression parse_unary() {
    if (peek().kind == Tok::Minus) {
      advance();
      return Expression::negate(parse_unary());
    }
    return parse_power();
  }

  // '^' binds tighter than unary minus and associates right; the exponent is
  // re-parsed at unary level and must fold to an integer constant.
  Expression parse_power() {
    Expression base = parse_primary();
    if (peek().kind != Tok::Caret) return base;
    advance();
    std::size_t exp_offset = peek().offset;
    Expression folded = simplify(parse_unary());
    if (!folded.is_constant() || !folded.node().value.is_integer()) {
      throw ParseError(exp_offset, "integer exponent");
    }
    return Expression::pow(std::move(base), folded.node().value.num);
  }

  Expression parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        advance();
        return Expression::constant(t.value);
      case Tok::Ident: {
        advance();
        if (peek().kind == Tok::LParen) {
          FuncKind f;
          if (!lookup_func(t.text, f)) throw ParseError(t.offset, "known function name");
          advance();
          Expression arg = parse_sum();
          expect(Tok::RParen, "closing parenthesis");
          return Expression::call(f, std::move(arg));
        }
        return Expression::variable(std::string(t.text));
      }
      case Tok::LParen: {
        advance();
        Expression e = parse_sum();
        expect(Tok::RParen, "closing parenthesis");
        return e;
      }
      default:
        throw ParseError(t.offset, "operand");
    }
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw ParseError(peek().offset, what);
    advance();
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse_expression(std::string_view text) { return Parser(text).run(); }

}  // namespace sform
