#pragma once

#include "sform/rational.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sform {

enum class ExprKind : std::uint8_t {
  Constant,
  Variable,
  Sum,
  Product,
  Power,
  Negate,
  Quotient,
  Call,
};

enum class FuncKind : std::uint8_t { Sin, Cos, Exp, Log, Tanh, Sqrt };

const char* func_name(FuncKind f);

class Expression;

struct ExprNode {
  ExprKind kind = ExprKind::Constant;
  Rational value;                     // Constant
  std::string name;                   // Variable
  FuncKind func = FuncKind::Sin;      // Call
  std::int64_t exponent = 0;          // Power
  std::vector<Expression> children;   // Sum/Product: operands; Power: base;
                                      // Negate/Call: operand; Quotient: num, den
};

// Immutable expression tree handle. Copies share structure; nothing mutates a
// node after construction, so values are safe to share across threads.
class Expression {
public:
  Expression();  // the zero constant

  static Expression constant(Rational r);
  static Expression integer(std::int64_t n);
  static Expression variable(std::string name);
  static Expression sum(std::vector<Expression> terms);
  static Expression product(std::vector<Expression> factors);
  static Expression pow(Expression base, std::int64_t exponent);
  static Expression negate(Expression e);
  static Expression quotient(Expression num, Expression den);
  static Expression call(FuncKind f, Expression arg);

  const ExprNode& node() const { return *node_; }
  ExprKind kind() const { return node_->kind; }

  bool is_constant() const { return node_->kind == ExprKind::Constant; }
  bool is_zero() const { return is_constant() && node_->value.is_zero(); }
  bool is_one() const { return is_constant() && node_->value.is_one(); }

private:
  explicit Expression(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  static Expression wrap(ExprNode&& n);

  std::shared_ptr<const ExprNode> node_;
};

// Operator sugar builds raw (unsimplified) trees; canonicalize explicitly.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);

Expression sin(Expression e);
Expression cos(Expression e);
Expression exp(Expression e);
Expression log(Expression e);
Expression tanh(Expression e);
Expression sqrt(Expression e);

using VariableBinding = std::map<std::string, double>;

// Total order on trees: kind rank first, then per-kind payload, children
// lexicographically. Defines the canonical term/factor ordering.
int compare(const Expression& a, const Expression& b);
bool operator==(const Expression& a, const Expression& b);
inline bool operator!=(const Expression& a, const Expression& b) { return !(a == b); }

struct ExprLess {
  bool operator()(const Expression& a, const Expression& b) const { return compare(a, b) < 0; }
};

// Ring-level canonical form: flattened sums/products, folded constants,
// like terms and like factors collected, fixed ordering. No expansion of
// powers of sums, no trig identities, no factorization.
Expression simplify(const Expression& e);

// Partial derivative; result is canonical.
Expression differentiate(const Expression& e, std::string_view var);

// IEEE double evaluation. Throws UnboundVariableError / DomainError.
double evaluate(const Expression& e, const VariableBinding& binding);

// Canonical text; parse_expression(to_string(e)) == e for canonical e.
std::string to_string(const Expression& e);

std::set<std::string> free_variables(const Expression& e);

// Expression precompiled against a fixed variable layout; evaluation is
// allocation-free and performs arithmetic in exactly the same order as
// evaluate(), so both produce bit-identical results.
class CompiledExpression {
public:
  CompiledExpression(const Expression& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;

private:
  struct Op {
    enum class Code : std::uint8_t { PushConst, PushVar, AddN, MulN, PowInt, Neg, Div, Fun } code;
    double constant = 0.0;
    std::uint32_t index = 0;      // PushVar slot or AddN/MulN arity
    std::int64_t exponent = 0;    // PowInt
    FuncKind func = FuncKind::Sin;
  };

  void compile(const Expression& e, std::span<const std::string> slots, std::size_t depth);

  std::vector<Op> ops_;
  std::size_t max_stack_ = 0;
};

}  // namespace sform
