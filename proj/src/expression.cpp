#include "sform/expression.hpp"

#include "sform/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace sform {

const char* func_name(FuncKind f) {
  switch (f) {
    case FuncKind::Sin: return "sin";
    case FuncKind::Cos: return "cos";
    case FuncKind::Exp: return "exp";
    case FuncKind::Log: return "log";
    case FuncKind::Tanh: return "tanh";
    case FuncKind::Sqrt: return "sqrt";
  }
  return "?";
}

Expression Expression::wrap(ExprNode&& n) {
  return Expression(std::make_shared<const ExprNode>(std::move(n)));
}

Expression::Expression() : node_(std::make_shared<const ExprNode>()) {}

Expression Expression::constant(Rational r) {
  ExprNode n;
  n.kind = ExprKind::Constant;
  n.value = r;
  return wrap(std::move(n));
}

Expression Expression::integer(std::int64_t v) { return constant(Rational(v)); }

Expression Expression::variable(std::string name) {
  ExprNode n;
  n.kind = ExprKind::Variable;
  n.name = std::move(name);
  return wrap(std::move(n));
}

Expression Expression::sum(std::vector<Expression> terms) {
  if (terms.empty()) return integer(0);
  if (terms.size() == 1) return std::move(terms.front());
  ExprNode n;
  n.kind = ExprKind::Sum;
  n.children = std::move(terms);
  return wrap(std::move(n));
}

Expression Expression::product(std::vector<Expression> factors) {
  if (factors.empty()) return integer(1);
  if (factors.size() == 1) return std::move(factors.front());
  ExprNode n;
  n.kind = ExprKind::Product;
  n.children = std::move(factors);
  return wrap(std::move(n));
}

Expression Expression::pow(Expression base, std::int64_t exponent) {
  ExprNode n;
  n.kind = ExprKind::Power;
  n.exponent = exponent;
  n.children.push_back(std::move(base));
  return wrap(std::move(n));
}

Expression Expression::negate(Expression e) {
  ExprNode n;
  n.kind = ExprKind::Negate;
  n.children.push_back(std::move(e));
  return wrap(std::move(n));
}

Expression Expression::quotient(Expression num, Expression den) {
  ExprNode n;
  n.kind = ExprKind::Quotient;
  n.children.push_back(std::move(num));
  n.children.push_back(std::move(den));
  return wrap(std::move(n));
}

Expression Expression::call(FuncKind f, Expression arg) {
  ExprNode n;
  n.kind = ExprKind::Call;
  n.func = f;
  n.children.push_back(std::move(arg));
  return wrap(std::move(n));
}

Expression operator+(const Expression& a, const Expression& b) { return Expression::sum({a, b}); }
Expression operator-(const Expression& a, const Expression& b) {
  return Expression::sum({a, Expression::negate(b)});
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression::product({a, b});
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression::quotient(a, b);
}
Expression operator-(const Expression& a) { return Expression::negate(a); }

Expression sin(Expression e) { return Expression::call(FuncKind::Sin, std::move(e)); }
Expression cos(Expression e) { return Expression::call(FuncKind::Cos, std::move(e)); }
Expression exp(Expression e) { return Expression::call(FuncKind::Exp, std::move(e)); }
Expression log(Expression e) { return Expression::call(FuncKind::Log, std::move(e)); }
Expression tanh(Expression e) { return Expression::call(FuncKind::Tanh, std::move(e)); }
Expression sqrt(Expression e) { return Expression::call(FuncKind::Sqrt, std::move(e)); }

namespace {

int kind_rank(ExprKind k) {
  switch (k) {
    case ExprKind::Constant: return 0;
    case ExprKind::Variable: return 1;
    case ExprKind::Power: return 2;
    case ExprKind::Call: return 3;
    case ExprKind::Product: return 4;
    case ExprKind::Quotient: return 5;
    case ExprKind::Sum: return 6;
    case ExprKind::Negate: return 7;
  }
  return 8;
}

int compare_int(std::int64_t a, std::int64_t b) { return a < b ? -1 : (b < a ? 1 : 0); }

// Names order by length, then bytes: the order a length-prefixed
// serialization induces.
int compare_name(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

}  // namespace

int compare(const Expression& a, const Expression& b) {
  const ExprNode& na = a.node();
  const ExprNode& nb = b.node();
  if (&na == &nb) return 0;
  int ra = kind_rank(na.kind);
  int rb = kind_rank(nb.kind);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (na.kind) {
    case ExprKind::Constant:
      if (na.value < nb.value) return -1;
      if (nb.value < na.value) return 1;
      return 0;
    case ExprKind::Variable:
      return compare_name(na.name, nb.name);
    case ExprKind::Power: {
      int c = compare(na.children[0], nb.children[0]);
      if (c != 0) return c;
      return compare_int(na.exponent, nb.exponent);
    }
    case ExprKind::Call: {
      if (na.func != nb.func) {
        return static_cast<int>(na.func) < static_cast<int>(nb.func) ? -1 : 1;
      }
      return compare(na.children[0], nb.children[0]);
    }
    case ExprKind::Negate:
      return compare(na.children[0], nb.children[0]);
    case ExprKind::Quotient: {
      int c = compare(na.children[0], nb.children[0]);
      if (c != 0) return c;
      return compare(na.children[1], nb.children[1]);
    }
    case ExprKind::Product:
    case ExprKind::Sum: {
      if (na.children.size() != nb.children.size()) {
        return na.children.size() < nb.children.size() ? -1 : 1;
      }
      for (std::size_t i = 0; i < na.children.size(); ++i) {
        int c = compare(na.children[i], nb.children[i]);
        if (c != 0) return c;
      }
      return 0;
    }
  }
  return 0;
}

bool operator==(const Expression& a, const Expression& b) { return compare(a, b) == 0; }

namespace {

std::int64_t checked_exponent(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw ExpressionOverflowError("exponent overflow");
  return static_cast<std::int64_t>(v);
}

// Remaining factors of a canonical product once its leading constant is dropped.
Expression product_tail(const std::vector<Expression>& children) {
  if (children.size() == 2) return children[1];
  return Expression::product(std::vector<Expression>(children.begin() + 1, children.end()));
}

struct SplitTerm {
  Rational coeff;
  Expression monomial;
};

// Pull the rational coefficient out of a canonical term so like terms share a
// map key. The quotient case reaches into the numerator: 3*x/y and x/y must
// both key on x/y.
SplitTerm split_coefficient(const Expression& t) {
  const ExprNode& n = t.node();
  if (n.kind == ExprKind::Constant) return {n.value, Expression::integer(1)};
  if (n.kind == ExprKind::Product && n.children.front().is_constant()) {
    return {n.children.front().node().value, product_tail(n.children)};
  }
  if (n.kind == ExprKind::Quotient) {
    SplitTerm inner = split_coefficient(n.children[0]);
    if (!inner.coeff.is_one()) {
      return {inner.coeff, Expression::quotient(inner.monomial, n.children[1])};
    }
  }
  return {Rational(1), t};
}

// Signed gcd of a canonical sum's term coefficients. The sign follows the
// leading term, so a primitive sum always leads positive.
Rational sum_content(const ExprNode& sum) {
  auto gcd128 = [](__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  };
  __int128 num_gcd = 0;
  __int128 den_lcm = 1;
  for (const Expression& c : sum.children) {
    Rational coeff = split_coefficient(c).coeff;
    num_gcd = gcd128(num_gcd, coeff.num);
    den_lcm = den_lcm / gcd128(den_lcm, coeff.den) * coeff.den;
  }
  Rational content(Rational::checked(num_gcd), Rational::checked(den_lcm));
  if (split_coefficient(sum.children.front()).coeff.num < 0) content = -content;
  return content;
}

// Reattach a coefficient (c != 0, c != 1) to a monomial, preserving canonical
// shape: constants live as the first product factor, inside the numerator for
// quotients.
Expression emit_scaled(const Rational& c, const Expression& m) {
  const ExprNode& n = m.node();
  if (n.kind == ExprKind::Constant) return Expression::constant(c * n.value);
  if (n.kind == ExprKind::Quotient) {
    return Expression::quotient(emit_scaled(c, n.children[0]), n.children[1]);
  }
  if (n.kind == ExprKind::Product) {
    std::vector<Expression> f;
    f.reserve(n.children.size() + 1);
    f.push_back(Expression::constant(c));
    f.insert(f.end(), n.children.begin(), n.children.end());
    return Expression::product(std::move(f));
  }
  return Expression::product({Expression::constant(c), m});
}

// Multiply every term coefficient of a canonical sum by a nonzero factor.
// Monomials and their order are untouched.
Expression scale_sum(const Expression& sum, const Rational& factor) {
  std::vector<Expression> terms;
  terms.reserve(sum.node().children.size());
  for (const Expression& c : sum.node().children) {
    SplitTerm s = split_coefficient(c);
    Rational scaled = s.coeff * factor;
    terms.push_back(scaled.is_one() ? s.monomial : emit_scaled(scaled, s.monomial));
  }
  return Expression::sum(std::move(terms));
}

// Like-term collector. Inputs must already be canonical.
class TermAcc {
public:
  void add(const Expression& t, const Rational& mult) {
    const ExprNode& n = t.node();
    if (n.kind == ExprKind::Constant) {
      constant_ += n.value * mult;
      return;
    }
    if (n.kind == ExprKind::Sum) {
      for (const Expression& c : n.children) add(c, mult);
      return;
    }
    SplitTerm s = split_coefficient(t);
    Rational scaled = s.coeff * mult;
    if (s.monomial.kind() == ExprKind::Sum) {
      // Scaled sums flatten through addition; a sum never keys a sum, so
      // e - e cancels whenever e does not depend on factoring choices.
      add(s.monomial, scaled);
      return;
    }
    terms_[s.monomial] += scaled;
  }

  Expression build() {
    std::vector<Expression> out;
    if (!constant_.is_zero()) out.push_back(Expression::constant(constant_));
    for (const auto& [monomial, coeff] : terms_) {
      if (coeff.is_zero()) continue;
      out.push_back(coeff.is_one() ? monomial : emit_scaled(coeff, monomial));
    }
    return Expression::sum(std::move(out));
  }

private:
  Rational constant_{0};
  std::map<Expression, Rational, ExprLess> terms_;
};

// Like-factor collector: bases map to integer exponents, rational content
// folds into a single coefficient, negative exponents become the denominator.
class FactorAcc {
public:
  void add(const Expression& f, std::int64_t exp) {
    if (zero_ || exp == 0) return;
    const ExprNode& n = f.node();
    switch (n.kind) {
      case ExprKind::Constant:
        if (n.value.is_zero()) {
          if (exp < 0) throw DomainError("/", 0.0);
          zero_ = true;
        } else {
          coeff_ *= n.value.pow(exp);
        }
        return;
      case ExprKind::Product:
        for (const Expression& c : n.children) add(c, exp);
        return;
      case ExprKind::Power:
        add(n.children[0], checked_exponent(static_cast<__int128>(n.exponent) * exp));
        return;
      case ExprKind::Quotient:
        add(n.children[0], exp);
        add(n.children[1], checked_exponent(-static_cast<__int128>(exp)));
        return;
      case ExprKind::Negate:
        if (exp & 1) coeff_ = -coeff_;
        add(n.children[0], exp);
        return;
      case ExprKind::Sum: {
        // Sum factors are stored primitive; their content joins the coefficient.
        Rational content = sum_content(n);
        if (content.is_one()) break;
        coeff_ *= content.pow(exp);
        std::int64_t& slot = powers_[scale_sum(f, Rational(1) / content)];
        slot = checked_exponent(static_cast<__int128>(slot) + exp);
        return;
      }
      default:
        break;
    }
    std::int64_t& slot = powers_[f];
    slot = checked_exponent(static_cast<__int128>(slot) + exp);
  }

  Expression build() {
    if (zero_) return Expression::integer(0);
    std::vector<Expression> num;
    std::vector<Expression> den;
    for (const auto& [base, exp] : powers_) {
      if (exp == 0) continue;
      if (exp > 0) {
        num.push_back(exp == 1 ? base : Expression::pow(base, exp));
      } else {
        std::int64_t k = checked_exponent(-static_cast<__int128>(exp));
        den.push_back(k == 1 ? base : Expression::pow(base, k));
      }
    }
    Expression numerator = Expression::integer(1);
    if (num.empty()) {
      numerator = Expression::constant(coeff_);
    } else if (coeff_.is_one()) {
      numerator = Expression::product(std::move(num));
    } else {
      std::vector<Expression> f;
      f.reserve(num.size() + 1);
      f.push_back(Expression::constant(coeff_));
      f.insert(f.end(), num.begin(), num.end());
      numerator = Expression::product(std::move(f));
    }
    if (!den.empty()) {
      return Expression::quotient(numerator, Expression::product(std::move(den)));
    }
    // A coefficient on a lone sum distributes; every other product stays fully
    // factored, its sum factors already primitive from add().
    if (num.size() == 1 && num.front().kind() == ExprKind::Sum && !coeff_.is_one()) {
      return scale_sum(num.front(), coeff_);
    }
    return numerator;
  }

private:
  Rational coeff_{1};
  bool zero_ = false;
  std::map<Expression, std::int64_t, ExprLess> powers_;
};

}  // namespace

Expression simplify(const Expression& e) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Constant:
    case ExprKind::Variable:
      return e;
    case ExprKind::Sum: {
      TermAcc acc;
      for (const Expression& c : n.children) acc.add(simplify(c), Rational(1));
      return acc.build();
    }
    case ExprKind::Product: {
      FactorAcc acc;
      for (const Expression& c : n.children) acc.add(simplify(c), 1);
      return acc.build();
    }
    case ExprKind::Power: {
      FactorAcc acc;
      acc.add(simplify(n.children[0]), n.exponent);
      return acc.build();
    }
    case ExprKind::Negate: {
      FactorAcc acc;
      acc.add(Expression::integer(-1), 1);
      acc.add(simplify(n.children[0]), 1);
      return acc.build();
    }
    case ExprKind::Quotient: {
      FactorAcc acc;
      acc.add(simplify(n.children[0]), 1);
      acc.add(simplify(n.children[1]), -1);
      return acc.build();
    }
    case ExprKind::Call: {
      Expression arg = simplify(n.children[0]);
      if (arg.is_constant()) {
        const Rational& v = arg.node().value;
        switch (n.func) {
          case FuncKind::Sin:
          case FuncKind::Tanh:
            if (v.is_zero()) return Expression::integer(0);
            break;
          case FuncKind::Cos:
          case FuncKind::Exp:
            if (v.is_zero()) return Expression::integer(1);
            break;
          case FuncKind::Log:
            if (v.is_one()) return Expression::integer(0);
            break;
          case FuncKind::Sqrt:
            if (v.is_zero()) return Expression::integer(0);
            if (v.is_one()) return Expression::integer(1);
            break;
        }
      }
      return Expression::call(n.func, std::move(arg));
    }
  }
  return e;
}

namespace {

Expression diff_raw(const Expression& e, std::string_view var) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Constant:
      return Expression::integer(0);
    case ExprKind::Variable:
      return Expression::integer(n.name == var ? 1 : 0);
    case ExprKind::Sum: {
      std::vector<Expression> parts;
      parts.reserve(n.children.size());
      for (const Expression& c : n.children) parts.push_back(diff_raw(c, var));
      return Expression::sum(std::move(parts));
    }
    case ExprKind::Product: {
      std::vector<Expression> parts;
      parts.reserve(n.children.size());
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        std::vector<Expression> factors = n.children;
        factors[i] = diff_raw(n.children[i], var);
        parts.push_back(Expression::product(std::move(factors)));
      }
      return Expression::sum(std::move(parts));
    }
    case ExprKind::Power: {
      if (n.exponent == 0) return Expression::integer(0);
      return Expression::product({Expression::integer(n.exponent),
                                  Expression::pow(n.children[0], n.exponent - 1),
                                  diff_raw(n.children[0], var)});
    }
    case ExprKind::Negate:
      return Expression::negate(diff_raw(n.children[0], var));
    case ExprKind::Quotient: {
      const Expression& num = n.children[0];
      const Expression& den = n.children[1];
      Expression top = Expression::sum(
          {Expression::product({diff_raw(num, var), den}),
           Expression::negate(Expression::product({num, diff_raw(den, var)}))});
      return Expression::quotient(std::move(top), Expression::pow(den, 2));
    }
    case ExprKind::Call: {
      const Expression& a = n.children[0];
      Expression da = diff_raw(a, var);
      switch (n.func) {
        case FuncKind::Sin:
          return Expression::product({cos(a), std::move(da)});
        case FuncKind::Cos:
          return Expression::negate(Expression::product({sin(a), std::move(da)}));
        case FuncKind::Exp:
          return Expression::product({exp(a), std::move(da)});
        case FuncKind::Log:
          return Expression::quotient(std::move(da), a);
        case FuncKind::Tanh:
          return Expression::product(
              {Expression::sum({Expression::integer(1),
                                Expression::negate(Expression::pow(tanh(a), 2))}),
               std::move(da)});
        case FuncKind::Sqrt:
          return Expression::quotient(std::move(da),
                                      Expression::product({Expression::integer(2), sqrt(a)}));
      }
      return Expression::integer(0);
    }
  }
  return Expression::integer(0);
}

}  // namespace

Expression differentiate(const Expression& e, std::string_view var) {
  return simplify(diff_raw(e, var));
}

namespace {

// Square-and-multiply; shared by evaluate and CompiledExpression so both
// produce bit-identical powers.
double eval_ipow(double b, std::int64_t k) {
  std::uint64_t reps =
      k < 0 ? 0 - static_cast<std::uint64_t>(k) : static_cast<std::uint64_t>(k);
  double acc = 1.0;
  double base = b;
  while (reps != 0) {
    if (reps & 1) acc *= base;
    if (reps >>= 1) base *= base;
  }
  if (k < 0) {
    if (acc == 0.0) throw DomainError("^", 0.0);
    return 1.0 / acc;
  }
  return acc;
}

double eval_call(FuncKind f, double v) {
  switch (f) {
    case FuncKind::Sin: return std::sin(v);
    case FuncKind::Cos: return std::cos(v);
    case FuncKind::Exp: return std::exp(v);
    case FuncKind::Log:
      if (v <= 0.0) throw DomainError("log", v);
      return std::log(v);
    case FuncKind::Tanh: return std::tanh(v);
    case FuncKind::Sqrt:
      if (v < 0.0) throw DomainError("sqrt", v);
      return std::sqrt(v);
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expression& e, const VariableBinding& binding) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprKind::Constant:
      return n.value.to_double();
    case ExprKind::Variable: {
      auto it = binding.find(n.name);
      if (it == binding.end()) throw UnboundVariableError(n.name);
      return it->second;
    }
    case ExprKind::Sum: {
      double acc = evaluate(n.children[0], binding);
      for (std::size_t i = 1; i < n.children.size(); ++i) acc += evaluate(n.children[i], binding);
      return acc;
    }
    case ExprKind::Product: {
      double acc = evaluate(n.children[0], binding);
      for (std::size_t i = 1; i < n.children.size(); ++i) acc *= evaluate(n.children[i], binding);
      return acc;
    }
    case ExprKind::Power:
      return eval_ipow(evaluate(n.children[0], binding), n.exponent);
    case ExprKind::Negate:
      return -evaluate(n.children[0], binding);
    case ExprKind::Quotient: {
      double num = evaluate(n.children[0], binding);
      double den = evaluate(n.children[1], binding);
      if (den == 0.0) throw DomainError("/", 0.0);
      return num / den;
    }
    case ExprKind::Call:
      return eval_call(n.func, evaluate(n.children[0], binding));
  }
  return 0.0;
}

namespace {

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Sum: return 1;
    case ExprKind::Product:
    case ExprKind::Quotient: return 2;
    case ExprKind::Negate: return 3;
    case ExprKind::Power: return 4;
    case ExprKind::Constant:
      if (n.value.den != 1) return 2;       // prints with '/'
      return n.value.num < 0 ? 3 : 6;       // leading '-' binds like unary minus
    case ExprKind::Variable:
    case ExprKind::Call: return 6;
  }
  return 6;
}

// Strip a leading minus off a term so sums print with infix subtraction.
bool negative_lead(const Expression& t, Expression& positive) {
  const ExprNode& n = t.node();
  switch (n.kind) {
    case ExprKind::Constant:
      if (n.value.num < 0) {
        positive = Expression::constant(-n.value);
        return true;
      }
      return false;
    case ExprKind::Negate:
      positive = n.children[0];
      return true;
    case ExprKind::Product: {
      if (!n.children.front().is_constant()) return false;
      const Rational& c = n.children.front().node().value;
      if (c.num >= 0) return false;
      Rational p = -c;
      if (p.is_one()) {
        positive = product_tail(n.children);
      } else {
        std::vector<Expression> f;
        f.reserve(n.children.size());
        f.push_back(Expression::constant(p));
        f.insert(f.end(), n.children.begin() + 1, n.children.end());
        positive = Expression::product(std::move(f));
      }
      return true;
    }
    case ExprKind::Quotient: {
      Expression pos_num;
      if (negative_lead(n.children[0], pos_num)) {
        positive = Expression::quotient(std::move(pos_num), n.children[1]);
        return true;
      }
      return false;
    }
    default:
      return false;
  }
}

void print_expr(const Expression& e, int ctx, std::string& out) {
  const ExprNode& n = e.node();
  bool wrap = precedence(n) < ctx;
  if (wrap) out += '(';
  switch (n.kind) {
    case ExprKind::Constant:
      out += n.value.str();
      break;
    case ExprKind::Variable:
      out += n.name;
      break;
    case ExprKind::Call:
      out += func_name(n.func);
      out += '(';
      print_expr(n.children[0], 0, out);
      out += ')';
      break;
    case ExprKind::Power:
      print_expr(n.children[0], 5, out);
      out += '^';
      if (n.exponent < 0) {
        out += '(';
        out += std::to_string(n.exponent);
        out += ')';
      } else {
        out += std::to_string(n.exponent);
      }
      break;
    case ExprKind::Negate:
      out += '-';
      print_expr(n.children[0], 4, out);
      break;
    case ExprKind::Product: {
      // A -1 coefficient prints as a leading minus, not "-1*".
      std::size_t first = 0;
      if (n.children.front().is_constant() && n.children.front().node().value == Rational(-1)) {
        out += '-';
        first = 1;
      }
      for (std::size_t i = first; i < n.children.size(); ++i) {
        if (i != first) out += '*';
        print_expr(n.children[i], i == first ? 2 : 3, out);
      }
      break;
    }
    case ExprKind::Quotient:
      print_expr(n.children[0], 2, out);
      out += '/';
      print_expr(n.children[1], 3, out);
      break;
    case ExprKind::Sum:
      print_expr(n.children[0], 1, out);
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        Expression pos;
        if (negative_lead(n.children[i], pos)) {
          out += " - ";
          print_expr(pos, 2, out);
        } else {
          out += " + ";
          print_expr(n.children[i], 2, out);
        }
      }
      break;
  }
  if (wrap) out += ')';
}

}  // namespace

std::string to_string(const Expression& e) {
  std::string out;
  print_expr(e, 0, out);
  return out;
}

namespace {

void collect_variables(const Expression& e, std::set<std::string>& out) {
  const ExprNode& n = e.node();
  if (n.kind == ExprKind::Variable) {
    out.insert(n.name);
    return;
  }
  for (const Expression& c : n.children) collect_variables(c, out);
}

}  // namespace

std::set<std::string> free_variables(const Expression& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

CompiledExpression::CompiledExpression(const Expression& e, std::span<const std::string> slots) {
  compile(e, slots, 0);
}

void CompiledExpression::compile(const Expression& e, std::span<const std::string> slots,
                                 std::size_t depth) {
  if (depth >= 256) throw ExpressionOverflowError("expression too deep to compile");
  max_stack_ = std::max(max_stack_, depth + 1);
  const ExprNode& n = e.node();
  Op op;
  switch (n.kind) {
    case ExprKind::Constant:
      op.code = Op::Code::PushConst;
      op.constant = n.value.to_double();
      break;
    case ExprKind::Variable: {
      auto it = std::find(slots.begin(), slots.end(), n.name);
      if (it == slots.end()) throw UnboundVariableError(n.name);
      op.code = Op::Code::PushVar;
      op.index = static_cast<std::uint32_t>(it - slots.begin());
      break;
    }
    case ExprKind::Sum:
    case ExprKind::Product:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        compile(n.children[i], slots, depth + i);
      }
      op.code = n.kind == ExprKind::Sum ? Op::Code::AddN : Op::Code::MulN;
      op.index = static_cast<std::uint32_t>(n.children.size());
      break;
    case ExprKind::Power:
      compile(n.children[0], slots, depth);
      op.code = Op::Code::PowInt;
      op.exponent = n.exponent;
      break;
    case ExprKind::Negate:
      compile(n.children[0], slots, depth);
      op.code = Op::Code::Neg;
      break;
    case ExprKind::Quotient:
      compile(n.children[0], slots, depth);
      compile(n.children[1], slots, depth + 1);
      op.code = Op::Code::Div;
      break;
    case ExprKind::Call:
      compile(n.children[0], slots, depth);
      op.code = Op::Code::Fun;
      op.func = n.func;
      break;
  }
  ops_.push_back(op);
}

double CompiledExpression::operator()(std::span<const double> values) const {
  double stack[256];
  std::size_t sp = 0;
  for (const Op& op : ops_) {
    switch (op.code) {
      case Op::Code::PushConst:
        stack[sp++] = op.constant;
        break;
      case Op::Code::PushVar:
        stack[sp++] = values[op.index];
        break;
      case Op::Code::AddN: {
        std::size_t base = sp - op.index;
        for (std::size_t j = base + 1; j < sp; ++j) stack[base] += stack[j];
        sp = base + 1;
        break;
      }
      case Op::Code::MulN: {
        std::size_t base = sp - op.index;
        for (std::size_t j = base + 1; j < sp; ++j) stack[base] *= stack[j];
        sp = base + 1;
        break;
      }
      case Op::Code::PowInt:
        stack[sp - 1] = eval_ipow(stack[sp - 1], op.exponent);
        break;
      case Op::Code::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Op::Code::Div: {
        double den = stack[--sp];
        if (den == 0.0) throw DomainError("/", 0.0);
        stack[sp - 1] /= den;
        break;
      }
      case Op::Code::Fun:
        stack[sp - 1] = eval_call(op.func, stack[sp - 1]);
        break;
    }
  }
  return stack[0];
}

}  // namespace sform
