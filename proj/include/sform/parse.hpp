#pragma once

#include "sform/expression.hpp"

#include <string_view>

namespace sform {

// Parse infix expression text into canonical form. Grammar: + - * / ^ with
// standard precedence (^ right-associative, integer exponents only), unary
// minus, parentheses, calls to sin/cos/exp/log/tanh/sqrt, identifiers
// [a-zA-Z_][a-zA-Z0-9_]*, and integer or decimal literals (decimals become
// exact rationals). Throws ParseError with a byte offset on malformed input.
Expression parse_expression(std::string_view text);

}  // namespace sform
