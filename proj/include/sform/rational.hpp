#pragma once

#include "sform/errors.hpp"

#include <cstdint>
#include <numeric>
#include <string>

namespace sform {

// Exact rational over 64-bit integers. Always normalized: den > 0, gcd(|num|, den) == 1.
// Intermediate products go through 128-bit arithmetic and throw ExpressionOverflowError
// instead of wrapping.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}  // NOLINT: implicit by design
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  static std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) {
      throw ExpressionOverflowError("rational arithmetic overflow");
    }
    return static_cast<std::int64_t>(v);
  }

  void normalize() {
    if (den == 0) throw DomainError("rational with zero denominator", 0.0);
    if (den < 0) {
      num = checked(-static_cast<__int128>(num));
      den = checked(-static_cast<__int128>(den));
    }
    std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  bool is_zero() const { return num == 0; }
  bool is_one() const { return num == 1 && den == 1; }
  bool is_integer() const { return den == 1; }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
    __int128 d = static_cast<__int128>(a.den) * b.den;
    return make(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
    __int128 d = static_cast<__int128>(a.den) * b.den;
    return make(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) throw DomainError("/", 0.0);
    return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
  }
  Rational operator-() const { return make(-static_cast<__int128>(num), den); }

  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  // Integer power; k < 0 inverts (throws DomainError on 0^negative).
  Rational pow(std::int64_t k) const {
    if (k < 0) {
      if (num == 0) throw DomainError("pow", 0.0);
      return Rational(den, num).pow(-k);
    }
    Rational acc(1);
    Rational base = *this;
    while (k > 0) {
      if (k & 1) acc *= base;
      if (k >>= 1) base *= base;
    }
    return acc;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

private:
  static Rational make(__int128 n, __int128 d) {
    Rational r;
    r.num = checked(n);
    r.den = checked(d);
    r.normalize();
    return r;
  }
};

}  // namespace sform
