// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/expression.hpp"

#include <cctype>

namespace dst {

namespace {

struct ParseFailure {
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Rational parse() {
    Rational v = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseFailure{what + " at offset " + std::to_string(pos_)};
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(std::string_view token) {
    skip_ws();
    if (s_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  bool eat_minus() { return eat("-") || eat("\xE2\x88\x92"); }
  bool eat_times() { return eat("*") || eat("\xC3\x97"); }
  bool eat_divide() { return eat("/") || eat("\xC3\xB7"); }

  Rational expr() {
    Rational v = term();
    for (;;) {
      if (eat("+")) {
        v += term();
      } else if (eat_minus()) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  Rational term() {
    Rational v = unary();
    for (;;) {
      if (eat_times()) {
        v *= unary();
      } else if (eat_divide()) {
        Rational d = unary();
        if (d == 0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  Rational unary() {
    if (eat_minus()) return -unary();
    if (eat("+")) return unary();
    return primary();
  }

  Rational primary() {
    if (eat("(")) {
      Rational v = expr();
      if (!eat(")")) fail("expected ')'");
      return v;
    }
    skip_ws();
    return number();
  }

  bool digit_at(std::size_t i) const {
    return i < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i]));
  }

  Rational number() {
    std::string digits;
    std::size_t scale = 0;
    const std::size_t start = pos_;
    while (digit_at(pos_)) {
      digits += s_[pos_++];
      // Thousands separator: exactly three digits follow the comma.
      if (pos_ < s_.size() && s_[pos_] == ',' && digit_at(pos_ + 1) && digit_at(pos_ + 2) &&
          digit_at(pos_ + 3) && !digit_at(pos_ + 4)) {
        ++pos_;
      }
    }
    if (pos_ < s_.size() && s_[pos_] == '.' && digit_at(pos_ + 1)) {
      ++pos_;
      while (digit_at(pos_)) {
        digits += s_[pos_++];
        ++scale;
      }
    }
    if (pos_ == start || digits.empty()) {
      if (pos_ >= s_.size()) fail("unexpected end of expression");
      fail("expected a number");
    }
    // A leading zero would make cpp_int read the digits as octal.
    const auto nonzero = digits.find_first_not_of('0');
    boost::multiprecision::cpp_int numerator(nonzero == std::string::npos ? "0" : digits.substr(nonzero));
    boost::multiprecision::cpp_int denominator = boost::multiprecision::pow(
        boost::multiprecision::cpp_int(10), static_cast<unsigned>(scale));
    return Rational(numerator, denominator);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ExpressionResult evaluate_expression(std::string_view text) {
  try {
    return ExpressionResult{Parser(text).parse(), {}};
  } catch (const ParseFailure& e) {
    return ExpressionResult{std::nullopt, e.message};
  } catch (const std::exception& e) {
    return ExpressionResult{std::nullopt, e.what()};
  }
}

}  // namespace dst
