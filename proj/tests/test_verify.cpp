// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "dst/error.hpp"
#include "dst/expression.hpp"
#include "dst/verify.hpp"
#include "oracles.hpp"

using namespace dst;
using namespace dst::oracle;


TEST_CASE("verify_exact examples") {
  CHECK(verify_exact(" Yes ", "yes"));
  CHECK_FALSE(verify_exact("A", "B"));
  CHECK(verify_exact("#### 42", "42", "#### {answer}"));
  CHECK(verify_exact("so the total is 3.\n#### 42\n", "42", "#### {answer}"));
  CHECK_FALSE(verify_exact("no marker 42", "42", "#### {answer}"));
  CHECK(normalize_answer("  A \t  b\nC ") == "a b c");
}

TEST_CASE("extraction fixtures") {
  CHECK(extract_answer("#### 42", "#### {answer}") == "42");
  CHECK(extract_answer("step\n#### 1\n#### 7", "#### {answer}") == "7");
  CHECK(extract_answer("The answer is 17.", "The answer is {answer}.") == "17");
  CHECK(extract_answer("Answer: (B) done", "Answer: ({answer})") == "B");
  CHECK(extract_answer("plain", "") == "plain");
  CHECK_FALSE(extract_answer("nothing here", "#### {answer}").has_value());
}

TEST_CASE("normalization is idempotent") {
  const std::vector<std::string> samples{"  Foo  Bar ", "x", "", "\tA\nB\n", "MiXeD   case 12"};
  for (const auto& a : samples) {
    CHECK(normalize_answer(normalize_answer(a)) == normalize_answer(a));
    for (const auto& g : samples) CHECK(verify_exact(a, g) == verify_exact(normalize_answer(a), g));
  }
}

TEST_CASE("verify_numeric examples") {
  CHECK(verify_numeric("2*6+5", "17"));
  CHECK(verify_numeric("42.0", "42"));
  CHECK(verify_numeric("(1/3)*3", "1"));
  CHECK(verify_numeric("-3", "−3"));
  CHECK(verify_numeric("1,000 ÷ 8", "125"));
  CHECK_FALSE(verify_numeric("1/0", "1"));
  CHECK_FALSE(verify_numeric("2+", "2"));
  CHECK_FALSE(verify_numeric("abc", "1"));
  CHECK(verify_numeric("1000000.5", "1000000"));
  CHECK(verify_numeric("0.05 * 20", "1"));
  CHECK(evaluate_expression("010").value == Rational(10));
  CHECK_FALSE(verify_numeric("1000002", "1000000"));
  CHECK(verify_numeric("1.0000009", "1"));
  CHECK_FALSE(verify_numeric("1.0000011", "1"));

  const auto v = check_numeric("1/(2-2)", "1");
  CHECK_FALSE(v.accepted);
  REQUIRE(v.diagnostic.has_value());
  CHECK(v.diagnostic->find("zero") != std::string::npos);
  CHECK(check_numeric("#### 12", "12", 1e-6, "#### {answer}").accepted);
}

TEST_CASE("evaluate_expression never throws") {
  for (std::string s : {"", "(", ")", "1..2", "--", "1,23", "((1)", "1e5", "\xff\xfe", "3 3"}) {
    ExpressionResult r;
    CHECK_NOTHROW(r = evaluate_expression(s));
    CHECK_FALSE(r.value.has_value());
    CHECK_FALSE(r.diagnostic.empty());
  }
  CHECK(evaluate_expression("--3").value == Rational(3));
  CHECK(evaluate_expression("2.50").value == Rational(5, 2));
}

TEST_CASE("verify_numeric agrees with a GMP oracle on 10,000 random expressions") {
  std::mt19937_64 rng(2024);
  const double rel_tol = 1e-6;
  const mpq_class tol(rel_tol);
  int disagreements = 0, accepted = 0, undefined = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto e = random_expr(rng, 1 + static_cast<int>(rng() % 4));
    const std::string text = render(*e, rng);
    const auto exact = oracle_eval(*e);

    // Gold: the exact value when it has a short decimal form, else a nearby integer.
    std::string gold;
    mpq_class g;
    if (exact && rng() % 2 == 0 && !decimal_string(*exact).empty()) {
      gold = decimal_string(*exact);
    } else {
      const long base = exact ? static_cast<long>(mpz_class(exact->get_num() / exact->get_den()).get_si()) : 3;
      gold = std::to_string(base + static_cast<long>(rng() % 3) - 1);
    }
    g.set_str(gold.find('.') == std::string::npos ? gold : "0", 10);
    if (gold.find('.') != std::string::npos) g = *exact;

    bool expect = false;
    if (exact) {
      const mpq_class diff = abs(mpq_class(*exact - g));
      const mpq_class scale = abs(g) > 1 ? mpq_class(abs(g)) : mpq_class(1);
      expect = diff <= tol * scale;
    } else {
      ++undefined;
    }
    const bool got = verify_numeric(text, gold, rel_tol);
    if (got != expect) {
      ++disagreements;
      if (disagreements < 5) MESSAGE(text << " vs " << gold << " oracle=" << expect);
    }
    accepted += got;
  }
  CHECK(disagreements == 0);
  CHECK(accepted > 1000);
  CHECK(undefined > 0);
}

TEST_CASE("label_leaf") {
  Problem p{"p", "q", "17"};
  ReasoningState s;
  s.depth = 3;
  VerifierChoice numeric;
  CHECK(label_leaf(s, p, numeric) == 0);
  s.answer = "2*6+5";
  CHECK(label_leaf(s, p, numeric) == 1);
  s.answer = "16";
  CHECK(label_leaf(s, p, numeric) == 0);
  VerifierChoice exact;
  exact.kind = VerifierKind::exact;
  s.answer = " 17 ";
  CHECK(label_leaf(s, p, exact) == 1);
  VerifierChoice nli;
  nli.kind = VerifierKind::nli;
  CHECK_THROWS_AS(label_leaf(s, p, nli), ConfigError);
  struct Always final : AnswerVerifier {
    bool accepts(std::string_view, std::string_view) const override { return true; }
  } always;
  nli.custom = &always;
  CHECK(label_leaf(s, p, nli) == 1);
}
