// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#include "dst/verify.hpp"

#include <cctype>

#include "dst/error.hpp"
#include "dst/expression.hpp"

namespace dst {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : trim(text)) {
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::optional<std::string> extract_answer(std::string_view text, std::string_view answer_template) {
  if (answer_template.empty()) return std::string(trim(text));
  constexpr std::string_view kPlaceholder = "{answer}";
  const auto at = answer_template.find(kPlaceholder);
  if (at == std::string_view::npos) {
    throw ConfigError("answer template '" + std::string(answer_template) +
                      "' lacks an {answer} placeholder");
  }
  const std::string_view prefix = answer_template.substr(0, at);
  const std::string_view suffix = answer_template.substr(at + kPlaceholder.size());

  std::size_t begin = 0;
  if (!prefix.empty()) {
    const auto p = text.rfind(prefix);
    if (p == std::string_view::npos) return std::nullopt;
    begin = p + prefix.size();
  }
  std::string_view rest = text.substr(begin);
  std::size_t end;
  if (!suffix.empty()) {
    end = rest.find(suffix);
    if (end == std::string_view::npos) return std::nullopt;
  } else {
    end = rest.find('\n');
    if (end == std::string_view::npos) end = rest.size();
  }
  return std::string(trim(rest.substr(0, end)));
}

bool verify_exact(std::string_view answer_text, std::string_view gold,
                  std::string_view answer_template) {
  const auto extracted = extract_answer(answer_text, answer_template);
  if (!extracted) return false;
  return normalize_answer(*extracted) == normalize_answer(gold);
}

NumericVerdict check_numeric(std::string_view answer_text, std::string_view gold, double rel_tol,
                             std::string_view answer_template) {
  if (!(rel_tol >= 0.0)) throw ValidationError("rel_tol must be >= 0");
  const auto extracted = extract_answer(answer_text, answer_template);
  if (!extracted) return {false, "answer template did not match"};
  const auto a = evaluate_expression(*extracted);
  if (!a.value) return {false, "answer: " + a.diagnostic};
  const auto g = evaluate_expression(gold);
  if (!g.value) return {false, "gold: " + g.diagnostic};
  const Rational tol(rel_tol);
  const Rational scale = boost::multiprecision::max(Rational(1), boost::multiprecision::abs(*g.value));
  const Rational diff = boost::multiprecision::abs(*a.value - *g.value);
  return {diff <= tol * scale, std::nullopt};
}

bool verify_numeric(std::string_view answer_text, std::string_view gold, double rel_tol) {
  return check_numeric(answer_text, gold, rel_tol).accepted;
}

VerifierKind parse_verifier_kind(std::string_view text) {
  if (text == "exact") return VerifierKind::exact;
  if (text == "numeric") return VerifierKind::numeric;
  if (text == "nli") return VerifierKind::nli;
  throw ConfigError("unknown verifier '" + std::string(text) + "'");
}

std::string_view to_string(VerifierKind kind) {
  switch (kind) {
    case VerifierKind::exact: return "exact";
    case VerifierKind::numeric: return "numeric";
    case VerifierKind::nli: return "nli";
  }
  return "unknown";
}

int label_leaf(const ReasoningState& state, const Problem& problem, const VerifierChoice& verifier) {
  if (!state.answer) return 0;
  switch (verifier.kind) {
    case VerifierKind::exact:
      return verify_exact(*state.answer, problem.gold_answer, verifier.answer_template) ? 1 : 0;
    case VerifierKind::numeric:
      return check_numeric(*state.answer, problem.gold_answer, verifier.rel_tol,
                           verifier.answer_template)
                     .accepted
                 ? 1
                 : 0;
    case VerifierKind::nli:
      if (!verifier.custom) throw ConfigError("no NLI verifier is shipped; supply one");
      return verifier.custom->accepts(*state.answer, problem.gold_answer) ? 1 : 0;
  }
  return 0;
}

}  // namespace dst
