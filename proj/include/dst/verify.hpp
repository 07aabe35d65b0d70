// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dst/core.hpp"

namespace dst {

/// Trims, ASCII case-folds and collapses internal whitespace runs to one space.
std::string normalize_answer(std::string_view text);

/// Applies a literal template with a single "{answer}" placeholder, e.g.
/// "#### {answer}". Matches the last occurrence of the text before the
/// placeholder; the answer runs to the text after it, or to the end of the
/// line when nothing follows the placeholder. An empty template returns the
/// whole text. Returns nullopt when the template does not match.
std::optional<std::string> extract_answer(std::string_view text, std::string_view answer_template);

/// Normalized string equality after optional template extraction.
bool verify_exact(std::string_view answer_text, std::string_view gold,
                  std::string_view answer_template = {});

struct NumericVerdict {
  bool accepted = false;
  /// Set when the answer or gold could not be evaluated.
  std::optional<std::string> diagnostic;
};

/// Evaluates both sides exactly and accepts iff
/// |answer - gold| <= rel_tol * max(1, |gold|). Unparseable input and
/// division by zero are rejections with a diagnostic, never exceptions.
NumericVerdict check_numeric(std::string_view answer_text, std::string_view gold,
                             double rel_tol = 1e-6, std::string_view answer_template = {});

bool verify_numeric(std::string_view answer_text, std::string_view gold, double rel_tol = 1e-6);

/// Hook for verifiers not shipped here (e.g. entailment models for open-ended
/// answers).
class AnswerVerifier {
 public:
  virtual ~AnswerVerifier() = default;
  virtual bool accepts(std::string_view answer, std::string_view gold) const = 0;
};

enum class VerifierKind { exact, numeric, nli };

VerifierKind parse_verifier_kind(std::string_view text);
std::string_view to_string(VerifierKind kind);

struct VerifierChoice {
  VerifierKind kind = VerifierKind::numeric;
  std::string answer_template;
  double rel_tol = 1e-6;
  /// Required for VerifierKind::nli; not owned.
  const AnswerVerifier* custom = nullptr;
};

/// 1 iff the state's answer is accepted against the problem's gold answer.
/// States without an answer (e.g. truncated at d_max) label 0.
/// Throws ConfigError when the nli kind is chosen without a custom verifier.
int label_leaf(const ReasoningState& state, const Problem& problem, const VerifierChoice& verifier);

}  // namespace dst
