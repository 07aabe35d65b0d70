// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

namespace dst {

double mean_squared_error(std::span<const double> predicted, std::span<const double> target);

/// Area under the ROC curve (Mann-Whitney; tied scores count one half).
/// Returns 0.5 when either class is empty.
double roc_auc(std::span<const double> scores, std::span<const int> positive);

}  // namespace dst
