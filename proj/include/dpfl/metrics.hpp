// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpfl {

/// Fraction of exact matches. Throws DataError on empty or ragged input.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// (TP + TN) / (TP + TN + FP + FN).
double binary_accuracy(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
  double rate() const noexcept {
    return static_cast<double>(errors()) / static_cast<double>(reference_length);
  }
};

/// Minimum-edit alignment with unit costs. On ties the backtrace prefers
/// substitution, then insertion, then deletion; only the total is
/// alignment-independent.
EditCounts align_words(std::span<const std::string> reference,
                       std::span<const std::string> hypothesis);

/// (S + D + I) / N. Throws DataError when the reference is empty.
double word_error_rate(std::span<const std::string> reference,
                       std::span<const std::string> hypothesis);

std::vector<std::string> split_words(std::string_view text);

}  // namespace dpfl
