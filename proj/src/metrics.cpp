// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "dpfl/errors.hpp"

namespace dpfl {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw DataError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double binary_accuracy(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  const std::size_t total = tp + tn + fp + fn;
  if (total == 0) throw DataError("binary_accuracy: empty confusion matrix");
  return static_cast<double>(tp + tn) / static_cast<double>(total);
}

EditCounts align_words(std::span<const std::string> reference,
                       std::span<const std::string> hypothesis) {
  const std::size_t n = reference.size(), m = hypothesis.size();
  // cost[i][j]: edits turning reference[:i] into hypothesis[:j].
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
    }
  }

  EditCounts counts;
  counts.reference_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool match = reference[i - 1] == hypothesis[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (match ? 0 : 1)) {
        counts.substitutions += match ? 0 : 1;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++counts.insertions;
      --j;
    } else {
      ++counts.deletions;
      --i;
    }
  }
  return counts;
}

double word_error_rate(std::span<const std::string> reference,
                       std::span<const std::string> hypothesis) {
  if (reference.empty()) throw DataError("wer: reference must contain at least one word");
  return align_words(reference, hypothesis).rate();
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream is{std::string(text)};
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

}  // namespace dpfl
