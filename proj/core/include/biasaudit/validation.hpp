// Copyright 2026 The biasaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/records.hpp"
#include "biasaudit/schemes.hpp"

namespace biasaudit {

/// Square count matrix, rows = truth, columns = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(CategoryScheme scheme);
  ConfusionMatrix(CategoryScheme scheme, const std::vector<std::vector<std::uint64_t>>& rows);

  const CategoryScheme& scheme() const { return scheme_; }
  std::size_t size() const { return scheme_.size(); }
  std::uint64_t n() const { return n_; }

  std::uint64_t at(std::size_t truth, std::size_t predicted) const;
  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t trace() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  CategoryScheme scheme_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

struct ConfusionResult {
  ConfusionMatrix matrix;
  /// image_ids present on only one side, sorted.
  std::vector<std::string> unmatched_truth;
  std::vector<std::string> unmatched_predicted;
};

/// Joins truth and predicted records on image_id. Each side is read in its
/// requested scheme; the two schemes must coincide.
ConfusionResult confusion_matrix(std::span<const AttributeRecord> truth,
                                 std::span<const AttributeRecord> predicted,
                                 const CategoryScheme& truth_scheme,
                                 const CategoryScheme& predicted_scheme);
ConfusionResult confusion_matrix(std::span<const AttributeRecord> truth,
                                 std::span<const AttributeRecord> predicted,
                                 const CategoryScheme& scheme);

double accuracy(const ConfusionMatrix& cm);
/// counts[i][i] / row_sum(i); nullopt for a class without truth samples.
std::vector<std::optional<double>> per_class_recall(const ConfusionMatrix& cm);

/// Folds rows and columns through the map; n is preserved.
ConfusionMatrix merge_confusion(const ConfusionMatrix& cm, const AggregationMap& map);

nlohmann::ordered_json to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::ordered_json& j);

/// Aligned plain-text table with row/column labels, totals and recall.
std::string format_confusion_table(const ConfusionMatrix& cm);

}  // namespace biasaudit
