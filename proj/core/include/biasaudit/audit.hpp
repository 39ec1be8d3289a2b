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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/config.hpp"
#include "biasaudit/distribution.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/records.hpp"
#include "biasaudit/reference.hpp"

namespace biasaudit {

enum class ReportKind { marginal, intersectional, emotion, comparison };
enum class Extreme { none, best, worst };

std::string_view to_string(ReportKind kind);
ReportKind parse_report_kind(std::string_view text);
std::string_view to_string(Extreme extreme);
Extreme parse_extreme(std::string_view text);

/// Model name used for rows computed over every model at once.
inline constexpr std::string_view kPooledModel = "*";
/// Attribute name used for rows over the joint scheme.
inline constexpr std::string_view kJointAttribute = "joint";

/// One divergence cell. `condition` is the reference region for marginal
/// audits, the emotion for emotion-conditioned audits and "b-vs-a" for
/// comparisons. A missing value means the inputs were absent.
struct ReportRow {
  std::string model;
  ModelOrigin origin = ModelOrigin::other;
  std::string attribute;
  std::string condition;
  Metric metric = Metric::kl;
  std::optional<DivergenceValue> value;
  std::optional<SeverityBand> severity;
  Extreme extreme = Extreme::none;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Mean of a column over the models of one origin group.
struct GroupSummary {
  std::string group;
  std::string attribute;
  std::string condition;
  Metric metric = Metric::kl;
  double mean = 0.0;
  std::size_t members = 0;

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

/// Per-category shift of an emotion against the baseline. `scope` is a model
/// name for per-model entries and a group name for group means.
struct CategoryShift {
  std::string scope;
  std::string emotion;
  std::string attribute;
  std::string category;
  double delta_p = 0.0;
  double category_kl = 0.0;
  std::size_t members = 1;

  friend bool operator==(const CategoryShift&, const CategoryShift&) = default;
};

struct EmotionRank {
  std::string emotion;
  double mean_kl = 0.0;

  friend bool operator==(const EmotionRank&, const EmotionRank&) = default;
};

/// Signed joint-cell difference b - a.
struct CellShift {
  std::string cell;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;

  friend bool operator==(const CellShift&, const CellShift&) = default;
};

struct DivergenceReport {
  ReportKind kind = ReportKind::marginal;
  LogBase log_base = LogBase::two;
  SmoothingPolicy smoothing = SmoothingPolicy::epsilon_floor();
  std::string baseline_emotion = "neutral";
  /// Denominator side: the region, the baseline emotion or comparison label a.
  std::string reference;
  std::vector<ReportRow> rows;
  std::vector<GroupSummary> groups;
  std::vector<CategoryShift> shifts;
  std::vector<CategoryShift> group_shifts;
  std::vector<EmotionRank> ordering;
  std::vector<CellShift> top_shifts;
  std::vector<std::string> warnings;
  /// Every distribution a row refers to, keyed by id.
  std::map<std::string, Distribution> distributions;

  const Distribution& distribution(std::string_view id) const;
  friend bool operator==(const DivergenceReport&, const DivergenceReport&) = default;
};

/// "records/<model>/<condition>/<scheme>"
std::string records_id(std::string_view model, std::string_view condition,
                       std::string_view scheme);
/// "reference/<region>/<scheme>"
std::string reference_id(std::string_view region, std::string_view scheme);

/// KL(reference || model), JS and TVD per model and attribute on the
/// baseline-emotion records.
DivergenceReport run_marginal_audit(std::span<const AttributeRecord> records,
                                    const ReferenceSet& references, const AuditConfig& config);

/// Joint KL and JS of every emotion against the baseline, per model. Baseline
/// joints land in `distributions` under the baseline condition.
DivergenceReport run_intersectional_audit(std::span<const AttributeRecord> records,
                                          const AuditConfig& config);

/// Marginal KL curves, per-category shifts with group means and the emotion
/// ordering by mean KL.
DivergenceReport run_emotion_shift_audit(std::span<const AttributeRecord> records,
                                         const AuditConfig& config);

struct ComparisonLabels {
  std::string a = "a";
  std::string b = "b";
};

/// JS of b against a on every attribute and the joint, pooled over models and
/// per model present on both sides, plus the top_k joint cells by |b - a|.
DivergenceReport run_pairwise_comparison(std::span<const AttributeRecord> records_a,
                                         std::span<const AttributeRecord> records_b,
                                         const AuditConfig& config,
                                         const ComparisonLabels& labels = {});

/// Recomputes a row's value from the distributions it names.
DivergenceValue recompute(const DivergenceReport& report, const ReportRow& row);

}  // namespace biasaudit
