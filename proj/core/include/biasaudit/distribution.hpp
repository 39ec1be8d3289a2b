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

/// Probabilities must sum to one within this bound.
inline constexpr double kNormalizationTolerance = 1e-12;

/// Cartesian product of category schemes. Cells are indexed row-major over the
/// components in declared order; a single component is a plain marginal.
class JointScheme {
 public:
  explicit JointScheme(std::vector<CategoryScheme> components);
  JointScheme(const CategoryScheme& marginal)  // NOLINT(google-explicit-constructor)
      : JointScheme(std::vector<CategoryScheme>{marginal}) {}

  std::span<const CategoryScheme> components() const { return components_; }
  const CategoryScheme& component(std::size_t i) const;
  std::size_t rank() const { return components_.size(); }
  bool is_marginal() const { return components_.size() == 1; }
  std::size_t size() const { return cells_; }

  /// "race4" for marginals, "gender2*race4*age3" for joints.
  std::string name() const;
  /// "white" for marginals, "male|white|young" for joints.
  std::string cell_label(std::size_t cell) const;
  std::vector<std::string> cell_labels(std::size_t cell) const;

  std::size_t flatten(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> unflatten(std::size_t cell) const;

  friend bool operator==(const JointScheme&, const JointScheme&) = default;

 private:
  std::vector<CategoryScheme> components_;
  std::size_t cells_ = 1;
};

struct SmoothingPolicy {
  enum class Kind { none, epsilon_floor, additive };

  Kind kind = Kind::none;
  double epsilon = 1e-6;
  double alpha = 0.5;

  static SmoothingPolicy none() { return {}; }
  static SmoothingPolicy epsilon_floor(double epsilon = 1e-6) {
    return {Kind::epsilon_floor, epsilon, 0.5};
  }
  static SmoothingPolicy additive(double alpha = 0.5) { return {Kind::additive, 1e-6, alpha}; }

  void validate() const;

  friend bool operator==(const SmoothingPolicy&, const SmoothingPolicy&) = default;
};

/// "none", "epsilon_floor(1e-06)", "additive(0.5)".
std::string to_string(const SmoothingPolicy& policy);
std::string_view to_string(SmoothingPolicy::Kind kind);
SmoothingPolicy::Kind parse_smoothing_kind(std::string_view text);

/// Probability vector over a scheme, optionally backed by integer counts
/// (then probs[i] == counts[i] / sample_size exactly).
class Distribution {
 public:
  Distribution(JointScheme scheme, std::vector<double> probs);
  static Distribution from_counts(JointScheme scheme, std::vector<std::uint64_t> counts);

  const JointScheme& scheme() const { return scheme_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }

  const std::optional<std::vector<std::uint64_t>>& counts() const { return counts_; }
  std::optional<std::uint64_t> sample_size() const { return sample_size_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  JointScheme scheme_;
  std::vector<double> probs_;
  std::optional<std::vector<std::uint64_t>> counts_;
  std::optional<std::uint64_t> sample_size_;
};

/// Category counts of one attribute over the records. Records lacking an
/// optional attribute (attractiveness) are not counted.
std::vector<std::uint64_t> count_marginal(std::span<const AttributeRecord> records,
                                          const CategoryScheme& scheme);

/// Throws "cannot estimate from zero samples" when nothing is counted.
Distribution estimate_marginal(std::span<const AttributeRecord> records,
                               const CategoryScheme& scheme);

/// Exact co-occurrence counts over the product of `components`, each read
/// from the records through resolve_attribute.
Distribution estimate_joint(std::span<const AttributeRecord> records,
                            std::span<const CategoryScheme> components);

/// Sums joint cells sharing the component's category. Counts carry through.
Distribution marginalize(const Distribution& joint, std::size_t component);

/// Pushes a marginal through an aggregation map; counts carry through.
Distribution aggregate(const Distribution& dist, const AggregationMap& map);

/// epsilon_floor: (p + e) / (1 + K e). additive: (c + a) / (n + K a), needs
/// counts. none: identity. Smoothed outputs drop their counts.
Distribution smooth(const Distribution& dist, const SmoothingPolicy& policy);

nlohmann::ordered_json to_json(const Distribution& dist);
/// Accepts probabilities summing to one within 1e-9 and renormalizes them.
Distribution distribution_from_json(const nlohmann::ordered_json& j);

}  // namespace biasaudit
