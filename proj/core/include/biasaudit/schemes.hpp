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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biasaudit {

enum class AttributeKind { gender, race, age, attractiveness, emotion };

std::string_view to_string(AttributeKind kind);

/// Ordered, named set of category labels. The order defines vector indexing
/// for every distribution built over the scheme.
class CategoryScheme {
 public:
  CategoryScheme(std::string name, AttributeKind kind,
                 std::vector<std::string> categories);

  const std::string& name() const { return name_; }
  AttributeKind kind() const { return kind_; }
  std::size_t size() const { return categories_.size(); }
  std::span<const std::string> categories() const { return categories_; }
  const std::string& label(std::size_t index) const;

  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws "unknown category '<label>' for <scheme>" when absent.
  std::size_t index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

  friend bool operator==(const CategoryScheme& a, const CategoryScheme& b) {
    return a.name_ == b.name_ && a.kind_ == b.kind_ &&
           a.categories_ == b.categories_;
  }

 private:
  std::string name_;
  AttributeKind kind_;
  std::vector<std::string> categories_;
};

namespace schemes {

const CategoryScheme& gender2();
const CategoryScheme& race5();
const CategoryScheme& race4();
const CategoryScheme& age5();
const CategoryScheme& age3();
const CategoryScheme& attract3();
const CategoryScheme& emotion8();

/// All built-in schemes in a fixed order.
std::span<const CategoryScheme* const> builtin();
/// Built-in scheme by name; throws on an unknown name.
const CategoryScheme& by_name(std::string_view name);
/// The taxonomy a record stores for the given attribute.
const CategoryScheme& storage(AttributeKind kind);

}  // namespace schemes

/// Total, surjective relabeling from one scheme onto a coarser one.
class AggregationMap {
 public:
  /// `mapping[i]` is the target index of source category i.
  AggregationMap(CategoryScheme source, CategoryScheme target,
                 std::vector<std::size_t> mapping);
  /// Builds the map from (source label, target label) pairs.
  static AggregationMap from_labels(
      CategoryScheme source, CategoryScheme target,
      std::span<const std::pair<std::string, std::string>> pairs);

  const CategoryScheme& source() const { return source_; }
  const CategoryScheme& target() const { return target_; }

  std::size_t apply(std::size_t source_index) const;
  const std::string& apply(std::string_view source_label) const;

 private:
  CategoryScheme source_;
  CategoryScheme target_;
  std::vector<std::size_t> mapping_;
};

namespace aggregations {

const AggregationMap& race5_to_race4();
const AggregationMap& age5_to_age3();
/// Built-in map between two schemes, if one exists.
const AggregationMap* find(const CategoryScheme& source,
                           const CategoryScheme& target);

}  // namespace aggregations

/// How to read one attribute from a record in a requested scheme: the stored
/// taxonomy, plus the aggregation onto the requested one when they differ.
struct AttributeView {
  AttributeKind kind;
  const AggregationMap* aggregation = nullptr;
  CategoryScheme target;

  std::size_t index_of(std::string_view stored_label) const;
};

/// Resolves a requested scheme (e.g. race4) to the stored attribute it derives
/// from (race5) and the built-in aggregation between them.
AttributeView resolve_attribute(const CategoryScheme& target);

}  // namespace biasaudit
