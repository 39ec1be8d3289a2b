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

#include "biasaudit/schemes.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::gender: return "gender";
    case AttributeKind::race: return "race";
    case AttributeKind::age: return "age";
    case AttributeKind::attractiveness: return "attractiveness";
    case AttributeKind::emotion: return "emotion";
  }
  return "unknown";
}

CategoryScheme::CategoryScheme(std::string name, AttributeKind kind,
                               std::vector<std::string> categories)
    : name_(std::move(name)), kind_(kind), categories_(std::move(categories)) {
  if (name_.empty()) throw Error("category scheme needs a name");
  if (categories_.empty())
    throw Error(fmt::format("category scheme {} has no categories", name_));
  std::unordered_set<std::string_view> seen;
  for (const auto& c : categories_) {
    if (c.empty())
      throw Error(fmt::format("category scheme {} has an empty label", name_));
    if (!seen.insert(c).second)
      throw Error(fmt::format("duplicate category '{}' in scheme {}", c, name_));
  }
}

const std::string& CategoryScheme::label(std::size_t index) const {
  if (index >= categories_.size())
    throw Error(fmt::format("category index {} out of range for {}", index, name_));
  return categories_[index];
}

std::optional<std::size_t> CategoryScheme::find(std::string_view label) const {
  // Schemes hold a handful of labels.
  for (std::size_t i = 0; i < categories_.size(); ++i)
    if (categories_[i] == label) return i;
  return std::nullopt;
}

std::size_t CategoryScheme::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw Error(fmt::format("unknown category '{}' for {}", label, name_));
}

namespace schemes {

const CategoryScheme& gender2() {
  static const CategoryScheme s("gender2", AttributeKind::gender, {"male", "female"});
  return s;
}
const CategoryScheme& race5() {
  static const CategoryScheme s("race5", AttributeKind::race,
                                {"white", "black", "asian", "indian", "latino"});
  return s;
}
const CategoryScheme& race4() {
  static const CategoryScheme s("race4", AttributeKind::race,
                                {"white", "black", "asian", "others"});
  return s;
}
const CategoryScheme& age5() {
  static const CategoryScheme s("age5", AttributeKind::age,
                                {"0-9", "10-19", "20-39", "40-59", "60+"});
  return s;
}
const CategoryScheme& age3() {
  static const CategoryScheme s("age3", AttributeKind::age, {"young", "middle", "old"});
  return s;
}
const CategoryScheme& attract3() {
  static const CategoryScheme s("attract3", AttributeKind::attractiveness,
                                {"low", "medium", "high"});
  return s;
}
const CategoryScheme& emotion8() {
  static const CategoryScheme s("emotion8", AttributeKind::emotion,
                                {"neutral", "happy", "sad", "angry", "surprised",
                                 "disgusted", "fearful", "unhappy"});
  return s;
}

std::span<const CategoryScheme* const> builtin() {
  static const std::array<const CategoryScheme*, 7> all = {
      &gender2(), &race5(), &race4(), &age5(), &age3(), &attract3(), &emotion8()};
  return all;
}

const CategoryScheme& by_name(std::string_view name) {
  for (const auto* s : builtin())
    if (s->name() == name) return *s;
  throw Error(fmt::format("unknown category scheme '{}'", name));
}

const CategoryScheme& storage(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::gender: return gender2();
    case AttributeKind::race: return race5();
    case AttributeKind::age: return age5();
    case AttributeKind::attractiveness: return attract3();
    case AttributeKind::emotion: return emotion8();
  }
  throw Error("unknown attribute kind");
}

}  // namespace schemes

AggregationMap::AggregationMap(CategoryScheme source, CategoryScheme target,
                               std::vector<std::size_t> mapping)
    : source_(std::move(source)), target_(std::move(target)), mapping_(std::move(mapping)) {
  if (source_.kind() != target_.kind())
    throw Error(fmt::format("aggregation {}->{} crosses attribute kinds",
                            source_.name(), target_.name()));
  if (mapping_.size() != source_.size())
    throw Error(fmt::format("aggregation {}->{} is not total", source_.name(),
                            target_.name()));
  std::vector<bool> hit(target_.size(), false);
  for (auto t : mapping_) {
    if (t >= target_.size())
      throw Error(fmt::format("aggregation {}->{} maps outside the target",
                              source_.name(), target_.name()));
    hit[t] = true;
  }
  for (std::size_t t = 0; t < hit.size(); ++t)
    if (!hit[t])
      throw Error(fmt::format("aggregation {}->{} leaves '{}' without a preimage",
                              source_.name(), target_.name(), target_.label(t)));
}

AggregationMap AggregationMap::from_labels(
    CategoryScheme source, CategoryScheme target,
    std::span<const std::pair<std::string, std::string>> pairs) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> mapping(source.size(), unset);
  for (const auto& [from, to] : pairs) {
    auto i = source.index_of(from);
    if (mapping[i] != unset)
      throw Error(fmt::format("category '{}' mapped twice", from));
    mapping[i] = target.index_of(to);
  }
  for (std::size_t i = 0; i < mapping.size(); ++i)
    if (mapping[i] == unset)
      throw Error(fmt::format("category '{}' of {} is unmapped", source.label(i),
                              source.name()));
  return AggregationMap(std::move(source), std::move(target), std::move(mapping));
}

std::size_t AggregationMap::apply(std::size_t source_index) const {
  if (source_index >= mapping_.size())
    throw Error(fmt::format("category index {} out of range for {}", source_index,
                            source_.name()));
  return mapping_[source_index];
}

const std::string& AggregationMap::apply(std::string_view source_label) const {
  return target_.label(mapping_[source_.index_of(source_label)]);
}

namespace aggregations {

const AggregationMap& race5_to_race4() {
  // white, black, asian keep their label; indian and latino fold into others.
  static const AggregationMap m(schemes::race5(), schemes::race4(), {0, 1, 2, 3, 3});
  return m;
}

const AggregationMap& age5_to_age3() {
  static const AggregationMap m(schemes::age5(), schemes::age3(), {0, 0, 0, 1, 2});
  return m;
}

const AggregationMap* find(const CategoryScheme& source, const CategoryScheme& target) {
  for (const auto* m : {&race5_to_race4(), &age5_to_age3()})
    if (m->source() == source && m->target() == target) return m;
  return nullptr;
}

}  // namespace aggregations

std::size_t AttributeView::index_of(std::string_view stored_label) const {
  if (aggregation == nullptr) return target.index_of(stored_label);
  return aggregation->apply(aggregation->source().index_of(stored_label));
}

AttributeView resolve_attribute(const CategoryScheme& target) {
  const auto& stored = schemes::storage(target.kind());
  if (stored == target) return AttributeView{target.kind(), nullptr, target};
  if (const auto* m = aggregations::find(stored, target))
    return AttributeView{target.kind(), m, target};
  throw Error(fmt::format("scheme {} cannot be derived from stored {}", target.name(),
                          stored.name()));
}

}  // namespace biasaudit
