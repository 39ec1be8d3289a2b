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

#include "biasaudit/distribution.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

using Json = nlohmann::ordered_json;

double sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

void check_probs(const JointScheme& scheme, std::span<const double> probs, double tolerance) {
  if (probs.size() != scheme.size())
    throw Error(fmt::format("distribution over {} needs {} probabilities, got {}",
                            scheme.name(), scheme.size(), probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
      throw Error(fmt::format("probability of '{}' is not a finite non-negative number",
                              scheme.cell_label(i)));
  double total = sum(probs);
  if (std::abs(total - 1.0) > tolerance)
    throw Error(fmt::format("probabilities over {} sum to {:.12g}, not 1", scheme.name(), total));
}

}  // namespace

JointScheme::JointScheme(std::vector<CategoryScheme> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw Error("joint scheme needs at least one component");
  for (const auto& c : components_) cells_ *= c.size();
}

const CategoryScheme& JointScheme::component(std::size_t i) const {
  if (i >= components_.size())
    throw Error(fmt::format("component index {} out of range for {}", i, name()));
  return components_[i];
}

std::string JointScheme::name() const {
  std::string out;
  for (const auto& c : components_) {
    if (!out.empty()) out.push_back('*');
    out += c.name();
  }
  return out;
}

std::vector<std::string> JointScheme::cell_labels(std::size_t cell) const {
  auto idx = unflatten(cell);
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out.push_back(components_[k].label(idx[k]));
  return out;
}

std::string JointScheme::cell_label(std::size_t cell) const {
  std::string out;
  for (const auto& l : cell_labels(cell)) {
    if (!out.empty()) out.push_back('|');
    out += l;
  }
  return out;
}

std::size_t JointScheme::flatten(std::span<const std::size_t> indices) const {
  if (indices.size() != components_.size())
    throw Error(fmt::format("{} needs {} indices", name(), components_.size()));
  std::size_t cell = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= components_[k].size())
      throw Error(fmt::format("index {} out of range for {}", indices[k], components_[k].name()));
    cell = cell * components_[k].size() + indices[k];
  }
  return cell;
}

std::vector<std::size_t> JointScheme::unflatten(std::size_t cell) const {
  if (cell >= cells_) throw Error(fmt::format("cell {} out of range for {}", cell, name()));
  std::vector<std::size_t> idx(components_.size());
  for (std::size_t k = components_.size(); k-- > 0;) {
    idx[k] = cell % components_[k].size();
    cell /= components_[k].size();
  }
  return idx;
}

void SmoothingPolicy::validate() const {
  if (kind == Kind::epsilon_floor && !(epsilon > 0.0))
    throw Error("epsilon_floor smoothing needs epsilon > 0");
  if (kind == Kind::additive && !(alpha > 0.0))
    throw Error("additive smoothing needs alpha > 0");
}

std::string_view to_string(SmoothingPolicy::Kind kind) {
  switch (kind) {
    case SmoothingPolicy::Kind::none: return "none";
    case SmoothingPolicy::Kind::epsilon_floor: return "epsilon_floor";
    case SmoothingPolicy::Kind::additive: return "additive";
  }
  return "none";
}

SmoothingPolicy::Kind parse_smoothing_kind(std::string_view text) {
  if (text == "none") return SmoothingPolicy::Kind::none;
  if (text == "epsilon_floor") return SmoothingPolicy::Kind::epsilon_floor;
  if (text == "additive") return SmoothingPolicy::Kind::additive;
  throw Error(fmt::format("unknown smoothing '{}'", text));
}

std::string to_string(const SmoothingPolicy& policy) {
  switch (policy.kind) {
    case SmoothingPolicy::Kind::none: return "none";
    case SmoothingPolicy::Kind::epsilon_floor: return fmt::format("epsilon_floor({})", policy.epsilon);
    case SmoothingPolicy::Kind::additive: return fmt::format("additive({})", policy.alpha);
  }
  return "none";
}

Distribution::Distribution(JointScheme scheme, std::vector<double> probs)
    : scheme_(std::move(scheme)), probs_(std::move(probs)) {
  check_probs(scheme_, probs_, kNormalizationTolerance);
}

Distribution Distribution::from_counts(JointScheme scheme, std::vector<std::uint64_t> counts) {
  if (counts.size() != scheme.size())
    throw Error(fmt::format("distribution over {} needs {} counts, got {}", scheme.name(),
                            scheme.size(), counts.size()));
  std::uint64_t n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (n == 0) throw Error("cannot estimate from zero samples");
  std::vector<double> probs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    probs[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  Distribution d(std::move(scheme), std::move(probs));
  d.counts_ = std::move(counts);
  d.sample_size_ = n;
  return d;
}

std::vector<std::uint64_t> count_marginal(std::span<const AttributeRecord> records,
                                          const CategoryScheme& scheme) {
  auto view = resolve_attribute(scheme);
  std::vector<std::uint64_t> counts(scheme.size(), 0);
  for (const auto& r : records)
    if (auto v = r.value(view.kind)) ++counts[view.index_of(*v)];
  return counts;
}

Distribution estimate_marginal(std::span<const AttributeRecord> records,
                               const CategoryScheme& scheme) {
  if (records.empty()) throw Error("cannot estimate from zero samples");
  return Distribution::from_counts(JointScheme(scheme), count_marginal(records, scheme));
}

Distribution estimate_joint(std::span<const AttributeRecord> records,
                            std::span<const CategoryScheme> components) {
  if (records.empty()) throw Error("cannot estimate from zero samples");
  JointScheme joint(std::vector<CategoryScheme>(components.begin(), components.end()));
  std::vector<AttributeView> views;
  for (const auto& c : components) views.push_back(resolve_attribute(c));

  std::vector<std::uint64_t> counts(joint.size(), 0);
  std::vector<std::size_t> idx(views.size());
  for (const auto& r : records) {
    bool complete = true;
    for (std::size_t k = 0; k < views.size(); ++k) {
      auto v = r.value(views[k].kind);
      if (!v) {
        complete = false;
        break;
      }
      idx[k] = views[k].index_of(*v);
    }
    if (complete) ++counts[joint.flatten(idx)];
  }
  return Distribution::from_counts(std::move(joint), std::move(counts));
}

Distribution marginalize(const Distribution& joint, std::size_t component) {
  const auto& scheme = joint.scheme();
  const auto& target = scheme.component(component);
  if (joint.counts()) {
    std::vector<std::uint64_t> counts(target.size(), 0);
    for (std::size_t cell = 0; cell < scheme.size(); ++cell)
      counts[scheme.unflatten(cell)[component]] += (*joint.counts())[cell];
    return Distribution::from_counts(JointScheme(target), std::move(counts));
  }
  std::vector<double> probs(target.size(), 0.0);
  for (std::size_t cell = 0; cell < scheme.size(); ++cell)
    probs[scheme.unflatten(cell)[component]] += joint[cell];
  return Distribution(JointScheme(target), std::move(probs));
}

Distribution aggregate(const Distribution& dist, const AggregationMap& map) {
  if (!dist.scheme().is_marginal() || !(dist.scheme().component(0) == map.source()))
    throw Error(fmt::format("cannot aggregate {} with a {}->{} map", dist.scheme().name(),
                            map.source().name(), map.target().name()));
  if (dist.counts()) {
    std::vector<std::uint64_t> counts(map.target().size(), 0);
    for (std::size_t i = 0; i < dist.size(); ++i) counts[map.apply(i)] += (*dist.counts())[i];
    return Distribution::from_counts(JointScheme(map.target()), std::move(counts));
  }
  std::vector<double> probs(map.target().size(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) probs[map.apply(i)] += dist[i];
  return Distribution(JointScheme(map.target()), std::move(probs));
}

Distribution smooth(const Distribution& dist, const SmoothingPolicy& policy) {
  policy.validate();
  const auto k = static_cast<double>(dist.size());
  std::vector<double> probs(dist.size());
  switch (policy.kind) {
    case SmoothingPolicy::Kind::none:
      return dist;
    case SmoothingPolicy::Kind::epsilon_floor: {
      const double denom = 1.0 + k * policy.epsilon;
      for (std::size_t i = 0; i < dist.size(); ++i) probs[i] = (dist[i] + policy.epsilon) / denom;
      break;
    }
    case SmoothingPolicy::Kind::additive: {
      if (!dist.counts()) throw Error("additive smoothing requires counts");
      const double denom = static_cast<double>(*dist.sample_size()) + k * policy.alpha;
      for (std::size_t i = 0; i < dist.size(); ++i)
        probs[i] = (static_cast<double>((*dist.counts())[i]) + policy.alpha) / denom;
      break;
    }
  }
  return Distribution(dist.scheme(), std::move(probs));
}

nlohmann::ordered_json to_json(const Distribution& dist) {
  Json j;
  const auto& scheme = dist.scheme();
  if (scheme.is_marginal()) {
    j["scheme"] = scheme.component(0).name();
    j["categories"] = scheme.component(0).categories();
  } else {
    Json names = Json::array();
    for (const auto& c : scheme.components()) names.push_back(c.name());
    j["scheme"] = std::move(names);
    Json cells = Json::array();
    for (std::size_t i = 0; i < scheme.size(); ++i) cells.push_back(scheme.cell_labels(i));
    j["cells"] = std::move(cells);
  }
  j["probs"] = dist.probs();
  if (dist.counts()) {
    j["counts"] = *dist.counts();
    j["sample_size"] = *dist.sample_size();
  }
  return j;
}

namespace {

Distribution parse_distribution(const Json& j) {
  if (!j.is_object() || !j.contains("scheme")) throw Error("distribution JSON needs a 'scheme'");
  std::vector<CategoryScheme> components;
  const auto& s = j.at("scheme");
  if (s.is_string()) {
    components.push_back(schemes::by_name(s.get<std::string>()));
  } else if (s.is_array() && !s.empty()) {
    for (const auto& name : s) {
      if (!name.is_string()) throw Error("scheme component names must be strings");
      components.push_back(schemes::by_name(name.get<std::string>()));
    }
  } else {
    throw Error("'scheme' must be a name or a list of names");
  }
  JointScheme scheme(std::move(components));

  // Labels are optional on input but must agree with the scheme order when given.
  if (j.contains("categories")) {
    if (!scheme.is_marginal()) throw Error("joint distributions list 'cells', not 'categories'");
    auto labels = j.at("categories").get<std::vector<std::string>>();
    auto expected = scheme.component(0).categories();
    if (!std::equal(labels.begin(), labels.end(), expected.begin(), expected.end()))
      throw Error(fmt::format("categories do not match the order of {}", scheme.name()));
  }
  if (j.contains("cells")) {
    const auto& cells = j.at("cells");
    if (!cells.is_array() || cells.size() != scheme.size())
      throw Error(fmt::format("{} has {} cells", scheme.name(), scheme.size()));
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      const auto& c = cells[i];
      bool ok = c.is_string() ? c.get<std::string>() == scheme.cell_label(i)
                              : c.get<std::vector<std::string>>() == scheme.cell_labels(i);
      if (!ok) throw Error(fmt::format("cell {} does not match {}", i, scheme.cell_label(i)));
    }
  }

  if (j.contains("counts")) {
    auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
    auto d = Distribution::from_counts(scheme, std::move(counts));
    if (j.contains("sample_size") && j.at("sample_size").get<std::uint64_t>() != *d.sample_size())
      throw Error("sample_size disagrees with the counts");
    if (j.contains("probs")) {
      auto probs = j.at("probs").get<std::vector<double>>();
      if (probs.size() != d.size()) throw Error("probs and counts differ in length");
      for (std::size_t i = 0; i < probs.size(); ++i)
        if (std::abs(probs[i] - d[i]) > 1e-9)
          throw Error(fmt::format("probability of '{}' disagrees with its count",
                                  scheme.cell_label(i)));
    }
    return d;
  }
  if (!j.contains("probs")) throw Error("distribution JSON needs 'probs' or 'counts'");
  auto probs = j.at("probs").get<std::vector<double>>();
  check_probs(scheme, probs, 1e-9);
  double total = sum(probs);
  if (std::abs(total - 1.0) > kNormalizationTolerance)
    for (auto& p : probs) p /= total;
  return Distribution(std::move(scheme), std::move(probs));
}

}  // namespace

Distribution distribution_from_json(const nlohmann::ordered_json& j) {
  try {
    return parse_distribution(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed distribution JSON: {}", e.what()));
  }
}

}  // namespace biasaudit
