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

#include "biasaudit/validation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {

ConfusionMatrix::ConfusionMatrix(CategoryScheme scheme)
    : scheme_(std::move(scheme)), counts_(scheme_.size() * scheme_.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(CategoryScheme scheme,
                                 const std::vector<std::vector<std::uint64_t>>& rows)
    : ConfusionMatrix(std::move(scheme)) {
  if (rows.size() != size())
    throw Error(fmt::format("{} confusion matrix needs {} rows", scheme_.name(), size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != size())
      throw Error(fmt::format("{} confusion matrix needs {} columns", scheme_.name(), size()));
    for (std::size_t p = 0; p < rows[t].size(); ++p) add(t, p, rows[t][p]);
  }
}

std::uint64_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
  if (truth >= size() || predicted >= size()) throw Error("confusion index out of range");
  return counts_[truth * size() + predicted];
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
  if (truth >= size() || predicted >= size()) throw Error("confusion index out of range");
  counts_[truth * size() + predicted] += count;
  n_ += count;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < size(); ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += at(i, i);
  return s;
}

ConfusionResult confusion_matrix(std::span<const AttributeRecord> truth,
                                 std::span<const AttributeRecord> predicted,
                                 const CategoryScheme& truth_scheme,
                                 const CategoryScheme& predicted_scheme) {
  if (!(truth_scheme == predicted_scheme))
    throw Error(fmt::format("scheme mismatch: truth in {}, predictions in {}; aggregate one side",
                            truth_scheme.name(), predicted_scheme.name()));
  auto view = resolve_attribute(truth_scheme);

  auto index = [&](std::span<const AttributeRecord> side, std::string_view name) {
    std::map<std::string_view, const AttributeRecord*> by_id;
    for (const auto& r : side)
      if (!by_id.emplace(r.image_id, &r).second)
        throw Error(fmt::format("duplicate image_id '{}' in {} set", r.image_id, name));
    return by_id;
  };
  auto truth_ids = index(truth, "truth");
  auto pred_ids = index(predicted, "predicted");

  ConfusionResult result{ConfusionMatrix(truth_scheme), {}, {}};
  for (const auto& [id, t] : truth_ids) {
    auto it = pred_ids.find(id);
    if (it == pred_ids.end()) {
      result.unmatched_truth.emplace_back(id);
      continue;
    }
    auto tv = t->value(view.kind);
    auto pv = it->second->value(view.kind);
    if (!tv || !pv) {
      result.unmatched_truth.emplace_back(id);
      continue;
    }
    result.matrix.add(view.index_of(*tv), view.index_of(*pv));
  }
  for (const auto& [id, p] : pred_ids)
    if (!truth_ids.contains(id)) result.unmatched_predicted.emplace_back(id);
  if (result.matrix.n() == 0) throw Error("no image_id matched between truth and predictions");
  return result;
}

ConfusionResult confusion_matrix(std::span<const AttributeRecord> truth,
                                 std::span<const AttributeRecord> predicted,
                                 const CategoryScheme& scheme) {
  return confusion_matrix(truth, predicted, scheme, scheme);
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.n() == 0) throw Error("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.n());
}

std::vector<std::optional<double>> per_class_recall(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(cm.size());
  for (std::size_t i = 0; i < cm.size(); ++i)
    if (auto row = cm.row_sum(i); row > 0)
      out[i] = static_cast<double>(cm.at(i, i)) / static_cast<double>(row);
  return out;
}

ConfusionMatrix merge_confusion(const ConfusionMatrix& cm, const AggregationMap& map) {
  if (!(cm.scheme() == map.source()))
    throw Error(fmt::format("cannot merge a {} matrix with a {}->{} map", cm.scheme().name(),
                            map.source().name(), map.target().name()));
  ConfusionMatrix out(map.target());
  for (std::size_t t = 0; t < cm.size(); ++t)
    for (std::size_t p = 0; p < cm.size(); ++p)
      if (auto c = cm.at(t, p)) out.add(map.apply(t), map.apply(p), c);
  return out;
}

nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["scheme"] = cm.scheme().name();
  j["categories"] = cm.scheme().categories();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < cm.size(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < cm.size(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(std::move(row));
  }
  j["counts"] = std::move(rows);
  j["n"] = cm.n();
  return j;
}

ConfusionMatrix confusion_from_json(const nlohmann::ordered_json& j) {
  try {
    ConfusionMatrix cm(schemes::by_name(j.at("scheme").get<std::string>()),
                       j.at("counts").get<std::vector<std::vector<std::uint64_t>>>());
    if (j.contains("n") && j.at("n").get<std::uint64_t>() != cm.n())
      throw Error("confusion matrix n disagrees with its counts");
    return cm;
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed confusion matrix: {}", e.what()));
  }
}

std::string format_confusion_table(const ConfusionMatrix& cm) {
  const auto& labels = cm.scheme().categories();
  std::size_t label_w = std::string_view("truth \\ pred").size();
  for (const auto& l : labels) label_w = std::max(label_w, l.size());
  std::size_t cell_w = std::string_view("recall").size();
  for (const auto& l : labels) cell_w = std::max(cell_w, l.size());
  cell_w = std::max(cell_w, fmt::format("{}", cm.n()).size());

  std::string out = fmt::format("{:<{}}", "truth \\ pred", label_w);
  for (const auto& l : labels) out += fmt::format("  {:>{}}", l, cell_w);
  out += fmt::format("  {:>{}}  {:>{}}\n", "total", cell_w, "recall", cell_w);

  auto recall = per_class_recall(cm);
  for (std::size_t t = 0; t < cm.size(); ++t) {
    out += fmt::format("{:<{}}", labels[t], label_w);
    for (std::size_t p = 0; p < cm.size(); ++p) out += fmt::format("  {:>{}}", cm.at(t, p), cell_w);
    out += fmt::format("  {:>{}}", cm.row_sum(t), cell_w);
    out += recall[t] ? fmt::format("  {:>{}.4f}\n", *recall[t], cell_w)
                     : fmt::format("  {:>{}}\n", "n/a", cell_w);
  }
  out += fmt::format("accuracy {:.4f} over {} samples\n", cm.n() ? accuracy(cm) : 0.0, cm.n());
  return out;
}

}  // namespace biasaudit
