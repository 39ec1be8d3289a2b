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

#include "biasaudit/sampling.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {

double uniform53(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

CategoricalSampler::CategoricalSampler(std::span<const double> probs) {
  if (probs.empty()) throw Error("cannot sample from an empty distribution");
  cumulative_.reserve(probs.size());
  double acc = 0.0;
  for (double p : probs) cumulative_.push_back(acc += p);
}

std::size_t CategoricalSampler::operator()(std::mt19937_64& engine) const {
  const double u = uniform53(engine);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    // Rounding left the total a hair below u; take the last cell with mass.
    it = std::prev(cumulative_.end());
    while (it != cumulative_.begin() && *it == *std::prev(it)) --it;
  }
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::vector<AttributeRecord> sample_records(const Distribution& spec,
                                            const RecordTemplate& templ, std::size_t n,
                                            std::uint64_t seed) {
  if (n == 0) throw Error("sample size must be at least 1");
  if (!schemes::emotion8().contains(templ.prompt_emotion))
    throw Error(fmt::format("unknown category '{}' for emotion8", templ.prompt_emotion));
  if (templ.model.empty()) throw Error("record template needs a model name");

  const auto& scheme = spec.scheme();
  std::optional<std::size_t> gender, race, age, attract;
  for (std::size_t k = 0; k < scheme.rank(); ++k) {
    const auto& c = scheme.component(k);
    if (!(schemes::storage(c.kind()) == c))
      throw Error(fmt::format("spec component {} is not a stored taxonomy", c.name()));
    std::optional<std::size_t>* slot = nullptr;
    switch (c.kind()) {
      case AttributeKind::gender: slot = &gender; break;
      case AttributeKind::race: slot = &race; break;
      case AttributeKind::age: slot = &age; break;
      case AttributeKind::attractiveness: slot = &attract; break;
      case AttributeKind::emotion:
        throw Error("spec may not sample prompt_emotion; set it in the template");
    }
    if (slot->has_value()) throw Error(fmt::format("spec repeats attribute {}", c.name()));
    *slot = k;
  }
  if (!gender) throw Error("spec missing required attribute gender");
  if (!race) throw Error("spec missing required attribute race");
  if (!age) throw Error("spec missing required attribute age");

  const std::string prefix = templ.id_prefix.empty()
                                 ? fmt::format("{}-{}-", templ.model, templ.prompt_emotion)
                                 : templ.id_prefix;
  const auto width = std::max<std::size_t>(6, fmt::format("{}", n - 1).size());

  std::mt19937_64 engine(seed);
  CategoricalSampler sampler(spec.probs());
  std::vector<AttributeRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto labels = scheme.cell_labels(sampler(engine));
    AttributeRecord r;
    r.image_id = fmt::format("{}{:0{}}", prefix, i, width);
    r.model = templ.model;
    r.model_origin = templ.model_origin;
    r.prompt_emotion = templ.prompt_emotion;
    r.prompt_language = templ.prompt_language;
    r.gender = labels[*gender];
    r.race = labels[*race];
    r.age = labels[*age];
    if (attract) r.attractiveness = labels[*attract];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace biasaudit
