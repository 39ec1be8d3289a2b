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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/distribution.hpp"
#include "biasaudit/records.hpp"

namespace biasaudit {

/// Metadata stamped on every sampled record.
struct RecordTemplate {
  std::string model = "synthetic";
  ModelOrigin model_origin = ModelOrigin::other;
  std::string prompt_emotion = "neutral";
  PromptLanguage prompt_language = PromptLanguage::en;
  /// Defaults to "<model>-<emotion>-".
  std::string id_prefix;
};

/// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 output.
/// Both steps are fully specified, so streams agree across platforms.
double uniform53(std::mt19937_64& engine);

/// Inverse-CDF draws over a fixed probability vector.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> probs);
  std::size_t operator()(std::mt19937_64& engine) const;

 private:
  std::vector<double> cumulative_;
};

/// Draws `n` i.i.d. records from a joint spec whose components are storage
/// schemes covering gender2, race5 and age5 (attract3 optional). Output is a
/// pure function of (spec, template, n, seed).
std::vector<AttributeRecord> sample_records(const Distribution& spec,
                                            const RecordTemplate& templ, std::size_t n,
                                            std::uint64_t seed);

}  // namespace biasaudit
