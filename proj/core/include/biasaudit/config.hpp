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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/distribution.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/schemes.hpp"

namespace biasaudit {

/// Knobs shared by every audit pipeline. Defaults reproduce the study setup:
/// marginals over gender2/race4/age5, joints over gender2 x race4 x age3,
/// base-two logs, epsilon-floored KL denominators and a neutral baseline.
struct AuditConfig {
  std::vector<CategoryScheme> attributes{schemes::gender2(), schemes::race4(), schemes::age5()};
  std::vector<CategoryScheme> joint_components{schemes::gender2(), schemes::race4(),
                                               schemes::age3()};
  LogBase log_base = LogBase::two;
  SmoothingPolicy smoothing = SmoothingPolicy::epsilon_floor(1e-6);
  std::string baseline_emotion = "neutral";
  std::string reference_region = "world";
  bool group_by_origin = true;
  std::size_t top_k = 10;

  void validate() const;
};

/// Applies one `key = value` setting; throws on unknown keys or bad values.
///   attributes        comma list of scheme names
///   joint_components  comma list of scheme names
///   log_base          two | natural
///   smoothing         none | epsilon_floor | additive
///   epsilon, alpha    smoothing parameters
///   baseline_emotion  emotion8 label
///   reference_region  region tag
///   group_by_origin   true | false
///   top_k             positive integer
void apply_setting(AuditConfig& config, std::string_view key, std::string_view value);

/// Flat key/value text: one `key = value` per line, '#' starts a comment.
AuditConfig parse_audit_config(std::istream& in, AuditConfig base = {});
AuditConfig load_audit_config(const std::filesystem::path& path, AuditConfig base = {});

std::vector<CategoryScheme> parse_scheme_list(std::string_view text);

}  // namespace biasaudit
