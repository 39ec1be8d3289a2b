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

#include "biasaudit/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_positive(std::string_view key, std::string_view value) {
  std::string text(value);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !(v > 0.0))
    throw Error(fmt::format("{} must be a positive number, got '{}'", key, value));
  return v;
}

}  // namespace

void AuditConfig::validate() const {
  if (attributes.empty()) throw Error("config lists no attributes");
  if (joint_components.empty()) throw Error("joint_components must not be empty");
  if (top_k < 1) throw Error("top_k must be at least 1");
  if (!schemes::emotion8().contains(baseline_emotion))
    throw Error(fmt::format("unknown category '{}' for emotion8", baseline_emotion));
  if (reference_region.empty()) throw Error("reference_region must not be empty");
  smoothing.validate();
  for (const auto& s : attributes) resolve_attribute(s);
  for (const auto& s : joint_components) resolve_attribute(s);
  for (std::size_t i = 0; i < joint_components.size(); ++i)
    for (std::size_t k = i + 1; k < joint_components.size(); ++k)
      if (joint_components[i].kind() == joint_components[k].kind())
        throw Error(fmt::format("joint components {} and {} describe the same attribute",
                                joint_components[i].name(), joint_components[k].name()));
}

std::vector<CategoryScheme> parse_scheme_list(std::string_view text) {
  std::vector<CategoryScheme> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto name = trim(text.substr(pos, end - pos));
    if (!name.empty()) {
      const auto& s = schemes::by_name(name);
      if (s.kind() == AttributeKind::emotion)
        throw Error("emotion8 is a prompt condition, not an audited attribute");
      out.push_back(s);
    }
    pos = end + 1;
  }
  if (out.empty()) throw Error("empty scheme list");
  return out;
}

void apply_setting(AuditConfig& config, std::string_view key, std::string_view value) {
  if (key == "attributes") {
    config.attributes = parse_scheme_list(value);
  } else if (key == "joint_components") {
    config.joint_components = parse_scheme_list(value);
  } else if (key == "log_base") {
    config.log_base = parse_log_base(value);
  } else if (key == "smoothing") {
    config.smoothing.kind = parse_smoothing_kind(value);
  } else if (key == "epsilon") {
    config.smoothing.epsilon = parse_positive(key, value);
  } else if (key == "alpha") {
    config.smoothing.alpha = parse_positive(key, value);
  } else if (key == "baseline_emotion") {
    config.baseline_emotion = std::string(value);
  } else if (key == "reference_region") {
    config.reference_region = std::string(value);
  } else if (key == "group_by_origin") {
    if (value == "true" || value == "1" || value == "yes") {
      config.group_by_origin = true;
    } else if (value == "false" || value == "0" || value == "no") {
      config.group_by_origin = false;
    } else {
      throw Error(fmt::format("group_by_origin must be true or false, got '{}'", value));
    }
  } else if (key == "top_k") {
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), k);
    if (ec != std::errc() || ptr != value.data() + value.size() || k < 1)
      throw Error(fmt::format("top_k must be a positive integer, got '{}'", value));
    config.top_k = k;
  } else {
    throw Error(fmt::format("unknown config key '{}'", key));
  }
}

AuditConfig parse_audit_config(std::istream& in, AuditConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(fmt::format("config line {}: expected key = value", line_no));
    try {
      apply_setting(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  base.validate();
  return base;
}

AuditConfig load_audit_config(const std::filesystem::path& path, AuditConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  return parse_audit_config(in, std::move(base));
}

}  // namespace biasaudit
