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

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "biasaudit/audit.hpp"

namespace biasaudit {

nlohmann::ordered_json to_json(const SmoothingPolicy& policy);
SmoothingPolicy smoothing_from_json(const nlohmann::ordered_json& j);

/// Full-precision report; report_from_json(to_json(r)) == r.
nlohmann::ordered_json to_json(const DivergenceReport& report);
DivergenceReport report_from_json(const nlohmann::ordered_json& j);
DivergenceReport read_report(const std::filesystem::path& path);

/// Human tables. Divergences use 2 decimals, probabilities 4. Worst values
/// are bold, best values italic.
std::string format_markdown(const DivergenceReport& report);

/// One line per report row, full precision.
std::string format_csv(const DivergenceReport& report);

/// Per-category emotion shifts, model entries then group means.
std::string format_shifts_csv(const DivergenceReport& report);

/// Ranked joint-cell shifts of a comparison.
std::string format_top_shifts_csv(const DivergenceReport& report);

/// model,origin,emotion,reference,attribute,metric,value. Emotion reports are
/// sorted by the computed emotion ordering.
std::string format_plot_csv(const DivergenceReport& report);

}  // namespace biasaudit
