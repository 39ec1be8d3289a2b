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

#include <string>
#include <string_view>
#include <vector>

namespace biasaudit::csv {

/// Splits one CSV line into fields. Handles double-quoted fields with
/// doubled-quote escapes; fields may not span lines.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// True when `bytes` is well-formed UTF-8.
bool valid_utf8(std::string_view bytes);

}  // namespace biasaudit::csv
