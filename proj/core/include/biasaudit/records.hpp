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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/schemes.hpp"

namespace biasaudit {

enum class ModelOrigin { western, chinese, other };
enum class PromptLanguage { en, zh, other };

std::string_view to_string(ModelOrigin origin);
std::string_view to_string(PromptLanguage language);
std::optional<ModelOrigin> parse_origin(std::string_view text);
std::optional<PromptLanguage> parse_language(std::string_view text);

/// Labels and generation metadata of one generated image. Categorical fields
/// hold labels of the storage schemes (gender2, race5, age5, attract3,
/// emotion8).
struct AttributeRecord {
  std::string image_id;
  std::string model;
  ModelOrigin model_origin = ModelOrigin::other;
  std::string prompt_emotion;
  PromptLanguage prompt_language = PromptLanguage::en;
  std::string gender;
  std::string race;
  std::string age;
  std::optional<std::string> attractiveness;
  std::optional<std::map<std::string, double>> confidences;
  /// Fields the schema does not know, kept in input order.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  /// Stored label for an attribute; nullopt only for absent attractiveness.
  std::optional<std::string_view> value(AttributeKind kind) const;

  friend bool operator==(const AttributeRecord&, const AttributeRecord&) = default;
};

enum class RecordFormat { jsonl, csv };

struct Diagnostic {
  std::size_t line;
  std::string reason;
};

struct ParseResult {
  std::vector<AttributeRecord> records;
  std::vector<Diagnostic> diagnostics;
};

struct ParseOptions {
  /// Overrides extension-based detection.
  std::optional<RecordFormat> format;
  /// Any diagnostic becomes a fatal error.
  bool strict = false;
};

/// ".csv" selects CSV; everything else is read as JSONL.
RecordFormat detect_format(const std::filesystem::path& path);

/// Parses records, skipping malformed lines with a diagnostic. Accepted records
/// keep their input order. Throws Error in strict mode on the first diagnostic.
ParseResult parse_records(std::istream& in, RecordFormat format, bool strict = false);

/// Opens and parses a record file; throws IoError when it cannot be read.
ParseResult read_records(const std::filesystem::path& path, const ParseOptions& options = {});

/// Checks one record against the schema; returns the first violation.
std::optional<std::string> check_record(const AttributeRecord& record);

nlohmann::ordered_json to_json(const AttributeRecord& record);
void write_jsonl(std::ostream& out, std::span<const AttributeRecord> records);
void write_csv(std::ostream& out, std::span<const AttributeRecord> records);

/// Records matching every field present in the selector.
struct RecordSelector {
  std::optional<std::string> model;
  std::optional<ModelOrigin> model_origin;
  std::optional<std::string> prompt_emotion;
  std::optional<PromptLanguage> prompt_language;

  bool matches(const AttributeRecord& record) const;
};

std::vector<AttributeRecord> filter_records(std::span<const AttributeRecord> records,
                                            const RecordSelector& selector);

/// Relabels a single category through the map.
std::string aggregate(std::string_view value, const AggregationMap& map);
/// Relabels the mapped attribute of every record, in record order.
std::vector<std::string> aggregate(std::span<const AttributeRecord> records,
                                   const AggregationMap& map);

/// Distinct model names in first-appearance order.
std::vector<std::string> model_names(std::span<const AttributeRecord> records);

}  // namespace biasaudit
