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

#include "biasaudit/records.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "biasaudit/csv.hpp"
#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kRequiredFields[] = {
    "image_id", "model", "model_origin", "prompt_emotion",
    "prompt_language", "gender", "race", "age"};
constexpr std::string_view kAllFields[] = {
    "image_id", "model", "model_origin", "prompt_emotion", "prompt_language",
    "gender", "race", "age", "attractiveness", "confidences"};

bool is_known_field(std::string_view key) {
  return std::find(std::begin(kAllFields), std::end(kAllFields), key) != std::end(kAllFields);
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

// Throws Error with the reason; the caller turns it into a diagnostic.
AttributeRecord record_from_fields(
    const std::map<std::string, std::string, std::less<>>& fields,
    std::optional<std::map<std::string, double>> confidences, Json extra) {
  AttributeRecord r;
  auto get = [&](std::string_view key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(fmt::format("missing field '{}'", key));
    return it->second;
  };
  r.image_id = get("image_id");
  r.model = get("model");
  const auto& origin = get("model_origin");
  auto o = parse_origin(origin);
  if (!o) throw Error(fmt::format("unknown model_origin '{}'", origin));
  r.model_origin = *o;
  r.prompt_emotion = get("prompt_emotion");
  const auto& language = get("prompt_language");
  auto l = parse_language(language);
  if (!l) throw Error(fmt::format("unknown prompt_language '{}'", language));
  r.prompt_language = *l;
  r.gender = get("gender");
  r.race = get("race");
  r.age = get("age");
  if (auto it = fields.find("attractiveness"); it != fields.end() && !it->second.empty())
    r.attractiveness = it->second;
  r.confidences = std::move(confidences);
  r.extra = std::move(extra);
  if (auto violation = check_record(r)) throw Error(*violation);
  return r;
}

AttributeRecord parse_json_line(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!j.is_object()) throw Error("record is not a JSON object");

  std::map<std::string, std::string, std::less<>> fields;
  std::optional<std::map<std::string, double>> confidences;
  Json extra = Json::object();
  for (auto& [key, value] : j.items()) {
    if (key == "confidences") {
      if (value.is_null()) continue;
      if (!value.is_object()) throw Error("field 'confidences' must be an object");
      std::map<std::string, double> conf;
      for (auto& [label, p] : value.items()) {
        if (!p.is_number()) throw Error(fmt::format("confidence for '{}' is not a number", label));
        conf[label] = p.get<double>();
      }
      confidences = std::move(conf);
    } else if (key == "attractiveness") {
      if (value.is_null()) continue;
      if (!value.is_string()) throw Error("field 'attractiveness' must be a string");
      fields[key] = value.get<std::string>();
    } else if (is_known_field(key)) {
      if (!value.is_string()) throw Error(fmt::format("field '{}' must be a string", key));
      fields[key] = value.get<std::string>();
    } else {
      extra[key] = value;
    }
  }
  return record_from_fields(fields, std::move(confidences), std::move(extra));
}

std::map<std::string, double> parse_confidence_cell(std::string_view cell) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos <= cell.size()) {
    auto end = cell.find(';', pos);
    if (end == std::string_view::npos) end = cell.size();
    auto item = cell.substr(pos, end - pos);
    auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw Error(fmt::format("confidence entry '{}' is not label:probability", item));
    std::string value(item.substr(colon + 1));
    std::size_t used = 0;
    double p = 0;
    try {
      p = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw Error(fmt::format("confidence entry '{}' has a bad probability", item));
    out[std::string(item.substr(0, colon))] = p;
    pos = end + 1;
  }
  return out;
}

class Collector {
 public:
  explicit Collector(bool strict) : strict_(strict) {}

  void accept(AttributeRecord r, std::size_t line) {
    auto key = std::make_pair(r.model, r.image_id);
    if (!seen_.insert(key).second) {
      reject(line, fmt::format("duplicate image_id '{}' for model '{}'", r.image_id, r.model));
      return;
    }
    result_.records.push_back(std::move(r));
  }

  void reject(std::size_t line, std::string reason) {
    if (strict_) throw Error(fmt::format("line {}: {}", line, reason));
    result_.diagnostics.push_back({line, std::move(reason)});
  }

  ParseResult take() { return std::move(result_); }

 private:
  bool strict_;
  ParseResult result_;
  std::set<std::pair<std::string, std::string>> seen_;
};

std::string format_confidences(const std::map<std::string, double>& conf) {
  std::string out;
  for (const auto& [label, p] : conf) {
    if (!out.empty()) out.push_back(';');
    out += fmt::format("{}:{}", label, p);
  }
  return out;
}

}  // namespace

std::string_view to_string(ModelOrigin origin) {
  switch (origin) {
    case ModelOrigin::western: return "western";
    case ModelOrigin::chinese: return "chinese";
    case ModelOrigin::other: return "other";
  }
  return "other";
}

std::string_view to_string(PromptLanguage language) {
  switch (language) {
    case PromptLanguage::en: return "en";
    case PromptLanguage::zh: return "zh";
    case PromptLanguage::other: return "other";
  }
  return "other";
}

std::optional<ModelOrigin> parse_origin(std::string_view text) {
  if (text == "western") return ModelOrigin::western;
  if (text == "chinese") return ModelOrigin::chinese;
  if (text == "other") return ModelOrigin::other;
  return std::nullopt;
}

std::optional<PromptLanguage> parse_language(std::string_view text) {
  if (text == "en") return PromptLanguage::en;
  if (text == "zh") return PromptLanguage::zh;
  if (text == "other") return PromptLanguage::other;
  return std::nullopt;
}

std::optional<std::string_view> AttributeRecord::value(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::gender: return gender;
    case AttributeKind::race: return race;
    case AttributeKind::age: return age;
    case AttributeKind::emotion: return prompt_emotion;
    case AttributeKind::attractiveness:
      if (attractiveness) return std::string_view(*attractiveness);
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> check_record(const AttributeRecord& r) {
  if (r.image_id.empty()) return "empty image_id";
  if (r.model.empty()) return "empty model";
  auto check = [](const CategoryScheme& s, const std::string& v) -> std::optional<std::string> {
    if (s.contains(v)) return std::nullopt;
    return fmt::format("unknown category '{}' for {}", v, s.name());
  };
  if (auto e = check(schemes::emotion8(), r.prompt_emotion)) return e;
  if (auto e = check(schemes::gender2(), r.gender)) return e;
  if (auto e = check(schemes::race5(), r.race)) return e;
  if (auto e = check(schemes::age5(), r.age)) return e;
  if (r.attractiveness)
    if (auto e = check(schemes::attract3(), *r.attractiveness)) return e;
  if (r.confidences)
    for (const auto& [label, p] : *r.confidences)
      if (!(p >= 0.0 && p <= 1.0))
        return fmt::format("confidence for '{}' outside [0, 1]", label);
  return std::nullopt;
}

RecordFormat detect_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? RecordFormat::csv : RecordFormat::jsonl;
}

ParseResult parse_records(std::istream& in, RecordFormat format, bool strict) {
  Collector collector(strict);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!csv::valid_utf8(line)) {
      collector.reject(line_no, "invalid UTF-8");
      if (format == RecordFormat::csv && header.empty())
        throw Error("CSV header is not valid UTF-8");
      continue;
    }
    if (format == RecordFormat::jsonl) {
      try {
        collector.accept(parse_json_line(line), line_no);
      } catch (const Error& e) {
        collector.reject(line_no, e.what());
      }
      continue;
    }

    if (header.empty()) {
      header = csv::split_line(line);
      for (auto field : kRequiredFields)
        if (std::find(header.begin(), header.end(), field) == header.end())
          throw Error(fmt::format("CSV header lacks column '{}'", field));
      continue;
    }
    try {
      auto cells = csv::split_line(line);
      if (cells.size() != header.size())
        throw Error(fmt::format("expected {} columns, found {}", header.size(), cells.size()));
      std::map<std::string, std::string, std::less<>> fields;
      std::optional<std::map<std::string, double>> confidences;
      Json extra = Json::object();
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "confidences") {
          if (!cells[i].empty()) confidences = parse_confidence_cell(cells[i]);
        } else if (is_known_field(header[i])) {
          fields[header[i]] = cells[i];
        } else {
          extra[header[i]] = cells[i];
        }
      }
      collector.accept(record_from_fields(fields, std::move(confidences), std::move(extra)),
                       line_no);
    } catch (const Error& e) {
      collector.reject(line_no, e.what());
    }
  }
  if (in.bad()) throw IoError("error while reading record stream");
  return collector.take();
}

ParseResult read_records(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open record file '{}'", path.string()));
  return parse_records(in, options.format.value_or(detect_format(path)), options.strict);
}

nlohmann::ordered_json to_json(const AttributeRecord& r) {
  Json j;
  j["image_id"] = r.image_id;
  j["model"] = r.model;
  j["model_origin"] = to_string(r.model_origin);
  j["prompt_emotion"] = r.prompt_emotion;
  j["prompt_language"] = to_string(r.prompt_language);
  j["gender"] = r.gender;
  j["race"] = r.race;
  j["age"] = r.age;
  if (r.attractiveness) j["attractiveness"] = *r.attractiveness;
  if (r.confidences) {
    Json conf = Json::object();
    for (const auto& [label, p] : *r.confidences) conf[label] = p;
    j["confidences"] = std::move(conf);
  }
  for (auto& [key, value] : r.extra.items()) j[key] = value;
  return j;
}

void write_jsonl(std::ostream& out, std::span<const AttributeRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_csv(std::ostream& out, std::span<const AttributeRecord> records) {
  std::vector<std::string> header(std::begin(kAllFields), std::end(kAllFields));
  std::vector<std::string> extra_keys;
  for (const auto& r : records)
    for (auto& [key, value] : r.extra.items())
      if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end())
        extra_keys.push_back(key);
  header.insert(header.end(), extra_keys.begin(), extra_keys.end());
  out << csv::join(header) << '\n';

  for (const auto& r : records) {
    std::vector<std::string> row = {
        r.image_id, r.model, std::string(to_string(r.model_origin)), r.prompt_emotion,
        std::string(to_string(r.prompt_language)), r.gender, r.race, r.age,
        r.attractiveness.value_or(""),
        r.confidences ? format_confidences(*r.confidences) : std::string()};
    for (const auto& key : extra_keys) {
      if (!r.extra.contains(key)) {
        row.emplace_back();
      } else if (const auto& v = r.extra.at(key); v.is_string()) {
        row.push_back(v.get<std::string>());
      } else {
        row.push_back(v.dump());
      }
    }
    out << csv::join(row) << '\n';
  }
}

bool RecordSelector::matches(const AttributeRecord& r) const {
  return (!model || r.model == *model) && (!model_origin || r.model_origin == *model_origin) &&
         (!prompt_emotion || r.prompt_emotion == *prompt_emotion) &&
         (!prompt_language || r.prompt_language == *prompt_language);
}

std::vector<AttributeRecord> filter_records(std::span<const AttributeRecord> records,
                                            const RecordSelector& selector) {
  std::vector<AttributeRecord> out;
  for (const auto& r : records)
    if (selector.matches(r)) out.push_back(r);
  return out;
}

std::string aggregate(std::string_view value, const AggregationMap& map) {
  return map.apply(value);
}

std::vector<std::string> aggregate(std::span<const AttributeRecord> records,
                                   const AggregationMap& map) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto v = r.value(map.source().kind());
    if (!v)
      throw Error(fmt::format("record '{}' has no {} value", r.image_id,
                              to_string(map.source().kind())));
    out.push_back(map.apply(*v));
  }
  return out;
}

std::vector<std::string> model_names(std::span<const AttributeRecord> records) {
  std::vector<std::string> names;
  std::set<std::string_view> seen;
  for (const auto& r : records)
    if (seen.insert(r.model).second) names.push_back(r.model);
  return names;
}

}  // namespace biasaudit
