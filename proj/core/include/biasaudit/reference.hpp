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

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/distribution.hpp"
#include "biasaudit/records.hpp"

namespace biasaudit {

struct PopulationRow {
  std::string country;
  double population = 0.0;
  std::vector<std::string> regions;
  /// Fractions over race5. One-hot for single-race rows; empty while the
  /// country is still unmapped.
  std::vector<double> race_fractions;
  bool race_breakdown = false;
  std::optional<std::array<double, 2>> gender_split;
  std::optional<std::array<double, 5>> age_profile;

  bool in_region(std::string_view tag) const;
};

struct PopulationTable {
  std::vector<PopulationRow> rows;
  std::string source;
  std::string content_hash;
  std::vector<std::string> warnings;

  bool has_region(std::string_view tag) const;
};

/// country -> race5 label.
using CountryRaceMap = std::map<std::string, std::string, std::less<>>;

/// Reads `country,race` CSV rows (header required, '#' lines ignored).
CountryRaceMap load_country_race_map(std::istream& in);
CountryRaceMap load_country_race_map(const std::filesystem::path& path);

/// Parses the population CSV:
/// country,population,region,race,race_breakdown,male_frac,female_frac,
/// age_0_9,age_10_19,age_20_39,age_40_59,age_60p
/// `region` holds ';'-separated tags. Rows leaving both race columns empty
/// are resolved through `mapping`; countries it lacks stay unmapped and are
/// excluded from race references with a warning.
PopulationTable load_population_table(std::istream& in, std::string source = "<stream>",
                                      const CountryRaceMap* mapping = nullptr);
PopulationTable load_population_table(const std::filesystem::path& path,
                                      const CountryRaceMap* mapping = nullptr);

/// Population-weighted race distribution for a region over race5 or race4.
Distribution build_race_reference(const PopulationTable& table, const CategoryScheme& target,
                                  std::string_view region);

/// Population-weighted gender2, age5 or age3 distribution for a region.
Distribution build_attribute_reference(const PopulationTable& table,
                                       const CategoryScheme& target, std::string_view region);

/// Dispatches to the race or attribute builder by scheme kind.
Distribution build_reference(const PopulationTable& table, const CategoryScheme& target,
                             std::string_view region);

/// Marginals of one model's baseline-prompt records: gender2, race4, age5,
/// age3, plus attract3 when any record carries attractiveness. Keyed by
/// scheme name.
std::map<std::string, Distribution> neutral_baseline(std::span<const AttributeRecord> records,
                                                     std::string_view model,
                                                     std::string_view baseline_emotion = "neutral");

struct Provenance {
  std::string source;
  /// FNV-1a 64 of the source bytes, hex.
  std::string content_hash;
  /// Only stamped on request so rebuilds stay byte-identical.
  std::optional<std::string> built_at;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Reference distributions keyed by region tag and scheme name.
class ReferenceSet {
 public:
  ReferenceSet() = default;
  explicit ReferenceSet(Provenance provenance) : provenance_(std::move(provenance)) {}

  void add(std::string region, Distribution dist);
  const Distribution* find(std::string_view region, std::string_view scheme) const;
  /// Throws naming the missing (region, scheme).
  const Distribution& get(std::string_view region, std::string_view scheme) const;
  std::vector<std::string> regions() const;

  const Provenance& provenance() const { return provenance_; }
  const std::map<std::string, std::map<std::string, Distribution, std::less<>>, std::less<>>&
  entries() const {
    return entries_;
  }

  friend bool operator==(const ReferenceSet&, const ReferenceSet&) = default;

 private:
  Provenance provenance_;
  std::map<std::string, std::map<std::string, Distribution, std::less<>>, std::less<>> entries_;
};

std::string fnv1a_hex(std::string_view bytes);

nlohmann::ordered_json to_json(const ReferenceSet& set);
ReferenceSet reference_set_from_json(const nlohmann::ordered_json& j);
ReferenceSet read_reference_set(const std::filesystem::path& path);

}  // namespace biasaudit
