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

#include "biasaudit/reference.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "biasaudit/csv.hpp"
#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kFractionTolerance = 1e-9;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text, std::string_view what, std::string_view country) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw Error(fmt::format("{} '{}' for {} is not a number", what, text, country));
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto end = s.find(sep, pos);
    auto piece = trim(s.substr(pos, end == std::string_view::npos ? end : end - pos));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

void check_fraction_sum(double total, std::string_view what, std::string_view country) {
  if (std::abs(total - 1.0) > kFractionTolerance)
    throw Error(fmt::format("{} sums to {:.12g} for {}", what, total, country));
}

std::vector<double> one_hot(std::string_view race) {
  std::vector<double> v(schemes::race5().size(), 0.0);
  v[schemes::race5().index_of(race)] = 1.0;
  return v;
}

std::vector<double> parse_breakdown(std::string_view text, std::string_view country) {
  std::vector<double> v(schemes::race5().size(), 0.0);
  for (const auto& item : split(text, ';')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error(fmt::format("breakdown entry '{}' for {} is not race:fraction", item, country));
    auto race = trim(std::string_view(item).substr(0, colon));
    double f = parse_number(trim(std::string_view(item).substr(colon + 1)), "fraction", country);
    if (f < 0.0) throw Error(fmt::format("negative breakdown fraction for {}", country));
    v[schemes::race5().index_of(race)] += f;
  }
  check_fraction_sum(std::accumulate(v.begin(), v.end(), 0.0), "breakdown", country);
  return v;
}

std::vector<const PopulationRow*> rows_for(const PopulationTable& table, std::string_view region) {
  std::vector<const PopulationRow*> out;
  for (const auto& row : table.rows)
    if (row.in_region(region)) out.push_back(&row);
  if (out.empty()) throw Error(fmt::format("no population rows for region '{}'", region));
  return out;
}

Distribution normalize_mass(const CategoryScheme& scheme, std::vector<double> mass,
                            std::string_view region) {
  double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) throw Error(fmt::format("region '{}' has zero total population", region));
  for (auto& m : mass) m /= total;
  return Distribution(JointScheme(scheme), std::move(mass));
}

std::vector<double> push_mass(const std::vector<double>& mass, const AggregationMap& map) {
  std::vector<double> out(map.target().size(), 0.0);
  for (std::size_t i = 0; i < mass.size(); ++i) out[map.apply(i)] += mass[i];
  return out;
}

std::string read_all(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} '{}'", what, path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool PopulationRow::in_region(std::string_view tag) const {
  return std::find(regions.begin(), regions.end(), tag) != regions.end();
}

bool PopulationTable::has_region(std::string_view tag) const {
  return std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.in_region(tag); });
}

CountryRaceMap load_country_race_map(std::istream& in) {
  CountryRaceMap map;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = csv::split_line(t);
    if (header) {
      if (cells.size() < 2 || trim(cells[0]) != "country" || trim(cells[1]) != "race")
        throw Error("country mapping header must be 'country,race'");
      header = false;
      continue;
    }
    if (cells.size() != 2)
      throw Error(fmt::format("country mapping line {}: expected 2 columns", line_no));
    auto country = trim(cells[0]);
    auto race = trim(cells[1]);
    schemes::race5().index_of(race);
    if (!map.emplace(country, race).second)
      throw Error(fmt::format("country mapping lists '{}' twice", country));
  }
  return map;
}

CountryRaceMap load_country_race_map(const std::filesystem::path& path) {
  std::istringstream in(read_all(path, "country mapping"));
  return load_country_race_map(in);
}

PopulationTable load_population_table(std::istream& in, std::string source,
                                      const CountryRaceMap* mapping) {
  PopulationTable table;
  table.source = std::move(source);
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;

  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  std::optional<std::size_t> c_country, c_pop, c_region, c_race, c_breakdown, c_male, c_female;
  std::array<std::optional<std::size_t>, 5> c_age;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = csv::split_line(line);
    for (auto& c : cells) c = trim(c);
    if (header.empty()) {
      header = cells;
      c_country = column("country");
      c_pop = column("population");
      c_region = column("region");
      c_race = column("race");
      c_breakdown = column("race_breakdown");
      c_male = column("male_frac");
      c_female = column("female_frac");
      const char* age_cols[] = {"age_0_9", "age_10_19", "age_20_39", "age_40_59", "age_60p"};
      for (std::size_t k = 0; k < 5; ++k) c_age[k] = column(age_cols[k]);
      if (!c_country || !c_pop || !c_region)
        throw Error("population table needs country, population and region columns");
      if (!c_race && !c_breakdown)
        throw Error("population table needs a race or race_breakdown column");
      continue;
    }
    if (cells.size() != header.size())
      throw Error(fmt::format("population table line {}: expected {} columns, found {}", line_no,
                              header.size(), cells.size()));
    auto cell = [&](const std::optional<std::size_t>& c) -> const std::string& {
      static const std::string empty;
      return c ? cells[*c] : empty;
    };

    PopulationRow row;
    row.country = cell(c_country);
    if (row.country.empty())
      throw Error(fmt::format("population table line {}: empty country", line_no));
    row.population = parse_number(cell(c_pop), "population", row.country);
    if (row.population < 0.0)
      throw Error(fmt::format("negative population for {}", row.country));
    row.regions = split(cell(c_region), ';');

    const auto& race = cell(c_race);
    const auto& breakdown = cell(c_breakdown);
    if (!race.empty() && !breakdown.empty())
      throw Error(fmt::format("{} sets both race and race_breakdown", row.country));
    if (!race.empty()) {
      row.race_fractions = one_hot(race);
    } else if (!breakdown.empty()) {
      row.race_fractions = parse_breakdown(breakdown, row.country);
      row.race_breakdown = true;
    } else if (mapping != nullptr) {
      if (auto it = mapping->find(row.country); it != mapping->end())
        row.race_fractions = one_hot(it->second);
    }
    if (row.race_fractions.empty())
      table.warnings.push_back(
          fmt::format("unmapped country '{}' excluded from race references", row.country));

    const auto& male = cell(c_male);
    const auto& female = cell(c_female);
    if (!male.empty() || !female.empty()) {
      if (male.empty() || female.empty())
        throw Error(fmt::format("{} needs both male_frac and female_frac", row.country));
      std::array<double, 2> g{parse_number(male, "male_frac", row.country),
                              parse_number(female, "female_frac", row.country)};
      if (g[0] < 0.0 || g[1] < 0.0)
        throw Error(fmt::format("negative gender fraction for {}", row.country));
      check_fraction_sum(g[0] + g[1], "gender split", row.country);
      row.gender_split = g;
    }

    std::size_t age_cells = 0;
    for (const auto& c : c_age) age_cells += cell(c).empty() ? 0 : 1;
    if (age_cells == 5) {
      std::array<double, 5> a{};
      for (std::size_t k = 0; k < 5; ++k) {
        a[k] = parse_number(cell(c_age[k]), "age fraction", row.country);
        if (a[k] < 0.0) throw Error(fmt::format("negative age fraction for {}", row.country));
      }
      check_fraction_sum(std::accumulate(a.begin(), a.end(), 0.0), "age profile", row.country);
      row.age_profile = a;
    } else if (age_cells != 0) {
      throw Error(fmt::format("{} has a partial age profile", row.country));
    }
    table.rows.push_back(std::move(row));
  }
  if (header.empty()) throw Error("population table is empty");
  return table;
}

PopulationTable load_population_table(const std::filesystem::path& path,
                                      const CountryRaceMap* mapping) {
  auto bytes = read_all(path, "population table");
  std::istringstream in(bytes);
  auto table = load_population_table(in, path.filename().string(), mapping);
  table.content_hash = fnv1a_hex(bytes);
  return table;
}

Distribution build_race_reference(const PopulationTable& table, const CategoryScheme& target,
                                  std::string_view region) {
  if (target.kind() != AttributeKind::race)
    throw Error(fmt::format("{} is not a race scheme", target.name()));
  std::vector<double> mass(schemes::race5().size(), 0.0);
  for (const auto* row : rows_for(table, region)) {
    if (row->race_fractions.empty()) continue;
    for (std::size_t i = 0; i < mass.size(); ++i)
      if (row->race_fractions[i] != 0.0) mass[i] += row->population * row->race_fractions[i];
  }
  if (target == schemes::race5()) return normalize_mass(target, std::move(mass), region);
  auto view = resolve_attribute(target);
  return normalize_mass(target, push_mass(mass, *view.aggregation), region);
}

Distribution build_attribute_reference(const PopulationTable& table,
                                       const CategoryScheme& target, std::string_view region) {
  const bool gender = target == schemes::gender2();
  const bool age = target == schemes::age5() || target == schemes::age3();
  if (!gender && !age)
    throw Error(fmt::format("no population-table reference for {}", target.name()));

  std::vector<double> mass(gender ? 2 : 5, 0.0);
  std::vector<std::string> missing;
  for (const auto* row : rows_for(table, region)) {
    if (row->population == 0.0) continue;
    if (gender) {
      if (!row->gender_split) {
        missing.push_back(row->country);
        continue;
      }
      for (std::size_t i = 0; i < 2; ++i) mass[i] += row->population * (*row->gender_split)[i];
    } else {
      if (!row->age_profile) {
        missing.push_back(row->country);
        continue;
      }
      for (std::size_t i = 0; i < 5; ++i) mass[i] += row->population * (*row->age_profile)[i];
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& c : missing) list += (list.empty() ? "" : ", ") + c;
    throw Error(fmt::format("missing {} data for: {}", gender ? "gender" : "age", list));
  }
  if (target == schemes::age3())
    return normalize_mass(target, push_mass(mass, aggregations::age5_to_age3()), region);
  return normalize_mass(target, std::move(mass), region);
}

Distribution build_reference(const PopulationTable& table, const CategoryScheme& target,
                             std::string_view region) {
  if (target.kind() == AttributeKind::race) return build_race_reference(table, target, region);
  return build_attribute_reference(table, target, region);
}

std::map<std::string, Distribution> neutral_baseline(std::span<const AttributeRecord> records,
                                                     std::string_view model,
                                                     std::string_view baseline_emotion) {
  RecordSelector by_model{std::string(model), std::nullopt, std::nullopt, std::nullopt};
  auto model_records = filter_records(records, by_model);
  if (model_records.empty())
    throw Error(fmt::format("model '{}' not found in records", model));
  RecordSelector by_emotion{std::nullopt, std::nullopt, std::string(baseline_emotion),
                            std::nullopt};
  auto baseline = filter_records(model_records, by_emotion);
  if (baseline.empty())
    throw Error(fmt::format("model '{}' has no '{}' records", model, baseline_emotion));

  std::map<std::string, Distribution> out;
  for (const auto* s : {&schemes::gender2(), &schemes::race4(), &schemes::age5(), &schemes::age3()})
    out.emplace(s->name(), estimate_marginal(baseline, *s));
  bool attract = std::any_of(baseline.begin(), baseline.end(),
                             [](const auto& r) { return r.attractiveness.has_value(); });
  if (attract) out.emplace("attract3", estimate_marginal(baseline, schemes::attract3()));
  return out;
}

void ReferenceSet::add(std::string region, Distribution dist) {
  auto name = dist.scheme().name();
  auto& bucket = entries_[std::move(region)];
  bucket.erase(name);
  bucket.emplace(std::move(name), std::move(dist));
}

const Distribution* ReferenceSet::find(std::string_view region, std::string_view scheme) const {
  auto r = entries_.find(region);
  if (r == entries_.end()) return nullptr;
  auto s = r->second.find(scheme);
  return s == r->second.end() ? nullptr : &s->second;
}

const Distribution& ReferenceSet::get(std::string_view region, std::string_view scheme) const {
  if (const auto* d = find(region, scheme)) return *d;
  throw Error(fmt::format("reference set lacks {} for region '{}'", scheme, region));
}

std::vector<std::string> ReferenceSet::regions() const {
  std::vector<std::string> out;
  for (const auto& [region, _] : entries_) out.push_back(region);
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

nlohmann::ordered_json to_json(const ReferenceSet& set) {
  Json prov;
  prov["source"] = set.provenance().source;
  prov["content_hash"] = set.provenance().content_hash;
  if (set.provenance().built_at) prov["built_at"] = *set.provenance().built_at;
  Json refs = Json::object();
  for (const auto& [region, bucket] : set.entries()) {
    Json r = Json::object();
    for (const auto& [scheme, dist] : bucket) r[scheme] = to_json(dist);
    refs[region] = std::move(r);
  }
  Json j;
  j["provenance"] = std::move(prov);
  j["references"] = std::move(refs);
  return j;
}

ReferenceSet reference_set_from_json(const nlohmann::ordered_json& j) {
  try {
    Provenance prov;
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      prov.source = p.value("source", "");
      prov.content_hash = p.value("content_hash", "");
      if (p.contains("built_at")) prov.built_at = p.at("built_at").get<std::string>();
    }
    ReferenceSet set(std::move(prov));
    for (auto& [region, bucket] : j.at("references").items()) {
      for (auto& [scheme, dist] : bucket.items()) {
        auto d = distribution_from_json(dist);
        if (d.scheme().name() != scheme)
          throw Error(fmt::format("reference {}/{} holds a {} distribution", region, scheme,
                                  d.scheme().name()));
        set.add(region, std::move(d));
      }
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed reference set: {}", e.what()));
  }
}

ReferenceSet read_reference_set(const std::filesystem::path& path) {
  auto bytes = read_all(path, "reference set");
  Json j;
  try {
    j = Json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("reference set '{}' is not JSON: {}", path.string(), e.what()));
  }
  return reference_set_from_json(j);
}

}  // namespace biasaudit
