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

#include <sstream>

#include <gtest/gtest.h>

#include "biasaudit/error.hpp"
#include "biasaudit/reference.hpp"
#include "test_support.hpp"

using namespace biasaudit;
using testing_support::make_record;

namespace {

const char* kHeader =
    "country,population,region,race,race_breakdown,male_frac,female_frac,"
    "age_0_9,age_10_19,age_20_39,age_40_59,age_60p\n";

PopulationTable table(const std::string& body, const CountryRaceMap* mapping = nullptr) {
  std::istringstream in(kHeader + body);
  return load_population_table(in, "toy.csv", mapping);
}

const std::string kToy =
    "A,1000,world;europe,white,,0.4,0.6,0.1,0.1,0.4,0.2,0.2\n"
    "B,3000,world;asia,asian,,0.6,0.4,0.2,0.2,0.3,0.2,0.1\n"
    "C,1000,world,black,,0.5,0.5,0.3,0.2,0.3,0.1,0.1\n";

std::vector<double> probs(const Distribution& d) { return {d.probs().begin(), d.probs().end()}; }

void expect_probs(const Distribution& d, const std::vector<double>& expected) {
  ASSERT_EQ(d.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(d[i], expected[i], 1e-12) << i;
}

}  // namespace

TEST(PopulationTable, ParsesRows) {
  auto t = table(kToy + "D,1000,world,,white:0.6;black:0.4,,,,,,,\n");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].regions, (std::vector<std::string>{"world", "europe"}));
  EXPECT_FALSE(t.rows[0].race_breakdown);
  EXPECT_TRUE(t.rows[3].race_breakdown);
  EXPECT_EQ(t.rows[3].race_fractions, (std::vector<double>{0.6, 0.4, 0, 0, 0}));
  EXPECT_FALSE(t.rows[3].gender_split.has_value());
  EXPECT_TRUE(t.has_region("asia"));
  EXPECT_FALSE(t.has_region("china"));
}

TEST(PopulationTable, Errors) {
  try {
    table("X,1000,world,,white:0.6;black:0.3,,,,,,,\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "breakdown sums to 0.9 for X");
  }
  EXPECT_THROW(table("X,-5,world,white,,,,,,,,\n"), Error);
  EXPECT_THROW(table("X,1000,world,white,white:1,,,,,,,\n"), Error);
  EXPECT_THROW(table("X,1000,world,purple,,,,,,,,\n"), Error);
  EXPECT_THROW(table("X,1000,world,white,,0.5,,,,,,\n"), Error);
  EXPECT_THROW(table("X,1000,world,white,,,,0.5,0.5,,,\n"), Error);
  EXPECT_THROW(table("X,lots,world,white,,,,,,,,\n"), Error);
  EXPECT_THROW(table("X,1000,world\n"), Error);
  std::istringstream no_race("country,population,region\nX,1,world\n");
  EXPECT_THROW(load_population_table(no_race), Error);
  EXPECT_THROW(load_population_table(std::filesystem::path("/nonexistent/pop.csv")), IoError);
}

TEST(RaceReference, ToyTable) {
  auto t = table(kToy);
  expect_probs(build_race_reference(t, schemes::race5(), "world"), {0.2, 0.2, 0.6, 0.0, 0.0});
  expect_probs(build_race_reference(t, schemes::race4(), "world"), {0.2, 0.2, 0.6, 0.0});
  expect_probs(build_race_reference(t, schemes::race5(), "europe"), {1, 0, 0, 0, 0});
  try {
    build_race_reference(t, schemes::race5(), "china");
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no population rows for region 'china'");
  }
}

TEST(RaceReference, Breakdown) {
  auto t = table(kToy + "D,1000,world,,white:0.6;black:0.4,,,,,,,\n");
  auto r = build_race_reference(t, schemes::race5(), "world");
  EXPECT_NEAR(r[0], 1600.0 / 6000.0, 1e-12);
  EXPECT_NEAR(r[1], 1400.0 / 6000.0, 1e-12);
  EXPECT_NEAR(r[2], 3000.0 / 6000.0, 1e-12);
}

TEST(RaceReference, ZeroPopulationRowChangesNothing) {
  auto base = table(kToy);
  auto grown = table(kToy + "Z,0,world;asia,indian,,0.9,0.1,1,0,0,0,0\n");
  for (const auto* s : {&schemes::race5(), &schemes::race4(), &schemes::gender2(),
                        &schemes::age5(), &schemes::age3()})
    for (const char* region : {"world", "asia"})
      EXPECT_EQ(probs(build_reference(base, *s, region)), probs(build_reference(grown, *s, region)))
          << s->name() << " " << region;
}

TEST(RaceReference, UnmappedCountriesAreExcluded) {
  CountryRaceMap mapping{{"A", "white"}, {"B", "asian"}};
  auto t = table("A,1000,world,,,,,,,,,\nB,3000,world,,,,,,,,,\nQ,5000,world,,,,,,,,,\n", &mapping);
  ASSERT_EQ(t.warnings.size(), 1u);
  EXPECT_EQ(t.warnings[0], "unmapped country 'Q' excluded from race references");
  expect_probs(build_race_reference(t, schemes::race5(), "world"), {0.25, 0, 0.75, 0, 0});
}

TEST(RaceReference, ExplicitRaceWinsOverMapping) {
  CountryRaceMap mapping{{"A", "black"}};
  auto t = table("A,1000,world,white,,,,,,,,\n", &mapping);
  expect_probs(build_race_reference(t, schemes::race5(), "world"), {1, 0, 0, 0, 0});
}

TEST(CountryRaceMap, BundledFileLoads) {
  auto map = load_country_race_map(testing_support::test_dir().parent_path() / "data" /
                                   "country_race.csv");
  EXPECT_GT(map.size(), 50u);
  EXPECT_EQ(map.at("China"), "asian");
  EXPECT_EQ(map.at("India"), "indian");
  EXPECT_EQ(map.at("Nigeria"), "black");
  EXPECT_EQ(map.at("Brazil"), "latino");
  EXPECT_EQ(map.at("Germany"), "white");
  std::istringstream dup("country,race\nA,white\nA,black\n");
  EXPECT_THROW(load_country_race_map(dup), Error);
  std::istringstream bad("country,race\nA,purple\n");
  EXPECT_THROW(load_country_race_map(bad), Error);
}

TEST(AttributeReference, WeightedMean) {
  auto t = table("A,1000,world,white,,0.4,0.6,,,,,\nB,3000,world,white,,0.6,0.4,,,,,\n");
  auto g = build_attribute_reference(t, schemes::gender2(), "world");
  EXPECT_NEAR(g[0], 0.55, 1e-12);
  EXPECT_NEAR(g[1], 0.45, 1e-12);

  auto same = table("A,1000,world,white,,0.5,0.5,,,,,\nB,1000,world,white,,0.5,0.5,,,,,\n");
  expect_probs(build_attribute_reference(same, schemes::gender2(), "world"), {0.5, 0.5});
}

TEST(AttributeReference, AgeProfilesAndAggregation) {
  auto t = table(kToy);
  expect_probs(build_attribute_reference(t, schemes::age5(), "europe"), {0.1, 0.1, 0.4, 0.2, 0.2});
  auto age5 = build_attribute_reference(t, schemes::age5(), "world");
  expect_probs(age5, {0.2, 0.18, 0.32, 0.18, 0.12});
  expect_probs(build_attribute_reference(t, schemes::age3(), "world"), {0.7, 0.18, 0.12});
}

TEST(AttributeReference, MissingColumnsListCountries) {
  auto t = table(kToy + "D,10,world,white,,,,,,,,\nE,10,world,white,,,,,,,,\n");
  try {
    build_attribute_reference(t, schemes::gender2(), "world");
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "missing gender data for: D, E");
  }
  EXPECT_THROW(build_attribute_reference(t, schemes::attract3(), "world"), Error);
}

TEST(NeutralBaseline, RestrictsToModelAndEmotion) {
  std::vector<AttributeRecord> records;
  for (int i = 0; i < 100; ++i)
    records.push_back(make_record("n" + std::to_string(i), i % 3 ? "male" : "female",
                                  i % 2 ? "white" : "latino", i % 5 ? "20-39" : "60+"));
  for (int i = 0; i < 30; ++i)
    records.push_back(make_record("h" + std::to_string(i), "female", "asian", "0-9", "flux", "happy"));
  for (int i = 0; i < 30; ++i)
    records.push_back(make_record("k" + std::to_string(i), "female", "asian", "0-9", "kolors"));

  auto base = neutral_baseline(records, "flux");
  for (const char* s : {"gender2", "race4", "age5", "age3"}) {
    ASSERT_TRUE(base.count(s)) << s;
    EXPECT_EQ(base.at(s).sample_size(), 100u);
  }
  EXPECT_FALSE(base.count("attract3"));

  std::vector<AttributeRecord> flux_neutral(records.begin(), records.begin() + 100);
  std::vector<CategoryScheme> comps{schemes::gender2(), schemes::race4(), schemes::age5()};
  auto joint = estimate_joint(flux_neutral, comps);
  EXPECT_EQ(*marginalize(joint, 0).counts(), *base.at("gender2").counts());
  EXPECT_EQ(*marginalize(joint, 1).counts(), *base.at("race4").counts());
  EXPECT_EQ(*marginalize(joint, 2).counts(), *base.at("age5").counts());

  try {
    neutral_baseline(records, "sd35");
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "model 'sd35' not found in records");
  }
  EXPECT_THROW(neutral_baseline(records, "flux", "angry"), Error);
}

TEST(NeutralBaseline, IncludesAttractivenessWhenRated) {
  std::vector<AttributeRecord> records{make_record("a", "male", "white", "0-9"),
                                       make_record("b", "male", "white", "0-9")};
  records[0].attractiveness = "low";
  auto base = neutral_baseline(records, "flux");
  ASSERT_TRUE(base.count("attract3"));
  EXPECT_EQ(base.at("attract3").sample_size(), 1u);
}

TEST(ReferenceSet, LookupAndRoundTrip) {
  auto t = table(kToy + "D,1000,world,,white:0.6;black:0.4,0.5,0.5,0.2,0.2,0.2,0.2,0.2\n");
  ReferenceSet set(Provenance{"toy.csv", fnv1a_hex("abc"), std::nullopt});
  for (const char* region : {"world", "asia"})
    for (const auto* s : {&schemes::race5(), &schemes::race4(), &schemes::age3()})
      set.add(region, build_reference(t, *s, region));
  EXPECT_EQ(set.regions(), (std::vector<std::string>{"asia", "world"}));
  EXPECT_NE(set.find("world", "race4"), nullptr);
  EXPECT_EQ(set.find("world", "gender2"), nullptr);
  try {
    set.get("europe", "race4");
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "reference set lacks race4 for region 'europe'");
  }
  EXPECT_EQ(reference_set_from_json(to_json(set)), set);
  EXPECT_EQ(to_json(reference_set_from_json(to_json(set))).dump(), to_json(set).dump());
}

TEST(ReferenceSet, DeterministicRebuild) {
  auto dir = testing_support::scratch("reference");
  auto path = dir / "pop.csv";
  {
    std::ofstream out(path);
    out << kHeader << kToy;
  }
  auto a = load_population_table(path);
  auto b = load_population_table(path);
  EXPECT_EQ(a.content_hash, b.content_hash);
  EXPECT_EQ(a.source, "pop.csv");
  EXPECT_EQ(probs(build_reference(a, schemes::race4(), "world")),
            probs(build_reference(b, schemes::race4(), "world")));
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
