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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "biasaudit/report.hpp"
#include "commands.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace biasaudit;
using testing_support::fixture;
using testing_support::golden;
using testing_support::slurp;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

const char* kPopulation =
    "country,population,region,race,race_breakdown,male_frac,female_frac,"
    "age_0_9,age_10_19,age_20_39,age_40_59,age_60p\n"
    "A,1000,world,white,,0.4,0.6,0.1,0.1,0.4,0.2,0.2\n"
    "B,3000,world,asian,,0.6,0.4,0.2,0.2,0.3,0.2,0.1\n"
    "C,1000,world,black,,0.5,0.5,0.3,0.2,0.3,0.1,0.1\n";

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  auto help = run({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  for (const char* sub : {"ingest", "reference", "audit", "compare", "validate", "simulate", "report"})
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"audit", "--records", "x.jsonl"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--spec", "s.json", "--n", "0", "--seed", "1", "--out", "o.jsonl"}).code,
            cli::kExitUsage);
}

TEST(Cli, SimulateMatchesGolden) {
  auto dir = testing_support::scratch("cli-simulate");
  auto out = (dir / "happy.jsonl").string();
  auto r = run({"simulate", "--spec", fixture("simulate_spec.json").string(), "--n", "25", "--seed",
                "42", "--model", "flux", "--origin", "western", "--emotion", "happy", "--out", out});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(slurp(out), slurp(golden("simulate_n25_seed42.jsonl")));

  auto again = (dir / "again.jsonl").string();
  run({"simulate", "--spec", fixture("simulate_spec.json").string(), "--n", "25", "--seed", "42",
       "--model", "flux", "--origin", "western", "--emotion", "happy", "--out", again});
  EXPECT_EQ(slurp(again), slurp(out));
}

TEST(Cli, SimulateRejectsBadSpec) {
  auto dir = testing_support::scratch("cli-badspec");
  write(dir / "spec.json", R"({"scheme":["gender2","race5","age5"],"probs":[)" +
                               [] {
                                 std::string s;
                                 for (int i = 0; i < 50; ++i) s += (i ? ",0.018" : "0.018");
                                 return s;
                               }() +
                               "]}");
  auto r = run({"simulate", "--spec", (dir / "spec.json").string(), "--n", "5", "--seed", "1",
                "--out", (dir / "o.jsonl").string()});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("0.9"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "o.jsonl"));
  EXPECT_EQ(run({"simulate", "--spec", (dir / "missing.json").string(), "--n", "5", "--seed", "1",
                 "--out", (dir / "o.jsonl").string()})
                .code,
            cli::kExitUsage);
}

TEST(Cli, IngestReportsRejectedLines) {
  auto dir = testing_support::scratch("cli-ingest");
  auto good = slurp(fixture("joint_small.jsonl"));
  write(dir / "mixed.jsonl", good + "{\"image_id\": 3}\n");
  auto r = run({"ingest", "--records", (dir / "mixed.jsonl").string(), "--out",
                (dir / "clean.csv").string()});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "40 accepted, 1 rejected");
  EXPECT_NE(r.out.find("line 41: "), std::string::npos);
  EXPECT_EQ(read_records(dir / "clean.csv").records, read_records(fixture("joint_small.jsonl")).records);

  EXPECT_EQ(run({"ingest", "--strict", "--records", (dir / "mixed.jsonl").string()}).code,
            cli::kExitFailure);
  EXPECT_EQ(run({"ingest", "--records", (dir / "nope.jsonl").string()}).code, cli::kExitUsage);
}

TEST(Cli, ReferenceFromToyTable) {
  auto dir = testing_support::scratch("cli-reference");
  write(dir / "pop.csv", kPopulation);
  auto out = (dir / "ref.json").string();
  auto r = run({"reference", "--population", (dir / "pop.csv").string(), "--out", out});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  auto set = read_reference_set(out);
  const auto& race4 = set.get("world", "race4");
  EXPECT_NEAR(race4[0], 0.2, 1e-12);
  EXPECT_NEAR(race4[1], 0.2, 1e-12);
  EXPECT_NEAR(race4[2], 0.6, 1e-12);
  EXPECT_EQ(race4[3], 0.0);
  EXPECT_NE(set.find("world", "gender2"), nullptr);
  EXPECT_NE(set.find("world", "age3"), nullptr);
  EXPECT_EQ(set.provenance().source, "pop.csv");
  EXPECT_FALSE(set.provenance().built_at);

  auto again = (dir / "again.json").string();
  run({"reference", "--population", (dir / "pop.csv").string(), "--out", again});
  EXPECT_EQ(slurp(again), slurp(out));

  auto missing = run({"reference", "--population", (dir / "pop.csv").string(), "--region", "mars"});
  EXPECT_EQ(missing.code, cli::kExitFailure);
  EXPECT_NE(missing.err.find("mars"), std::string::npos);
}

TEST(Cli, MarginalAuditWritesReports) {
  auto dir = testing_support::scratch("cli-marginal");
  auto records = fixture("marginal_corpus.jsonl").string();
  auto r = run({"audit", "--records", records, "--mode", "marginal", "--reference",
                fixture("marginal_reference.json").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(slurp(dir / "marginal.md"), slurp(golden("marginal.md")));
  for (const char* f : {"marginal.json", "marginal.csv", "marginal_plot.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_NE(r.err.find("warning: model 'ghost' has no 'neutral' records"), std::string::npos);

  auto rendered = testing_support::scratch("cli-rerender");
  auto rr = run({"report", "--input", (dir / "marginal.json").string(), "--out", rendered.string(),
                 "--format", "md,csv"});
  ASSERT_EQ(rr.code, cli::kExitOk) << rr.err;
  EXPECT_EQ(slurp(rendered / "marginal.md"), slurp(dir / "marginal.md"));
  EXPECT_EQ(slurp(rendered / "marginal.csv"), slurp(dir / "marginal.csv"));
  EXPECT_FALSE(fs::exists(rendered / "marginal.json"));

  EXPECT_EQ(run({"audit", "--records", records, "--mode", "marginal", "--out", dir.string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"audit", "--records", records, "--mode", "weekly", "--out", dir.string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"audit", "--records", records, "--mode", "marginal", "--reference",
                 fixture("marginal_reference.json").string(), "--region", "china", "--out",
                 dir.string()})
                .code,
            cli::kExitFailure);
}

TEST(Cli, AuditConfigAndOverrides) {
  auto dir = testing_support::scratch("cli-config");
  write(dir / "audit.conf", "log_base = natural\nattributes = gender2\n");
  auto records = fixture("marginal_corpus.jsonl").string();
  auto r = run({"audit", "--records", records, "--mode", "emotion", "--config",
                (dir / "audit.conf").string(), "--baseline", "neutral", "--out", dir.string(),
                "--format", "json"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  auto report = read_report(dir / "emotion.json");
  EXPECT_EQ(report.log_base, LogBase::natural);
  for (const auto& row : report.rows) EXPECT_EQ(row.attribute, "gender2");
  EXPECT_TRUE(fs::exists(dir / "emotion_plot.csv"));
  EXPECT_FALSE(fs::exists(dir / "emotion.md"));

  write(dir / "bad.conf", "colour = blue\n");
  auto bad = run({"audit", "--records", records, "--mode", "emotion", "--config",
                  (dir / "bad.conf").string(), "--out", dir.string()});
  EXPECT_EQ(bad.code, cli::kExitFailure);
  EXPECT_NE(bad.err.find("unknown config key 'colour'"), std::string::npos);
}

TEST(Cli, CompareSadUnhappy) {
  auto dir = testing_support::scratch("cli-compare");
  auto expected = nlohmann::json::parse(slurp(golden("sad_unhappy_expected.json")));
  auto r = run({"compare", "--records-a", fixture("sad_unhappy.jsonl").string(), "--select-a",
                "prompt_emotion=sad", "--select-b", "prompt_emotion=unhappy", "--label-a", "sad",
                "--label-b", "unhappy", "--top-k", "5", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  auto report = read_report(dir / "comparison.json");
  const auto& top = expected["top"];
  ASSERT_EQ(report.top_shifts.size(), top.size());
  for (std::size_t i = 0; i < top.size(); ++i) {
    EXPECT_EQ(report.top_shifts[i].cell, top[i]["cell"].get<std::string>());
    EXPECT_NEAR(report.top_shifts[i].a, top[i]["a"].get<double>(), 1e-12);
    EXPECT_NEAR(report.top_shifts[i].b, top[i]["b"].get<double>(), 1e-12);
    EXPECT_NEAR(report.top_shifts[i].delta, top[i]["delta"].get<double>(), 1e-12);
  }
  for (const auto& [attr, value] : expected["pooled_js"].items()) {
    bool found = false;
    for (const auto& row : report.rows)
      if (row.model == "*" && row.attribute == attr) {
        EXPECT_NEAR(row.value->value, value.get<double>(), 1e-12) << attr;
        found = true;
      }
    EXPECT_TRUE(found) << attr;
  }
  EXPECT_TRUE(fs::exists(dir / "comparison_shifts.csv"));

  auto all = testing_support::scratch("cli-compare-all");
  run({"compare", "--records-a", fixture("sad_unhappy.jsonl").string(), "--select-a",
       "prompt_emotion=sad", "--select-b", "prompt_emotion=unhappy", "--out", all.string(),
       "--format", "json"});
  EXPECT_EQ(read_report(all / "comparison.json").top_shifts.size(),
            expected["nonzero"].get<std::size_t>());

  EXPECT_EQ(run({"compare", "--records-a", fixture("sad_unhappy.jsonl").string(), "--top-k", "0",
                 "--out", dir.string()})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"compare", "--records-a", fixture("sad_unhappy.jsonl").string(), "--select-a",
                 "mood=sad", "--out", dir.string()})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"compare", "--records-a", fixture("sad_unhappy.jsonl").string(), "--select-a",
                 "prompt_emotion=happy", "--out", dir.string()})
                .code,
            cli::kExitFailure);
}

TEST(Cli, ValidateConfusion) {
  auto dir = testing_support::scratch("cli-validate");
  std::vector<AttributeRecord> truth, pred;
  auto add = [&](const char* t, const char* p, int n) {
    for (int i = 0; i < n; ++i) {
      auto id = "v" + std::to_string(truth.size());
      truth.push_back(testing_support::make_record(id, "male", t, "20-39"));
      pred.push_back(testing_support::make_record(id, "male", p, "20-39"));
    }
  };
  add("white", "white", 8);
  add("latino", "indian", 2);
  {
    std::ofstream t(dir / "truth.jsonl"), p(dir / "pred.jsonl");
    write_jsonl(t, truth);
    write_jsonl(p, pred);
  }
  std::vector<std::string> base{"validate", "--truth", (dir / "truth.jsonl").string(),
                                "--predicted", (dir / "pred.jsonl").string(), "--attribute",
                                "race5"};
  auto r = run(base);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("10 matched, 0 truth-only, 0 prediction-only"), std::string::npos);
  EXPECT_NE(r.out.find("accuracy 0.8000 over 10 samples"), std::string::npos);

  auto strict = base;
  strict.insert(strict.end(), {"--min-accuracy", "0.9"});
  EXPECT_EQ(run(strict).code, cli::kExitFailure);
  strict.insert(strict.end(), {"--merge", "race4", "--out", (dir / "cm.json").string()});
  auto merged = run(strict);
  EXPECT_EQ(merged.code, cli::kExitOk) << merged.err;
  auto j = nlohmann::json::parse(slurp(dir / "cm.json"));
  EXPECT_DOUBLE_EQ(j["merged_accuracy"].get<double>(), 1.0);

  auto mismatch = base;
  mismatch.insert(mismatch.end(), {"--predicted-attribute", "race4"});
  EXPECT_EQ(run(mismatch).code, cli::kExitFailure);
}
