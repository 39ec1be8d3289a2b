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

#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "biasaudit/audit.hpp"
#include "biasaudit/config.hpp"
#include "biasaudit/error.hpp"
#include "biasaudit/records.hpp"
#include "biasaudit/reference.hpp"
#include "biasaudit/report.hpp"
#include "biasaudit/sampling.hpp"
#include "biasaudit/validation.hpp"

namespace biasaudit::cli {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::ordered_json;

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<AttributeRecord> load_records(const fs::path& path, std::ostream& err) {
  auto result = read_records(path);
  if (!result.diagnostics.empty())
    fmt::print(err, "warning: {}: skipped {} malformed line(s)\n", path.string(),
               result.diagnostics.size());
  return std::move(result.records);
}

RecordSelector parse_selector(const std::vector<std::string>& terms) {
  RecordSelector s;
  for (const auto& term : terms) {
    auto eq = term.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError(term, "expected key=value");
    auto key = term.substr(0, eq);
    auto value = term.substr(eq + 1);
    if (key == "model") {
      s.model = value;
    } else if (key == "model_origin") {
      s.model_origin = parse_origin(value);
      if (!s.model_origin) throw CLI::ValidationError(term, "unknown model_origin");
    } else if (key == "prompt_emotion") {
      if (!schemes::emotion8().contains(value))
        throw CLI::ValidationError(term, "unknown prompt_emotion");
      s.prompt_emotion = value;
    } else if (key == "prompt_language") {
      s.prompt_language = parse_language(value);
      if (!s.prompt_language) throw CLI::ValidationError(term, "unknown prompt_language");
    } else {
      throw CLI::ValidationError(term, "unknown selector field");
    }
  }
  return s;
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Options mapping one-to-one onto AuditConfig keys; applied over the config file.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App* app, bool with_top_k) {
    app->add_option("--config", config_path, "Flat key = value audit configuration file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
      auto* opt = app->add_option(name, values[key], help);
      options.emplace_back(key, opt);
      return opt;
    };
    flag("--attributes", "attributes", "Comma list of attribute schemes (gender2,race4,age5)");
    flag("--joint", "joint_components", "Comma list of joint components (gender2,race4,age3)");
    flag("--log-base", "log_base", "two | natural")
        ->check(CLI::IsMember({"two", "natural"}));
    flag("--smoothing", "smoothing", "none | epsilon_floor | additive")
        ->check(CLI::IsMember({"none", "epsilon_floor", "additive"}));
    flag("--epsilon", "epsilon", "Epsilon for epsilon_floor smoothing")
        ->check(CLI::PositiveNumber);
    flag("--alpha", "alpha", "Pseudo-count for additive smoothing")->check(CLI::PositiveNumber);
    flag("--baseline", "baseline_emotion", "Baseline emotion (neutral)");
    flag("--region", "reference_region", "Reference region tag (world)");
    flag("--group-by-origin", "group_by_origin", "true | false")
        ->check(CLI::IsMember({"true", "false"}));
    if (with_top_k)
      flag("--top-k", "top_k", "Number of ranked joint-cell shifts (10)")
          ->check(CLI::PositiveNumber);
  }

  AuditConfig resolve() const {
    AuditConfig config;
    if (!config_path.empty()) config = load_audit_config(config_path);
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) apply_setting(config, key, values.at(key));
    config.validate();
    return config;
  }
};

struct OutputFlags {
  std::string out_dir;
  std::vector<std::string> formats{"json", "csv", "md"};

  void add(CLI::App* app) {
    app->add_option("--out", out_dir, "Output directory")->required();
    app->add_option("--format", formats, "Report formats: json, csv, md (default all)")
        ->delimiter(',')
        ->check(CLI::IsMember({"json", "csv", "md"}));
  }

  bool wants(std::string_view f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
  }

  void emit(const DivergenceReport& report, std::ostream& out) const {
    fs::path dir(out_dir);
    std::string stem(to_string(report.kind));
    std::vector<std::pair<fs::path, std::string>> files;
    if (wants("json")) files.emplace_back(dir / (stem + ".json"), to_json(report).dump(2) + "\n");
    if (wants("md")) files.emplace_back(dir / (stem + ".md"), format_markdown(report));
    if (wants("csv")) {
      files.emplace_back(dir / (stem + ".csv"), format_csv(report));
      if (report.kind == ReportKind::emotion)
        files.emplace_back(dir / (stem + "_shifts.csv"), format_shifts_csv(report));
      if (report.kind == ReportKind::comparison)
        files.emplace_back(dir / (stem + "_shifts.csv"), format_top_shifts_csv(report));
    }
    files.emplace_back(dir / (stem + "_plot.csv"), format_plot_csv(report));
    for (const auto& [path, content] : files) {
      write_file(path, content);
      fmt::print(out, "wrote {}\n", path.string());
    }
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Demographic and emotion-conditioned bias audits for generated-face datasets",
               "biasaudit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "biasaudit 0.1.0");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a record file");
  std::string ingest_records, ingest_format, ingest_out;
  bool ingest_strict = false;
  ingest->add_option("--records", ingest_records, "Records file (JSONL or CSV)")->required();
  ingest->add_flag("--strict", ingest_strict, "Exit 1 when any line is rejected");
  ingest->add_option("--format", ingest_format, "Force jsonl or csv instead of the extension")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  ingest->add_option("--out", ingest_out, "Write accepted records (.csv or JSONL)");

  // reference
  auto* reference = app.add_subcommand("reference", "Build reference distributions");
  std::string ref_population, ref_mapping, ref_out;
  std::vector<std::string> ref_regions{"world"}, ref_schemes;
  bool ref_stamp = false;
  reference->add_option("--population", ref_population, "Population CSV")->required();
  reference->add_option("--mapping", ref_mapping, "Country-to-race CSV for unassigned rows");
  reference->add_option("--region", ref_regions, "Region tags (default world)")->delimiter(',');
  reference->add_option("--schemes", ref_schemes,
                        "Schemes to build; default race5, race4 and whatever gender/age "
                        "columns allow")
      ->delimiter(',');
  reference->add_flag("--stamp-time", ref_stamp, "Record the build time in the provenance");
  reference->add_option("--out", ref_out, "Output JSON (default stdout)");

  // audit
  auto* audit = app.add_subcommand("audit", "Run a divergence audit");
  std::string audit_records, audit_reference, audit_mode;
  ConfigFlags audit_config;
  OutputFlags audit_output;
  audit->add_option("--records", audit_records, "Records file")->required();
  audit->add_option("--reference", audit_reference, "Reference JSON (marginal mode)");
  audit->add_option("--mode", audit_mode, "marginal | intersectional | emotion")
      ->required()
      ->check(CLI::IsMember({"marginal", "intersectional", "emotion"}));
  audit_config.add(audit, false);
  audit_output.add(audit);

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two record sets");
  std::string cmp_a, cmp_b;
  std::vector<std::string> cmp_select_a, cmp_select_b;
  ComparisonLabels cmp_labels;
  ConfigFlags cmp_config;
  OutputFlags cmp_output;
  compare->add_option("--records-a", cmp_a, "Records for side a")->required();
  compare->add_option("--records-b", cmp_b, "Records for side b (default: same file as a)");
  compare->add_option("--select-a", cmp_select_a, "Filter for side a, field=value")
      ->delimiter(',');
  compare->add_option("--select-b", cmp_select_b, "Filter for side b, field=value")
      ->delimiter(',');
  compare->add_option("--label-a", cmp_labels.a, "Name of side a");
  compare->add_option("--label-b", cmp_labels.b, "Name of side b");
  cmp_config.add(compare, true);
  cmp_output.add(compare);

  // validate
  auto* validate = app.add_subcommand("validate", "Confusion-matrix validation");
  std::string val_truth, val_pred, val_attr, val_pred_attr, val_merge, val_out;
  std::optional<double> val_min_accuracy;
  validate->add_option("--truth", val_truth, "Ground-truth records")->required();
  validate->add_option("--predicted", val_pred, "Predicted records")->required();
  validate->add_option("--attribute", val_attr, "Scheme to compare, e.g. race5")->required();
  validate->add_option("--predicted-attribute", val_pred_attr,
                       "Scheme of the predictions when it differs");
  validate->add_option("--merge", val_merge, "Fold the matrix onto this scheme, e.g. race4");
  validate->add_option("--min-accuracy", val_min_accuracy, "Exit 1 below this accuracy")
      ->check(CLI::Range(0.0, 1.0));
  validate->add_option("--out", val_out, "Write the matrices as JSON");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Sample synthetic records from a spec");
  std::string sim_spec, sim_out, sim_origin = "other", sim_language = "en";
  RecordTemplate sim_template;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--spec", sim_spec, "Distribution JSON over gender2*race5*age5 cells")
      ->required();
  simulate->add_option("--n", sim_n, "Number of records")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Generator seed")->required();
  simulate->add_option("--out", sim_out, "Output file (.csv or JSONL)")->required();
  simulate->add_option("--model", sim_template.model, "Model name");
  simulate->add_option("--origin", sim_origin, "western | chinese | other")
      ->check(CLI::IsMember({"western", "chinese", "other"}));
  simulate->add_option("--emotion", sim_template.prompt_emotion, "Prompt emotion");
  simulate->add_option("--language", sim_language, "en | zh | other")
      ->check(CLI::IsMember({"en", "zh", "other"}));
  simulate->add_option("--id-prefix", sim_template.id_prefix, "image_id prefix");

  // report
  auto* report = app.add_subcommand("report", "Render a saved report JSON");
  std::string rep_input;
  OutputFlags rep_output;
  report->add_option("--input", rep_input, "Report JSON written by audit or compare")
      ->required();
  rep_output.add(report);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      ParseOptions options;
      if (!ingest_format.empty())
        options.format = ingest_format == "csv" ? RecordFormat::csv : RecordFormat::jsonl;
      auto result = read_records(ingest_records, options);
      fmt::print(out, "{} accepted, {} rejected\n", result.records.size(),
                 result.diagnostics.size());
      for (const auto& d : result.diagnostics) fmt::print(out, "line {}: {}\n", d.line, d.reason);
      if (!ingest_out.empty()) {
        std::ostringstream buf;
        if (detect_format(ingest_out) == RecordFormat::csv) {
          write_csv(buf, result.records);
        } else {
          write_jsonl(buf, result.records);
        }
        write_file(ingest_out, buf.str());
      }
      return ingest_strict && !result.diagnostics.empty() ? kExitFailure : kExitOk;
    }

    if (reference->parsed()) {
      std::optional<CountryRaceMap> mapping;
      if (!ref_mapping.empty()) mapping = load_country_race_map(fs::path(ref_mapping));
      auto table =
          load_population_table(fs::path(ref_population), mapping ? &*mapping : nullptr);
      for (const auto& w : table.warnings) fmt::print(err, "warning: {}\n", w);

      Provenance provenance{fs::path(ref_population).filename().string(), table.content_hash,
                            std::nullopt};
      if (ref_stamp) provenance.built_at = utc_now();
      ReferenceSet set(provenance);
      for (const auto& region : ref_regions) {
        std::vector<CategoryScheme> targets;
        if (!ref_schemes.empty()) {
          for (const auto& name : ref_schemes) targets.push_back(schemes::by_name(name));
        } else {
          targets = {schemes::race5(), schemes::race4()};
          bool gender = true, age = true;
          for (const auto& row : table.rows)
            if (row.in_region(region) && row.population > 0) {
              gender = gender && row.gender_split.has_value();
              age = age && row.age_profile.has_value();
            }
          if (gender) targets.push_back(schemes::gender2());
          if (age) {
            targets.push_back(schemes::age5());
            targets.push_back(schemes::age3());
          }
        }
        for (const auto& t : targets) set.add(region, build_reference(table, t, region));
      }
      auto text = to_json(set).dump(2) + "\n";
      if (ref_out.empty()) {
        out << text;
      } else {
        write_file(ref_out, text);
        fmt::print(out, "wrote {}\n", ref_out);
      }
      return kExitOk;
    }

    if (audit->parsed()) {
      auto config = audit_config.resolve();
      if (audit_mode == "marginal" && audit_reference.empty()) {
        fmt::print(err, "error: marginal mode needs --reference\n{}", audit->help());
        return kExitUsage;
      }
      auto records = load_records(audit_records, err);
      DivergenceReport result;
      if (audit_mode == "marginal") {
        result = run_marginal_audit(records, read_reference_set(audit_reference), config);
      } else if (audit_mode == "intersectional") {
        result = run_intersectional_audit(records, config);
      } else {
        result = run_emotion_shift_audit(records, config);
      }
      for (const auto& w : result.warnings) fmt::print(err, "warning: {}\n", w);
      audit_output.emit(result, out);
      return kExitOk;
    }

    if (compare->parsed()) {
      auto config = cmp_config.resolve();
      RecordSelector sel_a, sel_b;
      try {
        sel_a = parse_selector(cmp_select_a);
        sel_b = parse_selector(cmp_select_b);
      } catch (const CLI::ValidationError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitUsage;
      }
      auto all_a = load_records(cmp_a, err);
      auto all_b = cmp_b.empty() ? all_a : load_records(cmp_b, err);
      auto ra = filter_records(all_a, sel_a);
      auto rb = filter_records(all_b, sel_b);
      auto result = run_pairwise_comparison(ra, rb, config, cmp_labels);
      for (const auto& w : result.warnings) fmt::print(err, "warning: {}\n", w);
      cmp_output.emit(result, out);
      return kExitOk;
    }

    if (validate->parsed()) {
      auto truth = load_records(val_truth, err);
      auto pred = load_records(val_pred, err);
      const auto& truth_scheme = schemes::by_name(val_attr);
      const auto& pred_scheme = val_pred_attr.empty() ? truth_scheme : schemes::by_name(val_pred_attr);
      auto result = confusion_matrix(truth, pred, truth_scheme, pred_scheme);
      fmt::print(out, "{} matched, {} truth-only, {} prediction-only\n\n", result.matrix.n(),
                 result.unmatched_truth.size(), result.unmatched_predicted.size());
      out << format_confusion_table(result.matrix);
      Json j;
      j["matrix"] = to_json(result.matrix);
      j["accuracy"] = accuracy(result.matrix);
      double final_accuracy = accuracy(result.matrix);
      if (!val_merge.empty()) {
        const auto* map = aggregations::find(result.matrix.scheme(), schemes::by_name(val_merge));
        if (!map)
          throw Error(fmt::format("no aggregation from {} to {}", result.matrix.scheme().name(),
                                  val_merge));
        auto merged = merge_confusion(result.matrix, *map);
        out << '\n' << format_confusion_table(merged);
        final_accuracy = accuracy(merged);
        j["merged"] = to_json(merged);
        j["merged_accuracy"] = final_accuracy;
      }
      j["unmatched_truth"] = result.unmatched_truth;
      j["unmatched_predicted"] = result.unmatched_predicted;
      if (!val_out.empty()) write_file(val_out, j.dump(2) + "\n");
      if (val_min_accuracy && final_accuracy < *val_min_accuracy) {
        fmt::print(err, "accuracy {:.4f} below the required {:.4f}\n", final_accuracy,
                   *val_min_accuracy);
        return kExitFailure;
      }
      return kExitOk;
    }

    if (simulate->parsed()) {
      auto spec = distribution_from_json(read_json(sim_spec));
      sim_template.model_origin = *parse_origin(sim_origin);
      sim_template.prompt_language = *parse_language(sim_language);
      auto records = sample_records(spec, sim_template, sim_n, sim_seed);
      std::ostringstream buf;
      if (detect_format(sim_out) == RecordFormat::csv) {
        write_csv(buf, records);
      } else {
        write_jsonl(buf, records);
      }
      write_file(sim_out, buf.str());
      fmt::print(out, "wrote {} records to {}\n", records.size(), sim_out);
      return kExitOk;
    }

    if (report->parsed()) {
      rep_output.emit(read_report(rep_input), out);
      return kExitOk;
    }
  } catch (const IoError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace biasaudit::cli
