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

#include "biasaudit/report.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "biasaudit/csv.hpp"
#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

using Json = nlohmann::ordered_json;

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

/// Fixed-point text that never prints a negative zero.
std::string fixed(double v, int digits, bool sign = false) {
  auto text = sign ? fmt::format("{:+.{}f}", v, digits) : fmt::format("{:.{}f}", v, digits);
  if (text.find_first_not_of("+-0.") == std::string::npos) text = fmt::format("{:.{}f}", 0.0, digits);
  return text;
}

std::string model_label(std::string_view model) {
  return model == kPooledModel ? "all models" : std::string(model);
}

Json severity_json(const SeverityBand& s) {
  return Json{{"band", to_string(s.band)}, {"lower", s.lower}, {"upper", s.upper}};
}

// Markdown pivot: one line per model (then group means), one column per key.
struct Column {
  std::string attribute;
  std::string condition;
  Metric metric;
  std::string header;
};

void table_row(std::ostream& out, const std::vector<std::string>& cells) {
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void table_head(std::ostream& out, const std::vector<std::string>& headers,
                std::size_t left_columns) {
  table_row(out, headers);
  out << '|';
  for (std::size_t i = 0; i < headers.size(); ++i) out << (i < left_columns ? "---|" : "---:|");
  out << '\n';
}

std::vector<std::string> models_in(const DivergenceReport& report) {
  std::vector<std::string> out;
  for (const auto& r : report.rows)
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  return out;
}

const ReportRow* find_row(const DivergenceReport& report, std::string_view model,
                          const Column& c) {
  for (const auto& r : report.rows)
    if (r.model == model && r.attribute == c.attribute && r.condition == c.condition &&
        r.metric == c.metric)
      return &r;
  return nullptr;
}

std::string divergence_cell(const ReportRow* r) {
  if (!r || !r->value) return "n/a";
  auto text = fixed(r->value->value, 2);
  if (r->extreme == Extreme::worst) return "**" + text + "**";
  if (r->extreme == Extreme::best) return "_" + text + "_";
  return text;
}

void pivot(std::ostream& out, const DivergenceReport& report, const std::vector<Column>& cols,
           bool with_origin) {
  std::vector<std::string> headers{"Model"};
  if (with_origin) headers.emplace_back("Origin");
  for (const auto& c : cols) headers.push_back(c.header);
  table_head(out, headers, with_origin ? 2 : 1);

  for (const auto& model : models_in(report)) {
    std::vector<std::string> cells{model_label(model)};
    if (with_origin) {
      std::string origin;
      for (const auto& r : report.rows)
        if (r.model == model) origin = model == kPooledModel ? "" : to_string(r.origin);
      cells.push_back(origin);
    }
    for (const auto& c : cols) cells.push_back(divergence_cell(find_row(report, model, c)));
    table_row(out, cells);
  }
  std::vector<std::string> groups;
  for (const auto& g : report.groups)
    if (std::find(groups.begin(), groups.end(), g.group) == groups.end())
      groups.push_back(g.group);
  for (const auto& group : groups) {
    std::vector<std::string> cells{"mean: " + group};
    if (with_origin) cells.emplace_back("");
    bool any = false;
    for (const auto& c : cols) {
      auto it = std::find_if(report.groups.begin(), report.groups.end(), [&](const auto& g) {
        return g.group == group && g.attribute == c.attribute && g.condition == c.condition &&
               g.metric == c.metric;
      });
      any = any || it != report.groups.end();
      cells.push_back(it == report.groups.end() ? "n/a" : fixed(it->mean, 2));
    }
    if (any) table_row(out, cells);
  }
}

std::vector<Column> columns_where(const DivergenceReport& report,
                                  const std::function<bool(const ReportRow&)>& keep,
                                  const std::function<std::string(const ReportRow&)>& header) {
  std::vector<Column> out;
  for (const auto& r : report.rows) {
    if (!keep(r)) continue;
    bool seen = std::any_of(out.begin(), out.end(), [&](const Column& c) {
      return c.attribute == r.attribute && c.condition == r.condition && c.metric == r.metric;
    });
    if (!seen) out.push_back({r.attribute, r.condition, r.metric, header(r)});
  }
  return out;
}

std::size_t emotion_rank(const DivergenceReport& report, std::string_view emotion) {
  for (std::size_t i = 0; i < report.ordering.size(); ++i)
    if (report.ordering[i].emotion == emotion) return i;
  return report.ordering.size();
}

void sort_by_ordering(const DivergenceReport& report, std::vector<Column>& cols) {
  std::stable_sort(cols.begin(), cols.end(), [&](const Column& x, const Column& y) {
    return emotion_rank(report, x.condition) < emotion_rank(report, y.condition);
  });
}

std::string comparison_label_b(const DivergenceReport& report) {
  std::string suffix = "-vs-" + report.reference;
  for (const auto& r : report.rows)
    if (r.condition.size() > suffix.size() && r.condition.ends_with(suffix))
      return r.condition.substr(0, r.condition.size() - suffix.size());
  return "b";
}

void preamble(std::ostream& out, const DivergenceReport& report) {
  auto base = report.log_base == LogBase::two ? "2" : "e";
  switch (report.kind) {
    case ReportKind::marginal:
      out << "# Marginal audit\n\n"
          << fmt::format("Reference: {}. Model distributions from '{}' prompts. ", report.reference,
                         report.baseline_emotion)
          << fmt::format("KL(reference || model), log base {}, smoothing {}.\n", base,
                         to_string(report.smoothing));
      break;
    case ReportKind::intersectional:
      out << "# Intersectional audit\n\n"
          << fmt::format("Joint distributions per emotion against '{}'. ", report.baseline_emotion)
          << fmt::format("KL(emotion || baseline) and JS, log base {}, smoothing {}.\n", base,
                         to_string(report.smoothing));
      break;
    case ReportKind::emotion:
      out << "# Emotion shift audit\n\n"
          << fmt::format("Marginals per emotion against '{}'. ", report.baseline_emotion)
          << fmt::format("KL(emotion || baseline), log base {}, smoothing {}.\n", base,
                         to_string(report.smoothing));
      break;
    case ReportKind::comparison:
      out << fmt::format("# Comparison: {} vs {}\n\n", comparison_label_b(report),
                         report.reference)
          << fmt::format("Jensen-Shannon divergence, log base {}.\n", base);
      break;
  }
  out << "Lower is better. Bold marks the worst and italics the best value per column.\n";
}

void shift_tables(std::ostream& out, const DivergenceReport& report, bool delta) {
  std::vector<std::string> groups;
  for (const auto& s : report.group_shifts)
    if (std::find(groups.begin(), groups.end(), s.scope) == groups.end())
      groups.push_back(s.scope);
  std::vector<std::string> emotions;
  for (const auto& r : report.ordering) emotions.push_back(r.emotion);

  for (const auto& group : groups) {
    out << fmt::format("\n### {}\n\n", group);
    std::vector<std::string> headers{"Attribute", "Category"};
    headers.insert(headers.end(), emotions.begin(), emotions.end());
    table_head(out, headers, 2);
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& s : report.group_shifts)
      if (s.scope == group) {
        std::pair key{s.attribute, s.category};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      }
    for (const auto& [attribute, category] : keys) {
      std::vector<std::string> cells{attribute, category};
      for (const auto& e : emotions) {
        auto it = std::find_if(report.group_shifts.begin(), report.group_shifts.end(),
                               [&](const CategoryShift& s) {
                                 return s.scope == group && s.emotion == e &&
                                        s.attribute == attribute && s.category == category;
                               });
        cells.push_back(it == report.group_shifts.end()
                            ? "n/a"
                            : fixed(delta ? it->delta_p : it->category_kl, 4, true));
      }
      table_row(out, cells);
    }
  }
}

}  // namespace

Json to_json(const SmoothingPolicy& policy) {
  return Json{{"kind", to_string(policy.kind)}, {"epsilon", policy.epsilon},
              {"alpha", policy.alpha}};
}

SmoothingPolicy smoothing_from_json(const Json& j) {
  SmoothingPolicy p;
  p.kind = parse_smoothing_kind(j.at("kind").get<std::string>());
  p.epsilon = j.at("epsilon").get<double>();
  p.alpha = j.at("alpha").get<double>();
  return p;
}

Json to_json(const DivergenceReport& report) {
  Json j;
  j["kind"] = to_string(report.kind);
  j["log_base"] = to_string(report.log_base);
  j["smoothing"] = to_json(report.smoothing);
  j["baseline_emotion"] = report.baseline_emotion;
  j["reference"] = report.reference;

  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["model"] = r.model;
    row["origin"] = to_string(r.origin);
    row["attribute"] = r.attribute;
    row["condition"] = r.condition;
    row["metric"] = to_string(r.metric);
    if (r.value) {
      row["value"] = r.value->value;
      row["log_base"] = to_string(r.value->log_base);
      row["smoothing"] = to_json(r.value->smoothing);
      row["numerator"] = r.value->numerator_id;
      row["denominator"] = r.value->denominator_id;
    } else {
      row["value"] = nullptr;
    }
    row["severity"] = r.severity ? severity_json(*r.severity) : Json(nullptr);
    row["extreme"] = to_string(r.extreme);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);

  Json groups = Json::array();
  for (const auto& g : report.groups)
    groups.push_back(Json{{"group", g.group},
                          {"attribute", g.attribute},
                          {"condition", g.condition},
                          {"metric", to_string(g.metric)},
                          {"mean", g.mean},
                          {"members", g.members}});
  j["groups"] = std::move(groups);

  auto shifts_json = [](const std::vector<CategoryShift>& shifts) {
    Json out = Json::array();
    for (const auto& s : shifts)
      out.push_back(Json{{"scope", s.scope},
                         {"emotion", s.emotion},
                         {"attribute", s.attribute},
                         {"category", s.category},
                         {"delta_p", s.delta_p},
                         {"category_kl", s.category_kl},
                         {"members", s.members}});
    return out;
  };
  j["shifts"] = shifts_json(report.shifts);
  j["group_shifts"] = shifts_json(report.group_shifts);

  Json ordering = Json::array();
  for (const auto& o : report.ordering)
    ordering.push_back(Json{{"emotion", o.emotion}, {"mean_kl", o.mean_kl}});
  j["ordering"] = std::move(ordering);

  Json top = Json::array();
  for (const auto& c : report.top_shifts)
    top.push_back(Json{{"cell", c.cell}, {"a", c.a}, {"b", c.b}, {"delta", c.delta}});
  j["top_shifts"] = std::move(top);

  j["warnings"] = report.warnings;
  Json dists = Json::object();
  for (const auto& [id, d] : report.distributions) dists[id] = to_json(d);
  j["distributions"] = std::move(dists);
  return j;
}

namespace {

DivergenceReport parse_report(const Json& j) {
  DivergenceReport r;
  r.kind = parse_report_kind(j.at("kind").get<std::string>());
  r.log_base = parse_log_base(j.at("log_base").get<std::string>());
  r.smoothing = smoothing_from_json(j.at("smoothing"));
  r.baseline_emotion = j.at("baseline_emotion").get<std::string>();
  r.reference = j.at("reference").get<std::string>();

  for (const auto& row : j.at("rows")) {
    ReportRow out;
    out.model = row.at("model").get<std::string>();
    auto origin = parse_origin(row.at("origin").get<std::string>());
    if (!origin) throw Error("report row has an unknown origin");
    out.origin = *origin;
    out.attribute = row.at("attribute").get<std::string>();
    out.condition = row.at("condition").get<std::string>();
    out.metric = parse_metric(row.at("metric").get<std::string>());
    if (!row.at("value").is_null()) {
      DivergenceValue v{out.metric,
                        row.at("value").get<double>(),
                        parse_log_base(row.at("log_base").get<std::string>()),
                        smoothing_from_json(row.at("smoothing")),
                        row.at("numerator").get<std::string>(),
                        row.at("denominator").get<std::string>()};
      out.value = std::move(v);
    }
    if (const auto& s = row.at("severity"); !s.is_null())
      out.severity = SeverityBand{parse_severity(s.at("band").get<std::string>()),
                                  s.at("lower").get<double>(), s.at("upper").get<double>()};
    out.extreme = parse_extreme(row.at("extreme").get<std::string>());
    r.rows.push_back(std::move(out));
  }

  for (const auto& g : j.at("groups"))
    r.groups.push_back({g.at("group").get<std::string>(), g.at("attribute").get<std::string>(),
                        g.at("condition").get<std::string>(),
                        parse_metric(g.at("metric").get<std::string>()),
                        g.at("mean").get<double>(), g.at("members").get<std::size_t>()});

  auto parse_shifts = [](const Json& arr) {
    std::vector<CategoryShift> out;
    for (const auto& s : arr)
      out.push_back({s.at("scope").get<std::string>(), s.at("emotion").get<std::string>(),
                     s.at("attribute").get<std::string>(), s.at("category").get<std::string>(),
                     s.at("delta_p").get<double>(), s.at("category_kl").get<double>(),
                     s.at("members").get<std::size_t>()});
    return out;
  };
  r.shifts = parse_shifts(j.at("shifts"));
  r.group_shifts = parse_shifts(j.at("group_shifts"));

  for (const auto& o : j.at("ordering"))
    r.ordering.push_back({o.at("emotion").get<std::string>(), o.at("mean_kl").get<double>()});
  for (const auto& c : j.at("top_shifts"))
    r.top_shifts.push_back({c.at("cell").get<std::string>(), c.at("a").get<double>(),
                            c.at("b").get<double>(), c.at("delta").get<double>()});
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& [id, d] : j.at("distributions").items())
    r.distributions.emplace(id, distribution_from_json(d));

  for (const auto& row : r.rows)
    if (row.value) {
      r.distribution(row.value->numerator_id);
      r.distribution(row.value->denominator_id);
    }
  return r;
}

}  // namespace

DivergenceReport report_from_json(const Json& j) {
  try {
    return parse_report(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed report JSON: {}", e.what()));
  }
}

DivergenceReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open report '{}'", path.string()));
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  return report_from_json(j);
}

std::string format_markdown(const DivergenceReport& report) {
  std::ostringstream out;
  preamble(out, report);
  auto any = [](const ReportRow&) { return true; };

  switch (report.kind) {
    case ReportKind::marginal: {
      out << '\n';
      pivot(out, report,
            columns_where(report, any,
                          [](const ReportRow& r) {
                            return fmt::format("{} {}", r.attribute, upper(to_string(r.metric)));
                          }),
            true);
      out << "\n## Severity (TVD)\n\n";
      auto cols = columns_where(
          report, [](const ReportRow& r) { return r.metric == Metric::tvd; },
          [](const ReportRow& r) { return r.attribute; });
      std::vector<std::string> headers{"Model"};
      for (const auto& c : cols) headers.push_back(c.header);
      table_head(out, headers, headers.size());
      for (const auto& model : models_in(report)) {
        std::vector<std::string> cells{model_label(model)};
        for (const auto& c : cols) {
          const auto* r = find_row(report, model, c);
          cells.push_back(r && r->severity ? std::string(to_string(r->severity->band)) : "n/a");
        }
        table_row(out, cells);
      }
      break;
    }
    case ReportKind::intersectional:
      out << '\n';
      pivot(out, report,
            columns_where(report, any,
                          [](const ReportRow& r) {
                            return fmt::format("{} {}", r.condition, upper(to_string(r.metric)));
                          }),
            true);
      break;
    case ReportKind::emotion: {
      out << "\n## Emotion ordering\n\n";
      table_head(out, {"Rank", "Emotion", "Mean KL"}, 2);
      for (std::size_t i = 0; i < report.ordering.size(); ++i)
        table_row(out, {std::to_string(i + 1), report.ordering[i].emotion,
                        fixed(report.ordering[i].mean_kl, 4)});
      std::vector<std::string> attributes;
      for (const auto& r : report.rows)
        if (std::find(attributes.begin(), attributes.end(), r.attribute) == attributes.end())
          attributes.push_back(r.attribute);
      for (const auto& attribute : attributes) {
        out << fmt::format("\n## KL against baseline: {}\n\n", attribute);
        auto cols = columns_where(
            report, [&](const ReportRow& r) { return r.attribute == attribute; },
            [](const ReportRow& r) { return r.condition; });
        sort_by_ordering(report, cols);
        pivot(out, report, cols, true);
      }
      out << "\n## Mean probability shift\n";
      shift_tables(out, report, true);
      out << "\n## Mean category KL term\n";
      shift_tables(out, report, false);
      break;
    }
    case ReportKind::comparison: {
      out << '\n';
      pivot(out, report,
            columns_where(report, any, [](const ReportRow& r) { return r.attribute; }), false);
      auto b = comparison_label_b(report);
      out << fmt::format("\n## Top joint-cell shifts ({} - {})\n\n", b, report.reference);
      table_head(out, {"Rank", "Cell", report.reference, b, "Delta"}, 2);
      for (std::size_t i = 0; i < report.top_shifts.size(); ++i) {
        const auto& c = report.top_shifts[i];
        table_row(out, {std::to_string(i + 1), c.cell, fixed(c.a, 4), fixed(c.b, 4),
                        fixed(c.delta, 4, true)});
      }
      break;
    }
  }

  if (!report.warnings.empty()) {
    out << "\n## Warnings\n\n";
    for (const auto& w : report.warnings) out << "- " << w << '\n';
  }
  return out.str();
}

std::string format_csv(const DivergenceReport& report) {
  std::string out = "kind,model,origin,attribute,condition,metric,value,log_base,smoothing,"
                    "severity,extreme,numerator,denominator\n";
  for (const auto& r : report.rows) {
    std::vector<std::string> f{std::string(to_string(report.kind)), r.model,
                               std::string(to_string(r.origin)), r.attribute, r.condition,
                               std::string(to_string(r.metric))};
    if (r.value) {
      f.push_back(fmt::format("{}", r.value->value));
      f.emplace_back(to_string(r.value->log_base));
      f.push_back(to_string(r.value->smoothing));
    } else {
      f.insert(f.end(), 3, "");
    }
    f.push_back(r.severity ? std::string(to_string(r.severity->band)) : "");
    f.emplace_back(to_string(r.extreme));
    f.push_back(r.value ? r.value->numerator_id : "");
    f.push_back(r.value ? r.value->denominator_id : "");
    out += csv::join(f) + '\n';
  }
  return out;
}

std::string format_shifts_csv(const DivergenceReport& report) {
  std::string out = "level,scope,emotion,attribute,category,delta_p,category_kl,members\n";
  auto emit = [&](std::string_view level, const std::vector<CategoryShift>& shifts) {
    for (const auto& s : shifts)
      out += csv::join({std::string(level), s.scope, s.emotion, s.attribute, s.category,
                        fmt::format("{}", s.delta_p), fmt::format("{}", s.category_kl),
                        std::to_string(s.members)}) +
             '\n';
  };
  emit("model", report.shifts);
  emit("group", report.group_shifts);
  return out;
}

std::string format_top_shifts_csv(const DivergenceReport& report) {
  std::string out = "rank,cell,a,b,delta\n";
  for (std::size_t i = 0; i < report.top_shifts.size(); ++i) {
    const auto& c = report.top_shifts[i];
    out += csv::join({std::to_string(i + 1), c.cell, fmt::format("{}", c.a),
                      fmt::format("{}", c.b), fmt::format("{}", c.delta)}) +
           '\n';
  }
  return out;
}

std::string format_plot_csv(const DivergenceReport& report) {
  std::vector<const ReportRow*> rows;
  for (const auto& r : report.rows) rows.push_back(&r);
  if (report.kind == ReportKind::emotion)
    std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow* x, const ReportRow* y) {
      return emotion_rank(report, x->condition) < emotion_rank(report, y->condition);
    });

  std::string out = "model,origin,emotion,reference,attribute,metric,value\n";
  for (const auto* r : rows) {
    std::string emotion = r->condition;
    if (report.kind == ReportKind::marginal) emotion = report.baseline_emotion;
    if (report.kind == ReportKind::comparison) emotion = comparison_label_b(report);
    out += csv::join({r->model, std::string(to_string(r->origin)), emotion, report.reference,
                      r->attribute, std::string(to_string(r->metric)),
                      r->value ? fmt::format("{}", r->value->value) : ""}) +
           '\n';
  }
  return out;
}

}  // namespace biasaudit
