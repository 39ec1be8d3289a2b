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

#include "biasaudit/audit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

constexpr std::array<Metric, 3> kMarginalMetrics{Metric::kl, Metric::js, Metric::tvd};
constexpr std::array<Metric, 2> kJointMetrics{Metric::kl, Metric::js};

DivergenceValue compute(Metric metric, const Distribution& p, const Distribution& q,
                        LogBase base, const SmoothingPolicy& smoothing) {
  bool joint = !p.scheme().is_marginal();
  switch (metric) {
    case Metric::kl:
      return joint ? intersectional_kl(p, q, base, smoothing) : kl(p, q, base, smoothing);
    case Metric::js:
      return joint ? intersectional_js(p, q, base) : js(p, q, base);
    case Metric::tvd:
      return tvd(p, q);
  }
  throw Error("unknown metric");
}

struct ModelInfo {
  std::string name;
  ModelOrigin origin;
};

std::vector<ModelInfo> sorted_models(std::span<const AttributeRecord> records) {
  std::map<std::string, ModelOrigin, std::less<>> seen;
  for (const auto& r : records) seen.try_emplace(r.model, r.model_origin);
  std::vector<ModelInfo> out;
  for (const auto& [name, origin] : seen) out.push_back({name, origin});
  return out;
}

/// Emotions present in the corpus other than the baseline, in emotion8 order.
std::vector<std::string> conditioned_emotions(std::span<const AttributeRecord> records,
                                              std::string_view baseline) {
  const auto& scheme = schemes::emotion8();
  std::vector<bool> present(scheme.size(), false);
  for (const auto& r : records)
    if (auto i = scheme.find(r.prompt_emotion)) present[*i] = true;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scheme.size(); ++i)
    if (present[i] && scheme.label(i) != baseline) out.push_back(scheme.label(i));
  return out;
}

std::vector<AttributeRecord> select(std::span<const AttributeRecord> records,
                                    std::string_view model, std::string_view emotion) {
  RecordSelector s;
  s.model = std::string(model);
  s.prompt_emotion = std::string(emotion);
  return filter_records(records, s);
}

class Builder {
 public:
  Builder(ReportKind kind, const AuditConfig& config) : config_(config) {
    config.validate();
    report_.kind = kind;
    report_.log_base = config.log_base;
    report_.smoothing = config.smoothing;
    report_.baseline_emotion = config.baseline_emotion;
    report_.reference = kind == ReportKind::marginal ? config.reference_region
                                                     : config.baseline_emotion;
  }

  DivergenceReport& report() { return report_; }

  void warn(std::string message) { report_.warnings.push_back(std::move(message)); }

  const std::string& keep(std::string id, Distribution dist) {
    auto it = report_.distributions.insert_or_assign(std::move(id), std::move(dist)).first;
    return it->first;
  }

  void absent(const ModelInfo& m, std::string_view attribute, std::string_view condition,
              std::span<const Metric> metrics) {
    for (auto metric : metrics)
      report_.rows.push_back({m.name, m.origin, std::string(attribute), std::string(condition),
                              metric, std::nullopt, std::nullopt, Extreme::none});
  }

  void rows(const ModelInfo& m, std::string_view attribute, std::string_view condition,
            std::span<const Metric> metrics, const std::string& num_id,
            const std::string& den_id) {
    const auto& p = report_.distributions.at(num_id);
    const auto& q = report_.distributions.at(den_id);
    for (auto metric : metrics) {
      ReportRow row{m.name, m.origin, std::string(attribute), std::string(condition), metric,
                    std::nullopt, std::nullopt, Extreme::none};
      try {
        auto v = compute(metric, p, q, config_.log_base, config_.smoothing);
        v.numerator_id = num_id;
        v.denominator_id = den_id;
        if (metric == Metric::tvd) row.severity = classify_severity(v.value);
        row.value = std::move(v);
      } catch (const Error& e) {
        warn(fmt::format("{} {} {} {}: {}", m.name, attribute, condition, to_string(metric),
                         e.what()));
      }
      report_.rows.push_back(std::move(row));
    }
  }

  std::optional<std::string> estimate(std::span<const AttributeRecord> records,
                                      const ModelInfo& m, std::string_view condition,
                                      const CategoryScheme& scheme) {
    try {
      return keep(records_id(m.name, condition, scheme.name()),
                  estimate_marginal(records, scheme));
    } catch (const Error& e) {
      warn(fmt::format("model '{}' {} {}: {}", m.name, condition, scheme.name(), e.what()));
      return std::nullopt;
    }
  }

  std::vector<std::string> group_names() const {
    if (!config_.group_by_origin) return {"all"};
    return {"all", std::string(to_string(ModelOrigin::western)),
            std::string(to_string(ModelOrigin::chinese))};
  }

  static bool in_group(std::string_view group, ModelOrigin origin) {
    return group == "all" || group == to_string(origin);
  }

  DivergenceReport finish() {
    mark_extremes();
    summarize_groups();
    return std::move(report_);
  }

 private:
  using Column = std::tuple<std::string, std::string, Metric>;

  std::vector<Column> columns() const {
    std::vector<Column> out;
    for (const auto& r : report_.rows) {
      Column c{r.attribute, r.condition, r.metric};
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    }
    return out;
  }

  static bool ranked(const ReportRow& r) { return r.value && r.model != kPooledModel; }

  void mark_extremes() {
    for (const auto& [attribute, condition, metric] : columns()) {
      std::vector<ReportRow*> members;
      for (auto& r : report_.rows)
        if (ranked(r) && r.attribute == attribute && r.condition == condition &&
            r.metric == metric)
          members.push_back(&r);
      if (members.size() < 2) continue;
      auto [lo, hi] = std::minmax_element(members.begin(), members.end(), [](auto* x, auto* y) {
        return x->value->value < y->value->value;
      });
      double min = (*lo)->value->value;
      double max = (*hi)->value->value;
      if (min == max) continue;
      for (auto* r : members) {
        if (r->value->value == max) r->extreme = Extreme::worst;
        if (r->value->value == min) r->extreme = Extreme::best;
      }
    }
  }

  void summarize_groups() {
    auto cols = columns();
    for (const auto& group : group_names()) {
      for (const auto& [attribute, condition, metric] : cols) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : report_.rows)
          if (ranked(r) && in_group(group, r.origin) && r.attribute == attribute &&
              r.condition == condition && r.metric == metric) {
            sum += r.value->value;
            ++n;
          }
        if (n > 0)
          report_.groups.push_back(
              {group, attribute, condition, metric, sum / static_cast<double>(n), n});
      }
    }
  }

  const AuditConfig& config_;
  DivergenceReport report_;
};

}  // namespace

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::marginal:
      return "marginal";
    case ReportKind::intersectional:
      return "intersectional";
    case ReportKind::emotion:
      return "emotion";
    case ReportKind::comparison:
      return "comparison";
  }
  return "?";
}

ReportKind parse_report_kind(std::string_view text) {
  for (auto k : {ReportKind::marginal, ReportKind::intersectional, ReportKind::emotion,
                 ReportKind::comparison})
    if (to_string(k) == text) return k;
  throw Error(fmt::format("unknown report kind '{}'", text));
}

std::string_view to_string(Extreme extreme) {
  switch (extreme) {
    case Extreme::none:
      return "none";
    case Extreme::best:
      return "best";
    case Extreme::worst:
      return "worst";
  }
  return "?";
}

Extreme parse_extreme(std::string_view text) {
  for (auto e : {Extreme::none, Extreme::best, Extreme::worst})
    if (to_string(e) == text) return e;
  throw Error(fmt::format("unknown extreme marker '{}'", text));
}

const Distribution& DivergenceReport::distribution(std::string_view id) const {
  auto it = distributions.find(std::string(id));
  if (it == distributions.end()) throw Error(fmt::format("report has no distribution '{}'", id));
  return it->second;
}

std::string records_id(std::string_view model, std::string_view condition,
                       std::string_view scheme) {
  return fmt::format("records/{}/{}/{}", model, condition, scheme);
}

std::string reference_id(std::string_view region, std::string_view scheme) {
  return fmt::format("reference/{}/{}", region, scheme);
}

DivergenceReport run_marginal_audit(std::span<const AttributeRecord> records,
                                    const ReferenceSet& references, const AuditConfig& config) {
  Builder b(ReportKind::marginal, config);
  const auto& region = config.reference_region;

  std::vector<std::string> ref_ids;
  for (const auto& attr : config.attributes)
    ref_ids.push_back(
        b.keep(reference_id(region, attr.name()), references.get(region, attr.name())));

  for (const auto& m : sorted_models(records)) {
    auto baseline = select(records, m.name, config.baseline_emotion);
    if (baseline.empty())
      b.warn(fmt::format("model '{}' has no '{}' records", m.name, config.baseline_emotion));
    for (std::size_t a = 0; a < config.attributes.size(); ++a) {
      const auto& attr = config.attributes[a];
      auto id = baseline.empty() ? std::nullopt
                                 : b.estimate(baseline, m, config.baseline_emotion, attr);
      if (id) {
        b.rows(m, attr.name(), region, kMarginalMetrics, ref_ids[a], *id);
      } else {
        b.absent(m, attr.name(), region, kMarginalMetrics);
      }
    }
  }
  return b.finish();
}

DivergenceReport run_intersectional_audit(std::span<const AttributeRecord> records,
                                          const AuditConfig& config) {
  Builder b(ReportKind::intersectional, config);
  auto emotions = conditioned_emotions(records, config.baseline_emotion);
  const auto& components = config.joint_components;
  std::string joint_name = JointScheme(components).name();

  for (const auto& m : sorted_models(records)) {
    auto baseline = select(records, m.name, config.baseline_emotion);
    if (baseline.empty()) {
      b.warn(fmt::format("model '{}' has no '{}' records", m.name, config.baseline_emotion));
      for (const auto& e : emotions) b.absent(m, kJointAttribute, e, kJointMetrics);
      continue;
    }
    auto base_id = b.keep(records_id(m.name, config.baseline_emotion, joint_name),
                          estimate_joint(baseline, components));
    for (const auto& e : emotions) {
      auto subset = select(records, m.name, e);
      if (subset.empty()) {
        b.warn(fmt::format("model '{}' has no '{}' records", m.name, e));
        b.absent(m, kJointAttribute, e, kJointMetrics);
        continue;
      }
      auto id = b.keep(records_id(m.name, e, joint_name), estimate_joint(subset, components));
      b.rows(m, kJointAttribute, e, kJointMetrics, id, base_id);
    }
  }
  return b.finish();
}

DivergenceReport run_emotion_shift_audit(std::span<const AttributeRecord> records,
                                         const AuditConfig& config) {
  Builder b(ReportKind::emotion, config);
  auto& report = b.report();
  auto emotions = conditioned_emotions(records, config.baseline_emotion);
  constexpr std::array<Metric, 1> kl_only{Metric::kl};
  bool additive = config.smoothing.kind == SmoothingPolicy::Kind::additive;
  auto models = sorted_models(records);

  for (const auto& m : models) {
    auto baseline = select(records, m.name, config.baseline_emotion);
    if (baseline.empty())
      b.warn(fmt::format("model '{}' has no '{}' records", m.name, config.baseline_emotion));
    std::vector<std::optional<std::string>> base_ids;
    for (const auto& attr : config.attributes)
      base_ids.push_back(baseline.empty()
                             ? std::nullopt
                             : b.estimate(baseline, m, config.baseline_emotion, attr));

    for (const auto& e : emotions) {
      auto subset = select(records, m.name, e);
      if (subset.empty() && !baseline.empty())
        b.warn(fmt::format("model '{}' has no '{}' records", m.name, e));
      for (std::size_t a = 0; a < config.attributes.size(); ++a) {
        const auto& attr = config.attributes[a];
        auto id = (subset.empty() || !base_ids[a]) ? std::nullopt
                                                   : b.estimate(subset, m, e, attr);
        if (!id) {
          b.absent(m, attr.name(), e, kl_only);
          continue;
        }
        b.rows(m, attr.name(), e, kl_only, *id, *base_ids[a]);

        const auto& pe = report.distributions.at(*id);
        const auto& p0 = report.distributions.at(*base_ids[a]);
        auto dp = delta_p(pe, p0);
        auto p0_floor = additive ? smooth(p0, config.smoothing) : p0;
        for (std::size_t c = 0; c < attr.size(); ++c) {
          try {
            double term = emotion_category_kl(pe[c], p0_floor[c], config.log_base,
                                              config.smoothing);
            report.shifts.push_back({m.name, e, attr.name(), attr.label(c), dp[c], term, 1});
          } catch (const Error& err) {
            b.warn(fmt::format("{} {} {} {}: {}", m.name, attr.name(), e, attr.label(c),
                               err.what()));
          }
        }
      }
    }
  }

  // Group means over the per-model shifts, keyed by (emotion, attribute, category).
  std::map<std::string, ModelOrigin, std::less<>> origin;
  for (const auto& m : models) origin[m.name] = m.origin;
  for (const auto& group : b.group_names()) {
    for (const auto& e : emotions) {
      for (const auto& attr : config.attributes) {
        for (std::size_t c = 0; c < attr.size(); ++c) {
          CategoryShift sum{group, e, attr.name(), attr.label(c), 0.0, 0.0, 0};
          for (const auto& s : report.shifts)
            if (s.emotion == e && s.attribute == attr.name() && s.category == attr.label(c) &&
                Builder::in_group(group, origin.at(s.scope))) {
              sum.delta_p += s.delta_p;
              sum.category_kl += s.category_kl;
              ++sum.members;
            }
          if (sum.members == 0) continue;
          sum.delta_p /= static_cast<double>(sum.members);
          sum.category_kl /= static_cast<double>(sum.members);
          report.group_shifts.push_back(std::move(sum));
        }
      }
    }
  }

  for (const auto& e : emotions) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& r : report.rows)
      if (r.condition == e && r.value) {
        total += r.value->value;
        ++n;
      }
    if (n > 0) report.ordering.push_back({e, total / static_cast<double>(n)});
  }
  std::sort(report.ordering.begin(), report.ordering.end(),
            [](const EmotionRank& x, const EmotionRank& y) {
              if (x.mean_kl != y.mean_kl) return x.mean_kl > y.mean_kl;
              return x.emotion < y.emotion;
            });
  return b.finish();
}

DivergenceReport run_pairwise_comparison(std::span<const AttributeRecord> records_a,
                                         std::span<const AttributeRecord> records_b,
                                         const AuditConfig& config,
                                         const ComparisonLabels& labels) {
  if (records_a.empty()) throw Error(fmt::format("comparison side '{}' has no records", labels.a));
  if (records_b.empty()) throw Error(fmt::format("comparison side '{}' has no records", labels.b));
  if (labels.a == labels.b || labels.a.empty() || labels.b.empty())
    throw Error("comparison labels must be distinct and non-empty");

  Builder b(ReportKind::comparison, config);
  auto& report = b.report();
  report.reference = labels.a;
  auto condition = fmt::format("{}-vs-{}", labels.b, labels.a);
  constexpr std::array<Metric, 1> js_only{Metric::js};
  const auto& components = config.joint_components;
  std::string joint_name = JointScheme(components).name();

  auto compare = [&](const ModelInfo& m, std::span<const AttributeRecord> ra,
                     std::span<const AttributeRecord> rb) {
    for (const auto& attr : config.attributes) {
      auto ia = b.estimate(ra, m, labels.a, attr);
      auto ib = b.estimate(rb, m, labels.b, attr);
      if (ia && ib) {
        b.rows(m, attr.name(), condition, js_only, *ib, *ia);
      } else {
        b.absent(m, attr.name(), condition, js_only);
      }
    }
    auto ja = b.keep(records_id(m.name, labels.a, joint_name), estimate_joint(ra, components));
    auto jb = b.keep(records_id(m.name, labels.b, joint_name), estimate_joint(rb, components));
    b.rows(m, kJointAttribute, condition, js_only, jb, ja);
    return std::pair{ja, jb};
  };

  auto [ja, jb] = compare({std::string(kPooledModel), ModelOrigin::other}, records_a, records_b);

  const auto& pa = report.distributions.at(ja);
  const auto& pb = report.distributions.at(jb);
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pb[i] - pa[i] != 0.0) cells.push_back(i);
  std::stable_sort(cells.begin(), cells.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(pb[x] - pa[x]) > std::abs(pb[y] - pa[y]);
  });
  if (cells.size() > config.top_k) cells.resize(config.top_k);
  for (auto i : cells)
    report.top_shifts.push_back({pa.scheme().cell_label(i), pa[i], pb[i], pb[i] - pa[i]});

  auto models_b = sorted_models(records_b);
  for (const auto& m : sorted_models(records_a)) {
    auto it = std::find_if(models_b.begin(), models_b.end(),
                           [&](const ModelInfo& x) { return x.name == m.name; });
    if (it == models_b.end()) continue;
    RecordSelector s;
    s.model = m.name;
    compare(m, filter_records(records_a, s), filter_records(records_b, s));
  }
  return b.finish();
}

DivergenceValue recompute(const DivergenceReport& report, const ReportRow& row) {
  if (!row.value) throw Error("row has no value to recompute");
  const auto& p = report.distribution(row.value->numerator_id);
  const auto& q = report.distribution(row.value->denominator_id);
  auto v = compute(row.metric, p, q, report.log_base, report.smoothing);
  v.numerator_id = row.value->numerator_id;
  v.denominator_id = row.value->denominator_id;
  return v;
}

}  // namespace biasaudit
