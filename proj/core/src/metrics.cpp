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

#include "biasaudit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "biasaudit/error.hpp"

namespace biasaudit {
namespace {

void require_same_scheme(const Distribution& p, const Distribution& q) {
  if (!(p.scheme() == q.scheme()))
    throw Error(fmt::format("scheme mismatch: {} vs {}", p.scheme().name(), q.scheme().name()));
}

void require_joint(const Distribution& p) {
  if (p.scheme().rank() < 2)
    throw Error(fmt::format("intersectional divergence needs a joint scheme, got {}",
                            p.scheme().name()));
}

double log_in(double x, LogBase base) {
  return base == LogBase::two ? std::log2(x) : std::log(x);
}

}  // namespace

std::string_view to_string(LogBase base) { return base == LogBase::two ? "two" : "natural"; }

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kl: return "kl";
    case Metric::js: return "js";
    case Metric::tvd: return "tvd";
  }
  return "kl";
}

LogBase parse_log_base(std::string_view text) {
  if (text == "two" || text == "2") return LogBase::two;
  if (text == "natural" || text == "e") return LogBase::natural;
  throw Error(fmt::format("unknown log base '{}'", text));
}

Metric parse_metric(std::string_view text) {
  if (text == "kl") return Metric::kl;
  if (text == "js") return Metric::js;
  if (text == "tvd") return Metric::tvd;
  throw Error(fmt::format("unknown metric '{}'", text));
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::minor: return "minor";
    case Severity::moderate: return "moderate";
    case Severity::large: return "large";
    case Severity::extreme: return "extreme";
  }
  return "minor";
}

Severity parse_severity(std::string_view text) {
  for (auto s : {Severity::minor, Severity::moderate, Severity::large, Severity::extreme})
    if (to_string(s) == text) return s;
  throw Error(fmt::format("unknown severity '{}'", text));
}

std::span<const SeverityBand> severity_bands() {
  static constexpr std::array<SeverityBand, 4> bands = {{
      {Severity::minor, 0.0, 0.1},
      {Severity::moderate, 0.1, 0.5},
      {Severity::large, 0.5, 0.8},
      {Severity::extreme, 0.8, 1.0},
  }};
  return bands;
}

SeverityBand classify_severity(double tvd_value) {
  if (!(tvd_value >= 0.0 && tvd_value <= 1.0))
    throw Error(fmt::format("TVD {} outside [0, 1]", tvd_value));
  for (const auto& band : severity_bands())
    if (tvd_value < band.upper) return band;
  return severity_bands().back();
}

namespace detail {

double kl_sum(std::span<const double> p, std::span<const double> q, LogBase base) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) total += p[i] * log_in(p[i] / q[i], base);
  return std::max(total, 0.0);
}

double js_sum(std::span<const double> p, std::span<const double> q, LogBase base) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double a = p[i] > 0.0 ? 0.5 * p[i] * log_in(p[i] / m, base) : 0.0;
    const double b = q[i] > 0.0 ? 0.5 * q[i] * log_in(q[i] / m, base) : 0.0;
    total += a + b;
  }
  const double upper = base == LogBase::two ? 1.0 : std::numbers::ln2;
  return std::clamp(total, 0.0, upper);
}

double tvd_sum(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return std::clamp(0.5 * total, 0.0, 1.0);
}

}  // namespace detail

Distribution prepare_denominator(const Distribution& p, const Distribution& q,
                                 const SmoothingPolicy& policy, SmoothingPolicy* applied) {
  require_same_scheme(p, q);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] == 0.0) {
      if (policy.kind == SmoothingPolicy::Kind::none)
        throw Error(fmt::format("KL undefined, zero denominator cell {}", q.scheme().cell_label(i)));
      if (applied) *applied = policy;
      return smooth(q, policy);
    }
  }
  if (applied) *applied = SmoothingPolicy::none();
  return q;
}

DivergenceValue kl(const Distribution& p, const Distribution& q, LogBase base,
                   const SmoothingPolicy& smoothing) {
  SmoothingPolicy applied;
  auto denominator = prepare_denominator(p, q, smoothing, &applied);
  return {Metric::kl, detail::kl_sum(p.probs(), denominator.probs(), base), base, applied, {}, {}};
}

DivergenceValue js(const Distribution& p, const Distribution& q, LogBase base) {
  require_same_scheme(p, q);
  return {Metric::js, detail::js_sum(p.probs(), q.probs(), base), base, {}, {}, {}};
}

DivergenceValue tvd(const Distribution& p, const Distribution& q) {
  require_same_scheme(p, q);
  // Base is irrelevant for TVD; stamped as two for uniform reporting.
  return {Metric::tvd, detail::tvd_sum(p.probs(), q.probs()), LogBase::two, {}, {}, {}};
}

DivergenceValue intersectional_kl(const Distribution& p_emotion, const Distribution& p_neutral,
                                  LogBase base, const SmoothingPolicy& smoothing) {
  require_joint(p_emotion);
  return kl(p_emotion, p_neutral, base, smoothing);
}

DivergenceValue intersectional_js(const Distribution& p_emotion, const Distribution& p_neutral,
                                  LogBase base) {
  require_joint(p_emotion);
  return js(p_emotion, p_neutral, base);
}

double emotion_category_kl(double p_emotion, double p_neutral, LogBase base,
                           const SmoothingPolicy& smoothing) {
  if (!(p_emotion >= 0.0 && p_emotion <= 1.0) || !(p_neutral >= 0.0 && p_neutral <= 1.0))
    throw Error("category probabilities must lie in [0, 1]");
  if (p_emotion == 0.0) return 0.0;
  if (p_neutral == 0.0) {
    switch (smoothing.kind) {
      case SmoothingPolicy::Kind::none:
        throw Error("category KL undefined, zero baseline probability");
      case SmoothingPolicy::Kind::additive:
        throw Error("additive smoothing requires counts");
      case SmoothingPolicy::Kind::epsilon_floor:
        smoothing.validate();
        p_neutral = smoothing.epsilon;
        break;
    }
  }
  return p_emotion * log_in(p_emotion / p_neutral, base);
}

std::vector<double> delta_p(const Distribution& p_emotion, const Distribution& p_neutral) {
  require_same_scheme(p_emotion, p_neutral);
  std::vector<double> out(p_emotion.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p_emotion[i] - p_neutral[i];
  return out;
}

}  // namespace biasaudit
