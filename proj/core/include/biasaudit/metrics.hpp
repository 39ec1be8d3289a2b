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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/distribution.hpp"

namespace biasaudit {

enum class LogBase { two, natural };
enum class Metric { kl, js, tvd };

std::string_view to_string(LogBase base);
std::string_view to_string(Metric metric);
LogBase parse_log_base(std::string_view text);
Metric parse_metric(std::string_view text);

/// A divergence together with everything needed to reproduce it.
struct DivergenceValue {
  Metric metric;
  double value;
  LogBase log_base = LogBase::two;
  /// Smoothing actually applied to the denominator; none when not needed.
  SmoothingPolicy smoothing;
  std::string numerator_id;
  std::string denominator_id;

  friend bool operator==(const DivergenceValue&, const DivergenceValue&) = default;
};

enum class Severity { minor, moderate, large, extreme };

std::string_view to_string(Severity severity);
Severity parse_severity(std::string_view text);

/// A TVD band [lower, upper); the extreme band also includes 1.
struct SeverityBand {
  Severity band;
  double lower;
  double upper;

  friend bool operator==(const SeverityBand&, const SeverityBand&) = default;
};

/// minor [0, 0.1), moderate [0.1, 0.5), large [0.5, 0.8), extreme [0.8, 1].
std::span<const SeverityBand> severity_bands();
SeverityBand classify_severity(double tvd_value);

/// Returns `q` itself when every cell with p > 0 has q > 0; otherwise `q`
/// smoothed by `policy`. Throws "KL undefined, zero denominator cell <label>"
/// when smoothing is needed but the policy is none.
Distribution prepare_denominator(const Distribution& p, const Distribution& q,
                                 const SmoothingPolicy& policy, SmoothingPolicy* applied = nullptr);

/// KL(p || q) = sum p log(p / q), with 0 log(0 / q) = 0.
DivergenceValue kl(const Distribution& p, const Distribution& q, LogBase base = LogBase::two,
                   const SmoothingPolicy& smoothing = SmoothingPolicy::epsilon_floor());

/// Jensen-Shannon divergence through the mixture m = (p + q) / 2.
DivergenceValue js(const Distribution& p, const Distribution& q, LogBase base = LogBase::two);

/// Half the L1 distance.
DivergenceValue tvd(const Distribution& p, const Distribution& q);

/// kl over the cells of a joint scheme (rank >= 2).
DivergenceValue intersectional_kl(const Distribution& p_emotion, const Distribution& p_neutral,
                                  LogBase base = LogBase::two,
                                  const SmoothingPolicy& smoothing = SmoothingPolicy::epsilon_floor());

/// js over the cells of a joint scheme (rank >= 2).
DivergenceValue intersectional_js(const Distribution& p_emotion, const Distribution& p_neutral,
                                  LogBase base = LogBase::two);

/// Signed single-category term p_e log(p_e / p_e0). A zero baseline with
/// p_e > 0 is floored to epsilon under epsilon_floor; other policies throw.
double emotion_category_kl(double p_emotion, double p_neutral, LogBase base = LogBase::two,
                           const SmoothingPolicy& smoothing = SmoothingPolicy::epsilon_floor());

/// Per-cell p_e - p_e0.
std::vector<double> delta_p(const Distribution& p_emotion, const Distribution& p_neutral);

namespace detail {

double kl_sum(std::span<const double> p, std::span<const double> q, LogBase base);
double js_sum(std::span<const double> p, std::span<const double> q, LogBase base);
double tvd_sum(std::span<const double> p, std::span<const double> q);

}  // namespace detail

}  // namespace biasaudit
