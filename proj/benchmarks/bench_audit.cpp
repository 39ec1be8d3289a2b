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

#include <vector>

#include <benchmark/benchmark.h>

#include "biasaudit/audit.hpp"
#include "biasaudit/sampling.hpp"

using namespace biasaudit;

namespace {

const JointScheme& storage() {
  static const JointScheme s({schemes::gender2(), schemes::race5(), schemes::age5()});
  return s;
}

Distribution uniform_spec() { return Distribution(storage(), std::vector<double>(50, 0.02)); }

std::vector<AttributeRecord> corpus(std::size_t models, std::size_t per_condition) {
  std::vector<AttributeRecord> out;
  std::uint64_t seed = 0;
  for (std::size_t m = 0; m < models; ++m)
    for (const char* e : {"neutral", "happy", "sad", "angry", "surprised", "disgusted", "fearful"}) {
      RecordTemplate t;
      t.model = "model-" + std::to_string(m);
      t.model_origin = m % 2 ? ModelOrigin::chinese : ModelOrigin::western;
      t.prompt_emotion = e;
      auto part = sample_records(uniform_spec(), t, per_condition, ++seed);
      out.insert(out.end(), part.begin(), part.end());
    }
  return out;
}

void BM_Sample(benchmark::State& state) {
  auto spec = uniform_spec();
  auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_records(spec, {}, n, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Arg(1000)->Arg(100000);

void BM_EstimateJoint(benchmark::State& state) {
  auto records = sample_records(uniform_spec(), {}, static_cast<std::size_t>(state.range(0)), 9);
  std::vector<CategoryScheme> comps{schemes::gender2(), schemes::race4(), schemes::age3()};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_joint(records, comps));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateJoint)->Arg(1000)->Arg(100000);

void BM_IntersectionalAudit(benchmark::State& state) {
  auto records = corpus(8, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_intersectional_audit(records, AuditConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_IntersectionalAudit)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EmotionAudit(benchmark::State& state) {
  auto records = corpus(8, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_emotion_shift_audit(records, AuditConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_EmotionAudit)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
