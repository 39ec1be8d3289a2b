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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "biasaudit/metrics.hpp"

using namespace biasaudit;

namespace {

CategoryScheme cells(std::size_t k) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back("c" + std::to_string(i));
  return CategoryScheme("k", AttributeKind::race, labels);
}

Distribution random_dist(const JointScheme& s, std::mt19937_64& rng, bool zeros) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(s.size());
  double total = 0.0;
  for (auto& x : p) {
    x = zeros && u(rng) < 0.25 ? 0.0 : u(rng) + 1e-3;
    total += x;
  }
  for (auto& x : p) x /= total;
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) head += p[i];
  p.back() = std::max(0.0, 1.0 - head);
  return Distribution(s, p);
}

void BM_Kl(benchmark::State& state) {
  JointScheme s(cells(static_cast<std::size_t>(state.range(0))));
  std::mt19937_64 rng(1);
  auto p = random_dist(s, rng, false);
  auto q = random_dist(s, rng, state.range(1) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(kl(p, q));
}
BENCHMARK(BM_Kl)->ArgsProduct({{2, 24, 200}, {0, 1}});

void BM_Js(benchmark::State& state) {
  JointScheme s(cells(static_cast<std::size_t>(state.range(0))));
  std::mt19937_64 rng(2);
  auto p = random_dist(s, rng, true);
  auto q = random_dist(s, rng, true);
  for (auto _ : state) benchmark::DoNotOptimize(js(p, q));
}
BENCHMARK(BM_Js)->Arg(2)->Arg(24)->Arg(200);

void BM_Tvd(benchmark::State& state) {
  JointScheme s(cells(static_cast<std::size_t>(state.range(0))));
  std::mt19937_64 rng(3);
  auto p = random_dist(s, rng, true);
  auto q = random_dist(s, rng, true);
  for (auto _ : state) benchmark::DoNotOptimize(tvd(p, q));
}
BENCHMARK(BM_Tvd)->Arg(2)->Arg(24)->Arg(200);

}  // namespace
