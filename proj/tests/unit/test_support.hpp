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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biasaudit/records.hpp"

namespace testing_support {

inline std::filesystem::path test_dir() { return BIASAUDIT_TEST_DIR; }
inline std::filesystem::path fixture(const std::string& name) {
  return test_dir() / "fixtures" / name;
}
inline std::filesystem::path golden(const std::string& name) {
  return test_dir() / "golden" / name;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline biasaudit::AttributeRecord make_record(std::string id, std::string gender,
                                              std::string race, std::string age,
                                              std::string model = "flux",
                                              std::string emotion = "neutral") {
  biasaudit::AttributeRecord r;
  r.image_id = std::move(id);
  r.model = std::move(model);
  r.model_origin = biasaudit::ModelOrigin::western;
  r.prompt_emotion = std::move(emotion);
  r.gender = std::move(gender);
  r.race = std::move(race);
  r.age = std::move(age);
  return r;
}

/// Random probability vector; roughly a third of the draws put zeros in.
inline std::vector<double> random_probs(std::mt19937_64& rng, std::size_t k,
                                        bool full_support = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(k);
  double total = 0.0;
  bool sparse = !full_support && u(rng) < 0.33;
  for (auto& x : p) {
    x = (sparse && u(rng) < 0.3) ? 0.0 : u(rng) + 1e-3;
    total += x;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& x : p) x /= total;
  // Exact normalization keeps Distribution's 1e-12 check happy.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) s += p[i];
  p[k - 1] = std::max(0.0, 1.0 - s);
  return p;
}

/// Scratch directory under the build tree, emptied on creation.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("biasaudit-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
