// Copyright 2026 The hallustat Authors.
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

// Synthetic token-score files for CLI and acceptance tests.

#ifndef HALLUSTAT_TESTS_FIXTURES_HPP_
#define HALLUSTAT_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hallustat/ingest.hpp"

namespace hallustat::fixtures {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("hallustat-{:016x}", (std::uint64_t{rd()} << 32) | rd());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct SyntheticSpec {
  std::string model = "gpt2";
  std::string dataset = "wow";
  ScoringMode mode = ScoringMode::kCausal;
  std::size_t n_hall = 150;
  std::size_t n_ent = 280;
  std::size_t n_unlabeled = 0;
  // Hallucinated examples get this much extra entropy and lower log-probability per token.
  double shift = 0.4;
  std::uint64_t seed = 1;
};

// Every example has 3-20 tokens with per-token entropy ~ Gamma and a gold
// log-probability that drifts down as entropy rises.
inline std::vector<ExamplePoint> synthetic_points(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> len(3, 20);
  std::gamma_distribution<double> ent(2.0, 0.8);
  std::exponential_distribution<double> noise(2.0);
  std::vector<ExamplePoint> points;
  auto emit = [&](Label label, std::size_t count, double shift) {
    for (std::size_t i = 0; i < count; ++i) {
      ExamplePoint p;
      p.id = fmt::format("{}-{}-{}", spec.dataset, to_string(label), i);
      p.label = label;
      const int n = len(rng);
      for (int j = 0; j < n; ++j) {
        const double e = ent(rng) + shift;
        p.tokens.push_back({-(0.6 * e + noise(rng)), e});
      }
      p.meta["dataset"] = spec.dataset;
      points.push_back(std::move(p));
    }
  };
  emit(Label::kHallucinated, spec.n_hall, spec.shift);
  emit(Label::kEntailed, spec.n_ent, 0.0);
  emit(Label::kUnlabeled, spec.n_unlabeled, 0.0);
  std::shuffle(points.begin(), points.end(), rng);
  return points;
}

inline void write_token_file(const std::string& path, const SyntheticSpec& spec,
                             bool with_header = true) {
  std::ofstream out(path, std::ios::binary);
  if (with_header) out << serialize_header({spec.mode, spec.model, spec.dataset}) << '\n';
  for (const ExamplePoint& p : synthetic_points(spec)) out << serialize_record(p) << '\n';
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace hallustat::fixtures

#endif  // HALLUSTAT_TESTS_FIXTURES_HPP_
