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

#ifndef HALLUSTAT_CLI_HPP_
#define HALLUSTAT_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "hallustat/analysis.hpp"
#include "hallustat/metrics.hpp"
#include "hallustat/records.hpp"

namespace hallustat::cli {

enum class Command { kAnalyze, kSummarize, kRelative, kWeights, kHistogram, kMetrics };

struct RunConfig {
  Command command = Command::kAnalyze;
  std::vector<std::string> inputs;
  std::vector<MetricKind> metrics = {MetricKind::kLogProb, MetricKind::kEntropy};
  double alpha = kDefaultAlpha;
  BinSpec bins = FreedmanDiaconis{};
  OutputFormat format = OutputFormat::kCsv;
  std::string out_path;  // empty: write to the given stream
  std::string baseline;
  std::vector<std::string> group_by = {"scoring_mode", "metric"};
  MetricKind weights_mode = MetricKind::kEntropy;
  double temperature = 1.0;
  unsigned threads = 1;
};

/// Thread cap from HALLUSTAT_THREADS, falling back to the hardware count.
unsigned threads_from_env();

/// Throws UsageError when alpha, temperature or the input list is invalid.
void validate(const RunConfig& cfg);

// Each command writes its records to `out` and diagnostics to `err`, and
// throws hallustat::Error on failure.
void cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_summarize(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_relative(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_weights(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_histogram(const RunConfig& cfg, std::ostream& out, std::ostream& err);
void cmd_metrics(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs one command and maps errors onto exit codes: 0 success, 1 usage,
/// 2 data/validation, 3 statistical precondition. Output is buffered and only
/// written (to `out` or cfg.out_path) once the command succeeds.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hallustat::cli

#endif  // HALLUSTAT_CLI_HPP_
