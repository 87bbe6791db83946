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

#include "hallustat/metrics.hpp"

#include <fmt/format.h>

#include "hallustat/error.hpp"

namespace hallustat {

std::string_view to_string(MetricKind kind) {
  return kind == MetricKind::kLogProb ? "logprob" : "entropy";
}

MetricKind parse_metric_kind(std::string_view text) {
  if (text == "logprob") return MetricKind::kLogProb;
  if (text == "entropy") return MetricKind::kEntropy;
  throw UsageError(fmt::format("unknown metric '{}' (expected logprob or entropy)", text));
}

double mean_logprob(const ExamplePoint& point) {
  double sum = 0.0;
  for (const TokenScore& t : point.tokens) sum += t.logp_gold;
  return sum / static_cast<double>(point.tokens.size());
}

double mean_entropy(const ExamplePoint& point) {
  double sum = 0.0;
  for (const TokenScore& t : point.tokens) sum += t.entropy;
  return sum / static_cast<double>(point.tokens.size());
}

double metric_value(const ExamplePoint& point, MetricKind kind) {
  return kind == MetricKind::kLogProb ? mean_logprob(point) : mean_entropy(point);
}

std::vector<double> MetricSample::values() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const MetricEntry& e : entries) out.push_back(e.value);
  return out;
}

std::vector<double> MetricSample::values_for(Label label) const {
  std::vector<double> out;
  for (const MetricEntry& e : entries) {
    if (e.label == label) out.push_back(e.value);
  }
  return out;
}

MetricSample compute_metric(const ExampleCollection& collection, MetricKind kind) {
  if (collection.empty()) {
    throw PreconditionError(fmt::format("cannot compute {} on an empty collection{}",
                                        to_string(kind),
                                        collection.source.empty()
                                            ? std::string()
                                            : " (" + collection.source + ")"));
  }
  MetricSample sample;
  sample.kind = kind;
  sample.entries.reserve(collection.size());
  for (const ExamplePoint& point : collection.points) {
    sample.entries.push_back({point.id, point.label, metric_value(point, kind)});
  }
  return sample;
}

}  // namespace hallustat
