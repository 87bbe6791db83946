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

#ifndef HALLUSTAT_METRICS_HPP_
#define HALLUSTAT_METRICS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "hallustat/ingest.hpp"

namespace hallustat {

enum class MetricKind { kLogProb, kEntropy };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::kLogProb, MetricKind::kEntropy};

std::string_view to_string(MetricKind kind);  // "logprob" / "entropy"
MetricKind parse_metric_kind(std::string_view text);

/// Mean gold-token log probability over the example's positions.
double mean_logprob(const ExamplePoint& point);

/// Mean per-position predictive entropy.
double mean_entropy(const ExamplePoint& point);

double metric_value(const ExamplePoint& point, MetricKind kind);

struct MetricEntry {
  std::string id;
  Label label = Label::kUnlabeled;
  double value = 0.0;
};

// One scalar per example, in collection order.
struct MetricSample {
  MetricKind kind = MetricKind::kLogProb;
  std::vector<MetricEntry> entries;

  std::vector<double> values() const;
  std::vector<double> values_for(Label label) const;
};

/// Throws PreconditionError on an empty collection.
MetricSample compute_metric(const ExampleCollection& collection, MetricKind kind);

}  // namespace hallustat

#endif  // HALLUSTAT_METRICS_HPP_
