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

// Per-example loss weights from a frozen reference model's metrics.
//
// Each training example gets a raw weight: its mean LogProb as-is, or its
// mean Entropy negated, so that confident and low-uncertainty examples weigh
// more. The raw weights are pushed through a softmax over the whole training
// set and scaled by N, which keeps the total loss at the unweighted scale.

#ifndef HALLUSTAT_WEIGHTING_HPP_
#define HALLUSTAT_WEIGHTING_HPP_

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hallustat/ingest.hpp"
#include "hallustat/metrics.hpp"

namespace hallustat {

struct WeightEntry {
  std::string id;
  double weight = 1.0;
};

struct WeightVector {
  MetricKind mode = MetricKind::kEntropy;
  std::string reference_model;
  std::vector<WeightEntry> entries;

  std::size_t size() const { return entries.size(); }
  double sum() const;
};

/// Entropy -> -value, LogProb -> value. Throws ValidationError if non-finite.
double raw_weight(double metric_value, MetricKind mode);

/// N * softmax(raw / temperature), with max-subtraction. temperature = 1 is
/// the plain algorithm; other values are an extension for flattening or
/// sharpening the distribution.
///
/// Throws PreconditionError on empty input, a non-positive temperature, or
/// when the spread of raw values is so wide that some weight underflows to
/// zero. Throws ValidationError on non-finite input.
std::vector<double> normalize_weights(std::span<const double> raw, double temperature = 1.0);

/// Weights for every point of `collection`, in collection order. The token
/// scores must come from the reference model, not from the model being trained.
WeightVector compute_weights(const ExampleCollection& collection, MetricKind mode,
                             double temperature = 1.0);

// Weight file: one {"id","weight","mode","reference_model"} object per line,
// then a footer {"footer":true,"n":N,"sum":S}.
void write_weight_file(std::ostream& out, const WeightVector& weights);

/// Parses and checks a weight file: footer present, n matches, the recomputed
/// sum matches the footer sum within 1e-9 * N, and every weight is finite and
/// positive. Throws DataError otherwise.
WeightVector read_weight_file(std::istream& in);

inline constexpr double kWeightSumTolerance = 1e-9;

}  // namespace hallustat

#endif  // HALLUSTAT_WEIGHTING_HPP_
