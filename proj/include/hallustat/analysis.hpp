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

#ifndef HALLUSTAT_ANALYSIS_HPP_
#define HALLUSTAT_ANALYSIS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hallustat/diststats.hpp"
#include "hallustat/ingest.hpp"
#include "hallustat/metrics.hpp"

namespace hallustat {

inline constexpr double kDefaultAlpha = 0.01;

// Identifies one (model, data set, metric) cell.
struct CellMeta {
  std::string source;
  std::string model;
  std::string dataset;
  std::string scoring_mode;
  MetricKind metric = MetricKind::kLogProb;
};

/// Fills model/dataset/scoring_mode from the file header when present, else
/// from the first point's meta, else from the file stem of `source`.
CellMeta cell_meta_for(const ExampleCollection& collection, MetricKind metric);

struct DistReport {
  CellMeta meta;
  KsResult ks;
  double wasserstein = 0.0;
  double mean_hall = 0.0;
  double mean_ent = 0.0;
  std::size_t n_hall = 0;
  std::size_t n_ent = 0;
  double alpha = kDefaultAlpha;
  bool significant = false;  // ks.p_value < alpha
};

/// Hallucinated-vs-Entailed comparison of one metric on one collection.
/// Throws PreconditionError if either label group is empty or alpha is not
/// in (0, 1).
DistReport distinguishability(const ExampleCollection& collection, MetricKind kind,
                              double alpha = kDefaultAlpha);

/// Same, starting from an already computed metric sample.
DistReport distinguishability(const MetricSample& sample, CellMeta meta,
                              double alpha = kDefaultAlpha);

struct SummaryRow {
  std::string group;
  std::size_t significant = 0;
  std::size_t total = 0;
  double ks_mean = 0.0;
  double ks_std = 0.0;  // population standard deviation

  double sig_ratio() const {
    return static_cast<double>(significant) / static_cast<double>(total);
  }
};

using GroupKey = std::function<std::string(const DistReport&)>;

/// Rows come back sorted by group key. Throws PreconditionError on empty input.
std::vector<SummaryRow> summarize(std::span<const DistReport> reports, const GroupKey& group_by);

/// "88.33%" style rendering of a ratio, two decimals.
std::string format_percent(double ratio);
/// "88.33% (53 / 60)".
std::string format_sig(const SummaryRow& row);

struct RelativeEntry {
  std::string key;
  double wasserstein = 0.0;
  double relative = 0.0;
};

struct RelativeSeries {
  std::string baseline;
  std::string dataset;
  MetricKind metric = MetricKind::kLogProb;
  std::vector<RelativeEntry> entries;
};

/// W_k / W_baseline for reports sharing (dataset, metric), in input order.
/// Entries are keyed by model name.
RelativeSeries relative_series(std::span<const DistReport> reports, std::size_t baseline_index);

// Binning: Freedman-Diaconis by default, or a fixed count over the data
// range or an explicit [lo, hi].
struct FreedmanDiaconis {};
struct FixedBins {
  std::size_t count = 10;
};
struct FixedRangeBins {
  std::size_t count = 10;
  double lo = 0.0;
  double hi = 1.0;
};
using BinSpec = std::variant<FreedmanDiaconis, FixedBins, FixedRangeBins>;

/// Accepts "fd", "<count>" or "<count>:<lo>:<hi>". Throws UsageError.
BinSpec parse_bin_spec(const std::string& text);

inline constexpr std::size_t kFallbackBins = 10;
inline constexpr std::size_t kMaxBins = 10000;

struct Histogram {
  std::vector<double> edges;        // size() == frequencies.size() + 1
  std::vector<double> frequencies;  // relative frequencies, sum to 1
  double mean = 0.0;
};

/// Bins are [e_k, e_{k+1}) except the last, which also includes its right
/// edge. A zero-width data range is widened to [v - 0.5, v + 0.5].
Histogram histogram(std::span<const double> values, const BinSpec& bins = FreedmanDiaconis{});

}  // namespace hallustat

#endif  // HALLUSTAT_ANALYSIS_HPP_
