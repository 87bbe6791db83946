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

#include "hallustat/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>

#include <fmt/format.h>

#include "hallustat/error.hpp"

namespace hallustat {

namespace {

double arithmetic_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

CellMeta cell_meta_for(const ExampleCollection& collection, MetricKind metric) {
  CellMeta meta;
  meta.source = collection.source;
  meta.metric = metric;
  if (collection.header) {
    meta.model = collection.header->model;
    meta.dataset = collection.header->dataset;
    meta.scoring_mode = std::string(to_string(collection.header->scoring_mode));
    return meta;
  }
  if (!collection.empty()) {
    const auto& first = collection.points.front().meta;
    if (auto it = first.find("model"); it != first.end()) meta.model = it->second;
    if (auto it = first.find("dataset"); it != first.end()) meta.dataset = it->second;
  }
  const std::string stem = std::filesystem::path(collection.source).stem().string();
  if (meta.model.empty()) meta.model = stem;
  if (meta.dataset.empty()) meta.dataset = stem;
  return meta;
}

DistReport distinguishability(const MetricSample& sample, CellMeta meta, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw PreconditionError(fmt::format("alpha must lie in (0, 1) (got {})", alpha));
  }
  std::vector<double> hall = sample.values_for(Label::kHallucinated);
  std::vector<double> ent = sample.values_for(Label::kEntailed);
  const std::string where = meta.source.empty() ? std::string() : " in " + meta.source;
  if (hall.empty()) {
    throw PreconditionError(fmt::format("no 'hallucinated' points{}", where));
  }
  if (ent.empty()) {
    throw PreconditionError(fmt::format("no 'entailed' points{}", where));
  }

  DistReport report;
  report.meta = std::move(meta);
  report.meta.metric = sample.kind;
  report.mean_hall = arithmetic_mean(hall);
  report.mean_ent = arithmetic_mean(ent);
  report.n_hall = hall.size();
  report.n_ent = ent.size();

  const Ecdf hall_cdf(std::move(hall));
  const Ecdf ent_cdf(std::move(ent));
  report.ks = ks_test(hall_cdf, ent_cdf);
  report.wasserstein = wasserstein1(hall_cdf, ent_cdf);
  report.alpha = alpha;
  report.significant = report.ks.p_value < alpha;
  return report;
}

DistReport distinguishability(const ExampleCollection& collection, MetricKind kind,
                              double alpha) {
  return distinguishability(compute_metric(collection, kind), cell_meta_for(collection, kind),
                            alpha);
}

std::vector<SummaryRow> summarize(std::span<const DistReport> reports, const GroupKey& group_by) {
  if (reports.empty()) throw PreconditionError("summarize needs at least one report");

  std::map<std::string, std::vector<const DistReport*>> groups;
  for (const DistReport& r : reports) groups[group_by(r)].push_back(&r);

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.group = key;
    row.total = members.size();
    double sum = 0.0;
    for (const DistReport* r : members) {
      if (r->significant) ++row.significant;
      sum += r->ks.statistic;
    }
    row.ks_mean = sum / static_cast<double>(row.total);
    double ss = 0.0;
    for (const DistReport* r : members) {
      const double d = r->ks.statistic - row.ks_mean;
      ss += d * d;
    }
    row.ks_std = std::sqrt(ss / static_cast<double>(row.total));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_percent(double ratio) { return fmt::format("{:.2f}%", ratio * 100.0); }

std::string format_sig(const SummaryRow& row) {
  return fmt::format("{} ({} / {})", format_percent(row.sig_ratio()), row.significant, row.total);
}

RelativeSeries relative_series(std::span<const DistReport> reports, std::size_t baseline_index) {
  if (reports.empty()) throw PreconditionError("relative series needs at least one report");
  if (baseline_index >= reports.size()) {
    throw PreconditionError(fmt::format("baseline index {} out of range for {} reports",
                                        baseline_index, reports.size()));
  }
  const DistReport& base = reports[baseline_index];
  for (const DistReport& r : reports) {
    if (r.meta.dataset != base.meta.dataset || r.meta.metric != base.meta.metric) {
      throw PreconditionError(fmt::format(
          "relative series mixes cells: ({}, {}) vs baseline ({}, {})", r.meta.dataset,
          to_string(r.meta.metric), base.meta.dataset, to_string(base.meta.metric)));
    }
  }
  if (!(base.wasserstein > 0.0)) {
    throw PreconditionError(fmt::format(
        "baseline '{}' has Wasserstein distance {} on ({}, {}); ratios are undefined",
        base.meta.model, base.wasserstein, base.meta.dataset, to_string(base.meta.metric)));
  }

  RelativeSeries series;
  series.baseline = base.meta.model;
  series.dataset = base.meta.dataset;
  series.metric = base.meta.metric;
  series.entries.reserve(reports.size());
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const double w = reports[k].wasserstein;
    // Exact 1.0 for the baseline itself.
    const double rel = k == baseline_index ? 1.0 : w / base.wasserstein;
    series.entries.push_back({reports[k].meta.model, w, rel});
  }
  return series;
}

BinSpec parse_bin_spec(const std::string& text) {
  if (text == "fd") return FreedmanDiaconis{};

  auto parse_count = [&](std::string_view s) {
    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), count);
    if (ec != std::errc() || ptr != s.data() + s.size() || count == 0 || count > kMaxBins) {
      throw UsageError(fmt::format("invalid bin count in '{}'", text));
    }
    return count;
  };
  auto parse_double = [&](std::string_view s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s), &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw UsageError(fmt::format("invalid bin range in '{}'", text));
    }
  };

  const auto first = text.find(':');
  if (first == std::string::npos) return FixedBins{parse_count(text)};
  const auto second = text.find(':', first + 1);
  if (second == std::string::npos) {
    throw UsageError(fmt::format("bin spec '{}' must be fd, N or N:LO:HI", text));
  }
  std::string_view view(text);
  FixedRangeBins spec{parse_count(view.substr(0, first)),
                      parse_double(view.substr(first + 1, second - first - 1)),
                      parse_double(view.substr(second + 1))};
  if (!(spec.lo < spec.hi)) {
    throw UsageError(fmt::format("bin range in '{}' needs LO < HI", text));
  }
  return spec;
}

Histogram histogram(std::span<const double> values, const BinSpec& bins) {
  if (values.empty()) throw PreconditionError("histogram needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw PreconditionError("histogram got a non-finite value");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  double lo = sorted.front();
  double hi = sorted.back();
  std::size_t count = kFallbackBins;

  if (const auto* fixed = std::get_if<FixedRangeBins>(&bins)) {
    if (lo < fixed->lo || hi > fixed->hi) {
      throw PreconditionError(fmt::format(
          "values span [{}, {}] outside the histogram range [{}, {}]", lo, hi, fixed->lo,
          fixed->hi));
    }
    lo = fixed->lo;
    hi = fixed->hi;
    count = fixed->count;
  } else if (const auto* fixed_count = std::get_if<FixedBins>(&bins)) {
    count = fixed_count->count;
  } else {
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    if (iqr > 0.0) {
      const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
      const double n_bins = std::ceil((hi - lo) / width);
      count = static_cast<std::size_t>(std::clamp(n_bins, 1.0, static_cast<double>(kMaxBins)));
    }
  }
  if (count == 0 || count > kMaxBins) {
    throw PreconditionError(fmt::format("bin count must be in [1, {}]", kMaxBins));
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram h;
  h.edges.resize(count + 1);
  const double width = (hi - lo) / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) h.edges[k] = lo + static_cast<double>(k) * width;
  h.edges[count] = hi;

  std::vector<std::size_t> counts(count, 0);
  for (double v : sorted) {
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    auto bin = static_cast<std::size_t>(std::distance(h.edges.begin(), it));
    bin = bin == 0 ? 0 : bin - 1;
    counts[std::min(bin, count - 1)] += 1;
  }
  const double n = static_cast<double>(sorted.size());
  h.frequencies.reserve(count);
  for (std::size_t c : counts) h.frequencies.push_back(static_cast<double>(c) / n);
  h.mean = arithmetic_mean(values);
  return h;
}

}  // namespace hallustat
