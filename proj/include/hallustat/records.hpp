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

// Structured output records for the CLI. Every record type has a CSV form
// with a fixed header row and a JSON-lines form whose keys mirror the CSV
// columns one for one.

#ifndef HALLUSTAT_RECORDS_HPP_
#define HALLUSTAT_RECORDS_HPP_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hallustat/analysis.hpp"
#include "hallustat/metrics.hpp"

namespace hallustat {

enum class OutputFormat { kCsv, kJsonl, kTable };

OutputFormat parse_output_format(std::string_view text);

// source,model,dataset,scoring_mode,metric,n_hall,n_ent,mean_hall,mean_ent,
// ks_statistic,p_value,wasserstein,alpha,significant
void write_reports(std::ostream& out, std::span<const DistReport> reports, OutputFormat format);

/// Reads either format back; the format is sniffed from the first line.
std::vector<DistReport> read_reports(std::istream& in, const std::string& source = {});

// group,sig_ratio,sig_counts,ks_mean,ks_std. kTable renders the rows the way
// the KS summary table is usually printed: "88.33% (53 / 60)  0.3144 (0.1097)".
void write_summary(std::ostream& out, std::span<const SummaryRow> rows, OutputFormat format);

// dataset,metric,baseline,key,wasserstein,relative
void write_relative(std::ostream& out, std::span<const RelativeSeries> series,
                    OutputFormat format);

struct HistogramRecord {
  std::string source;
  std::string model;
  std::string dataset;
  MetricKind metric = MetricKind::kLogProb;
  std::string group;  // label name
  Histogram histogram;
};

// CSV: one row per bin (source,model,dataset,metric,group,bin,left,right,
// frequency,mean). JSON lines: one object per histogram with edges and
// frequencies arrays.
void write_histograms(std::ostream& out, std::span<const HistogramRecord> records,
                      OutputFormat format);

struct MetricDumpRecord {
  std::string source;
  MetricSample sample;
};

// source,id,label,metric,value
void write_metric_dump(std::ostream& out, std::span<const MetricDumpRecord> records,
                       OutputFormat format);

/// RFC 4180 style splitting of one CSV line.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

}  // namespace hallustat

#endif  // HALLUSTAT_RECORDS_HPP_
