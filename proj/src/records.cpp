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

#include "hallustat/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "hallustat/error.hpp"
#include "json.hpp"

namespace hallustat {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kReportColumns[] = {
    "source",  "model",    "dataset",      "scoring_mode", "metric",
    "n_hall",  "n_ent",    "mean_hall",    "mean_ent",     "ks_statistic",
    "p_value", "wasserstein", "alpha",     "significant"};

std::string num(double v) { return fmt::format("{}", v); }

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

void write_csv_header(std::ostream& out, std::span<const std::string_view> names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
}

void reject_table(OutputFormat format, std::string_view what) {
  if (format == OutputFormat::kTable) {
    throw UsageError(fmt::format("table format is only available for summaries, not {}", what));
  }
}

double parse_double_field(std::string_view text, std::string_view column, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(fmt::format("line {}: column '{}' is not a number: '{}'", line, column, text),
                     line);
  }
  return v;
}

std::size_t parse_count_field(std::string_view text, std::string_view column, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(
        fmt::format("line {}: column '{}' is not a count: '{}'", line, column, text), line);
  }
  return v;
}

bool parse_bool_field(std::string_view text, std::size_t line) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ParseError(fmt::format("line {}: 'significant' must be true or false", line), line);
}

Json report_to_json(const DistReport& r) {
  Json j;
  j["source"] = r.meta.source;
  j["model"] = r.meta.model;
  j["dataset"] = r.meta.dataset;
  j["scoring_mode"] = r.meta.scoring_mode;
  j["metric"] = std::string(to_string(r.meta.metric));
  j["n_hall"] = r.n_hall;
  j["n_ent"] = r.n_ent;
  j["mean_hall"] = r.mean_hall;
  j["mean_ent"] = r.mean_ent;
  j["ks_statistic"] = r.ks.statistic;
  j["p_value"] = r.ks.p_value;
  j["wasserstein"] = r.wasserstein;
  j["alpha"] = r.alpha;
  j["significant"] = r.significant;
  return j;
}

void check_report(const DistReport& r, std::size_t line) {
  if (r.n_hall == 0 || r.n_ent == 0) {
    throw ValidationError(fmt::format("line {}: report needs n_hall, n_ent >= 1", line), line);
  }
  if (!(r.ks.statistic >= 0.0 && r.ks.statistic <= 1.0) ||
      !(r.ks.p_value >= 0.0 && r.ks.p_value <= 1.0) || !(r.wasserstein >= 0.0) ||
      !std::isfinite(r.wasserstein) || !(r.alpha > 0.0 && r.alpha < 1.0)) {
    throw ValidationError(fmt::format("line {}: report field out of range", line), line);
  }
  if (r.significant != (r.ks.p_value < r.alpha)) {
    throw ValidationError(
        fmt::format("line {}: 'significant' disagrees with p_value < alpha", line), line);
  }
}

}  // namespace

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "jsonl") return OutputFormat::kJsonl;
  if (text == "table") return OutputFormat::kTable;
  throw UsageError(fmt::format("unknown format '{}' (expected csv, jsonl or table)", text));
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

void write_reports(std::ostream& out, std::span<const DistReport> reports, OutputFormat format) {
  reject_table(format, "reports");
  if (format == OutputFormat::kJsonl) {
    for (const DistReport& r : reports) out << report_to_json(r).dump() << '\n';
    return;
  }
  write_csv_header(out, kReportColumns);
  for (const DistReport& r : reports) {
    const std::string fields[] = {r.meta.source,
                                  r.meta.model,
                                  r.meta.dataset,
                                  r.meta.scoring_mode,
                                  std::string(to_string(r.meta.metric)),
                                  std::to_string(r.n_hall),
                                  std::to_string(r.n_ent),
                                  num(r.mean_hall),
                                  num(r.mean_ent),
                                  num(r.ks.statistic),
                                  num(r.ks.p_value),
                                  num(r.wasserstein),
                                  num(r.alpha),
                                  r.significant ? "true" : "false"};
    write_csv_row(out, fields);
  }
}

std::vector<DistReport> read_reports(std::istream& in, const std::string& source) {
  std::vector<DistReport> reports;
  std::string line;
  std::size_t line_number = 0;
  std::map<std::string, std::string> row;  // column -> text
  std::vector<std::string> header;
  bool jsonl = false;
  bool sniffed = false;

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!sniffed) {
      sniffed = true;
      jsonl = line.front() == '{';
      if (!jsonl) {
        header = split_csv_line(line);
        for (std::string_view col : kReportColumns) {
          if (std::find(header.begin(), header.end(), col) == header.end()) {
            throw ParseError(fmt::format("{}: report CSV lacks column '{}'", source, col), 1);
          }
        }
        continue;
      }
    }

    row.clear();
    if (jsonl) {
      Json doc;
      try {
        doc = Json::parse(line);
      } catch (const Json::parse_error& e) {
        throw ParseError(fmt::format("{}: line {}: malformed report: {}", source, line_number,
                                     e.what()),
                         line_number);
      }
      if (!doc.is_object()) {
        throw ParseError(fmt::format("{}: line {}: report is not an object", source, line_number),
                         line_number);
      }
      for (std::string_view col : kReportColumns) {
        auto it = doc.find(std::string(col));
        if (it == doc.end()) {
          throw ParseError(
              fmt::format("{}: line {}: report lacks '{}'", source, line_number, col),
              line_number);
        }
        if (it->is_string()) {
          row[std::string(col)] = it->get<std::string>();
        } else if (it->is_boolean()) {
          row[std::string(col)] = it->get<bool>() ? "true" : "false";
        } else if (it->is_number_unsigned() || it->is_number_integer()) {
          row[std::string(col)] = it->dump();
        } else if (it->is_number()) {
          row[std::string(col)] = num(it->get<double>());
        } else {
          throw ParseError(
              fmt::format("{}: line {}: bad value for '{}'", source, line_number, col),
              line_number);
        }
      }
    } else {
      std::vector<std::string> fields;
      try {
        fields = split_csv_line(line);
      } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: line {}: {}", source, line_number, e.what()),
                         line_number);
      }
      if (fields.size() != header.size()) {
        throw ParseError(fmt::format("{}: line {}: expected {} columns, got {}", source,
                                     line_number, header.size(), fields.size()),
                         line_number);
      }
      for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = std::move(fields[i]);
    }

    DistReport r;
    try {
      r.meta.source = row["source"];
      r.meta.model = row["model"];
      r.meta.dataset = row["dataset"];
      r.meta.scoring_mode = row["scoring_mode"];
      r.meta.metric = parse_metric_kind(row["metric"]);
      r.n_hall = parse_count_field(row["n_hall"], "n_hall", line_number);
      r.n_ent = parse_count_field(row["n_ent"], "n_ent", line_number);
      r.mean_hall = parse_double_field(row["mean_hall"], "mean_hall", line_number);
      r.mean_ent = parse_double_field(row["mean_ent"], "mean_ent", line_number);
      r.ks.statistic = parse_double_field(row["ks_statistic"], "ks_statistic", line_number);
      r.ks.p_value = parse_double_field(row["p_value"], "p_value", line_number);
      r.ks.n = r.n_hall;
      r.ks.m = r.n_ent;
      r.wasserstein = parse_double_field(row["wasserstein"], "wasserstein", line_number);
      r.alpha = parse_double_field(row["alpha"], "alpha", line_number);
      r.significant = parse_bool_field(row["significant"], line_number);
      check_report(r, line_number);
    } catch (const UsageError& e) {
      throw ParseError(fmt::format("{}: line {}: {}", source, line_number, e.what()),
                       line_number);
    } catch (const DataError& e) {
      throw ParseError(fmt::format("{}: {}", source, e.what()), e.line());
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows, OutputFormat format) {
  if (format == OutputFormat::kTable) {
    std::size_t width = 5;
    for (const SummaryRow& row : rows) width = std::max(width, row.group.size());
    out << fmt::format("{:<{}}  {:<18}  {}\n", "group", width, "Sig.", "KS");
    for (const SummaryRow& row : rows) {
      out << fmt::format("{:<{}}  {:<18}  {:.4f} ({:.4f})\n", row.group, width, format_sig(row),
                         row.ks_mean, row.ks_std);
    }
    return;
  }
  if (format == OutputFormat::kJsonl) {
    for (const SummaryRow& row : rows) {
      Json j;
      j["group"] = row.group;
      j["sig_ratio"] = format_percent(row.sig_ratio());
      j["sig_counts"] = fmt::format("{} / {}", row.significant, row.total);
      j["ks_mean"] = row.ks_mean;
      j["ks_std"] = row.ks_std;
      out << j.dump() << '\n';
    }
    return;
  }
  out << "group,sig_ratio,sig_counts,ks_mean,ks_std\n";
  for (const SummaryRow& row : rows) {
    const std::string fields[] = {row.group, format_percent(row.sig_ratio()),
                                  fmt::format("{} / {}", row.significant, row.total),
                                  num(row.ks_mean), num(row.ks_std)};
    write_csv_row(out, fields);
  }
}

void write_relative(std::ostream& out, std::span<const RelativeSeries> series,
                    OutputFormat format) {
  reject_table(format, "relative series");
  if (format == OutputFormat::kCsv) out << "dataset,metric,baseline,key,wasserstein,relative\n";
  for (const RelativeSeries& s : series) {
    for (const RelativeEntry& e : s.entries) {
      if (format == OutputFormat::kJsonl) {
        Json j;
        j["dataset"] = s.dataset;
        j["metric"] = std::string(to_string(s.metric));
        j["baseline"] = s.baseline;
        j["key"] = e.key;
        j["wasserstein"] = e.wasserstein;
        j["relative"] = e.relative;
        out << j.dump() << '\n';
      } else {
        const std::string fields[] = {s.dataset, std::string(to_string(s.metric)), s.baseline,
                                      e.key,     num(e.wasserstein),              num(e.relative)};
        write_csv_row(out, fields);
      }
    }
  }
}

void write_histograms(std::ostream& out, std::span<const HistogramRecord> records,
                      OutputFormat format) {
  reject_table(format, "histograms");
  if (format == OutputFormat::kCsv) {
    out << "source,model,dataset,metric,group,bin,left,right,frequency,mean\n";
  }
  for (const HistogramRecord& rec : records) {
    const Histogram& h = rec.histogram;
    if (format == OutputFormat::kJsonl) {
      Json j;
      j["source"] = rec.source;
      j["model"] = rec.model;
      j["dataset"] = rec.dataset;
      j["metric"] = std::string(to_string(rec.metric));
      j["group"] = rec.group;
      j["edges"] = h.edges;
      j["frequencies"] = h.frequencies;
      j["mean"] = h.mean;
      out << j.dump() << '\n';
      continue;
    }
    for (std::size_t k = 0; k < h.frequencies.size(); ++k) {
      const std::string fields[] = {rec.source,         rec.model,
                                    rec.dataset,        std::string(to_string(rec.metric)),
                                    rec.group,          std::to_string(k),
                                    num(h.edges[k]),    num(h.edges[k + 1]),
                                    num(h.frequencies[k]), num(h.mean)};
      write_csv_row(out, fields);
    }
  }
}

void write_metric_dump(std::ostream& out, std::span<const MetricDumpRecord> records,
                       OutputFormat format) {
  reject_table(format, "metric dumps");
  if (format == OutputFormat::kCsv) out << "source,id,label,metric,value\n";
  for (const MetricDumpRecord& rec : records) {
    const std::string metric(to_string(rec.sample.kind));
    for (const MetricEntry& e : rec.sample.entries) {
      if (format == OutputFormat::kJsonl) {
        Json j;
        j["source"] = rec.source;
        j["id"] = e.id;
        j["label"] = std::string(to_string(e.label));
        j["metric"] = metric;
        j["value"] = e.value;
        out << j.dump() << '\n';
      } else {
        const std::string fields[] = {rec.source, e.id, std::string(to_string(e.label)), metric,
                                      num(e.value)};
        write_csv_row(out, fields);
      }
    }
  }
}

}  // namespace hallustat
