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

#include "hallustat/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "hallustat/error.hpp"
#include "json.hpp"

namespace hallustat {

using Json = nlohmann::ordered_json;

namespace {

// Neumaier-compensated sum; the exp-sum over up to ~1e5 terms must stay
// accurate well below the 1e-12 shift-invariance tolerance.
double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

std::string reference_model_of(const ExampleCollection& collection) {
  if (collection.header) return collection.header->model;
  if (!collection.empty()) {
    const auto& meta = collection.points.front().meta;
    if (auto it = meta.find("model"); it != meta.end()) return it->second;
  }
  return "unknown";
}

}  // namespace

double WeightVector::sum() const {
  std::vector<double> w;
  w.reserve(entries.size());
  for (const WeightEntry& e : entries) w.push_back(e.weight);
  return compensated_sum(w);
}

double raw_weight(double metric_value, MetricKind mode) {
  if (!std::isfinite(metric_value)) {
    throw ValidationError(fmt::format("raw weight needs a finite metric value (got {})",
                                      metric_value));
  }
  return mode == MetricKind::kEntropy ? -metric_value : metric_value;
}

std::vector<double> normalize_weights(std::span<const double> raw, double temperature) {
  if (raw.empty()) throw PreconditionError("cannot normalize an empty weight vector");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw PreconditionError(fmt::format("temperature must be positive (got {})", temperature));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw ValidationError(fmt::format("raw weight {} is not finite ({})", i, raw[i]));
    }
  }

  std::vector<double> w(raw.begin(), raw.end());
  if (temperature != 1.0) {
    for (double& v : w) v /= temperature;
  }
  const double max = *std::max_element(w.begin(), w.end());
  for (double& v : w) v = std::exp(v - max);

  const double n = static_cast<double>(w.size());
  const double scale = n / compensated_sum(w);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] *= scale;
    if (!(w[i] > 0.0)) {
      throw PreconditionError(fmt::format(
          "weight {} underflows to zero: raw values span more than double range allows "
          "(try a larger --temperature)",
          i));
    }
  }
  return w;
}

WeightVector compute_weights(const ExampleCollection& collection, MetricKind mode,
                             double temperature) {
  const MetricSample sample = compute_metric(collection, mode);
  std::vector<double> raw;
  raw.reserve(sample.entries.size());
  for (const MetricEntry& e : sample.entries) raw.push_back(raw_weight(e.value, mode));
  const std::vector<double> normalized = normalize_weights(raw, temperature);

  WeightVector out;
  out.mode = mode;
  out.reference_model = reference_model_of(collection);
  out.entries.reserve(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    out.entries.push_back({sample.entries[i].id, normalized[i]});
  }
  return out;
}

void write_weight_file(std::ostream& out, const WeightVector& weights) {
  const std::string mode(to_string(weights.mode));
  for (const WeightEntry& e : weights.entries) {
    Json rec;
    rec["id"] = e.id;
    rec["weight"] = e.weight;
    rec["mode"] = mode;
    rec["reference_model"] = weights.reference_model;
    out << rec.dump() << '\n';
  }
  Json footer;
  footer["footer"] = true;
  footer["n"] = weights.entries.size();
  footer["sum"] = weights.sum();
  out << footer.dump() << '\n';
}

WeightVector read_weight_file(std::istream& in) {
  WeightVector weights;
  std::unordered_set<std::string> seen;
  bool have_footer = false;
  bool have_mode = false;
  std::size_t footer_n = 0;
  double footer_sum = 0.0;

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (have_footer) {
      throw ParseError(fmt::format("line {}: content after footer", line_number), line_number);
    }
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(fmt::format("line {}: malformed weight record: {}", line_number, e.what()),
                       line_number);
    }
    try {
      if (rec.contains("footer")) {
        footer_n = rec.at("n").get<std::size_t>();
        footer_sum = rec.at("sum").get<double>();
        have_footer = true;
        continue;
      }
      WeightEntry entry{rec.at("id").get<std::string>(), rec.at("weight").get<double>()};
      const MetricKind mode = parse_metric_kind(rec.at("mode").get<std::string>());
      const std::string ref = rec.at("reference_model").get<std::string>();
      if (!have_mode) {
        weights.mode = mode;
        weights.reference_model = ref;
        have_mode = true;
      } else if (mode != weights.mode || ref != weights.reference_model) {
        throw ValidationError(
            fmt::format("line {}: mode/reference_model differs from earlier records",
                        line_number),
            line_number);
      }
      if (!std::isfinite(entry.weight) || !(entry.weight > 0.0)) {
        throw ValidationError(fmt::format("line {}: weight must be finite and positive",
                                          line_number),
                              line_number);
      }
      if (!seen.insert(entry.id).second) {
        throw ValidationError(fmt::format("line {}: duplicate id '{}'", line_number, entry.id),
                              line_number);
      }
      weights.entries.push_back(std::move(entry));
    } catch (const Json::exception& e) {
      throw ParseError(fmt::format("line {}: bad weight record: {}", line_number, e.what()),
                       line_number);
    } catch (const UsageError& e) {
      throw ParseError(fmt::format("line {}: {}", line_number, e.what()), line_number);
    }
  }

  if (!have_footer) throw ValidationError("weight file has no footer");
  if (footer_n != weights.size()) {
    throw ValidationError(fmt::format("footer says n={} but file has {} weights", footer_n,
                                      weights.size()));
  }
  const double n = static_cast<double>(weights.size());
  const double sum = weights.sum();
  const double tol = kWeightSumTolerance * std::max(1.0, n);
  if (std::fabs(sum - footer_sum) > tol) {
    throw ValidationError(
        fmt::format("weight checksum mismatch: footer sum {} vs recomputed {}", footer_sum, sum));
  }
  if (std::fabs(sum - n) > tol) {
    throw ValidationError(fmt::format("weights sum to {} instead of N={}", sum, weights.size()));
  }
  return weights;
}

}  // namespace hallustat
