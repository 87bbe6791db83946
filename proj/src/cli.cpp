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

#include "hallustat/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <utility>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "hallustat/error.hpp"
#include "hallustat/ingest.hpp"
#include "hallustat/weighting.hpp"

namespace hallustat::cli {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. If several calls
// throw, the exception from the lowest index wins, so failures are reported
// the same way regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<ExampleCollection> load_all(const RunConfig& cfg) {
  std::vector<ExampleCollection> collections(cfg.inputs.size());
  parallel_for(cfg.inputs.size(), cfg.threads, [&](std::size_t i) {
    collections[i] = load_collection_file(cfg.inputs[i]);
  });
  return collections;
}

std::vector<DistReport> load_reports(const RunConfig& cfg) {
  std::vector<DistReport> reports;
  for (const std::string& path : cfg.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path));
    auto part = read_reports(in, path);
    reports.insert(reports.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  return reports;
}

std::string report_field(const DistReport& r, const std::string& field) {
  if (field == "source") return r.meta.source;
  if (field == "model") return r.meta.model;
  if (field == "dataset") return r.meta.dataset;
  if (field == "scoring_mode") return r.meta.scoring_mode;
  if (field == "metric") return std::string(to_string(r.meta.metric));
  throw UsageError(fmt::format("cannot group by '{}'", field));
}

}  // namespace

unsigned threads_from_env() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HALLUSTAT_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw UsageError(fmt::format("HALLUSTAT_THREADS must be a positive integer (got '{}')", env));
    }
    threads = static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return threads;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw UsageError(fmt::format("--alpha must lie in (0, 1) (got {})", cfg.alpha));
  }
  if (!(cfg.temperature > 0.0) || !std::isfinite(cfg.temperature)) {
    throw UsageError(fmt::format("--temperature must be positive (got {})", cfg.temperature));
  }
  if (cfg.inputs.empty()) throw UsageError("no input files given");
  if (cfg.metrics.empty()) throw UsageError("no metric selected");
  if (cfg.command == Command::kWeights && cfg.inputs.size() != 1) {
    throw UsageError("weights takes exactly one input file");
  }
  if (cfg.command == Command::kRelative && cfg.baseline.empty()) {
    throw UsageError("relative needs --baseline <model>");
  }
  if (cfg.command == Command::kSummarize) {
    if (cfg.group_by.empty()) throw UsageError("--group-by needs at least one field");
    DistReport probe;
    for (const std::string& f : cfg.group_by) report_field(probe, f);
  }
  if (cfg.format == OutputFormat::kTable && cfg.command != Command::kSummarize) {
    throw UsageError("--format table is only available for summarize");
  }
}

void cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<ExampleCollection> collections = load_all(cfg);

  struct Cell {
    std::size_t file;
    MetricKind metric;
  };
  std::vector<Cell> cells;
  for (std::size_t f = 0; f < collections.size(); ++f) {
    for (MetricKind k : cfg.metrics) cells.push_back({f, k});
  }
  std::vector<DistReport> reports(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    reports[i] = distinguishability(collections[cells[i].file], cells[i].metric, cfg.alpha);
  });

  std::stable_sort(reports.begin(), reports.end(), [](const DistReport& a, const DistReport& b) {
    return std::pair(a.meta.source, a.meta.metric) < std::pair(b.meta.source, b.meta.metric);
  });
  for (const DistReport& r : reports) {
    if (std::min(r.n_hall, r.n_ent) < kAsymptoticMinSize) {
      err << fmt::format(
          "warning: {} ({}): group sizes {}/{} are small; the asymptotic p-value is approximate\n",
          r.meta.source, to_string(r.meta.metric), r.n_hall, r.n_ent);
    }
  }
  write_reports(out, reports, cfg.format);
}

void cmd_summarize(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::vector<DistReport> reports = load_reports(cfg);
  if (reports.empty()) throw PreconditionError("no reports to summarize");
  const auto rows = summarize(reports, [&](const DistReport& r) {
    std::string key;
    for (std::size_t i = 0; i < cfg.group_by.size(); ++i) {
      if (i) key += '/';
      key += report_field(r, cfg.group_by[i]);
    }
    return key;
  });
  write_summary(out, rows, cfg.format);
}

void cmd_relative(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::vector<DistReport> reports = load_reports(cfg);
  if (reports.empty()) throw PreconditionError("no reports for a relative series");

  std::map<std::pair<std::string, MetricKind>, std::vector<DistReport>> groups;
  for (const DistReport& r : reports) groups[{r.meta.dataset, r.meta.metric}].push_back(r);

  std::vector<RelativeSeries> series;
  for (const auto& [key, members] : groups) {
    std::size_t baseline = members.size();
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].meta.model != cfg.baseline) continue;
      if (baseline != members.size()) {
        throw PreconditionError(fmt::format("baseline '{}' appears more than once for ({}, {})",
                                            cfg.baseline, key.first, to_string(key.second)));
      }
      baseline = i;
    }
    if (baseline == members.size()) {
      throw PreconditionError(fmt::format("baseline '{}' missing for ({}, {})", cfg.baseline,
                                          key.first, to_string(key.second)));
    }
    series.push_back(relative_series(members, baseline));
  }
  write_relative(out, series, cfg.format);
}

void cmd_weights(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ExampleCollection collection = load_collection_file(cfg.inputs.front(), cfg.threads);
  const WeightVector weights = compute_weights(collection, cfg.weights_mode, cfg.temperature);
  write_weight_file(out, weights);
  double max_w = 0.0;
  for (const WeightEntry& e : weights.entries) max_w = std::max(max_w, e.weight);
  err << fmt::format("{} weights ({} mode, reference '{}'), max weight {}\n", weights.size(),
                     to_string(weights.mode), weights.reference_model, max_w);
}

void cmd_histogram(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::vector<ExampleCollection> collections = load_all(cfg);
  std::vector<HistogramRecord> records;
  for (const ExampleCollection& c : collections) {
    for (MetricKind kind : cfg.metrics) {
      const MetricSample sample = compute_metric(c, kind);
      const CellMeta meta = cell_meta_for(c, kind);
      for (Label label : {Label::kHallucinated, Label::kEntailed, Label::kUnlabeled}) {
        const std::vector<double> values = sample.values_for(label);
        if (values.empty()) continue;
        records.push_back({meta.source, meta.model, meta.dataset, kind,
                           std::string(to_string(label)), histogram(values, cfg.bins)});
      }
    }
  }
  write_histograms(out, records, cfg.format);
}

void cmd_metrics(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::vector<ExampleCollection> collections = load_all(cfg);
  std::vector<MetricDumpRecord> records;
  for (const ExampleCollection& c : collections) {
    for (MetricKind kind : cfg.metrics) records.push_back({c.source, compute_metric(c, kind)});
  }
  write_metric_dump(out, records, cfg.format);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    std::ostringstream buffer;
    switch (cfg.command) {
      case Command::kAnalyze:
        cmd_analyze(cfg, buffer, err);
        break;
      case Command::kSummarize:
        cmd_summarize(cfg, buffer, err);
        break;
      case Command::kRelative:
        cmd_relative(cfg, buffer, err);
        break;
      case Command::kWeights:
        cmd_weights(cfg, buffer, err);
        break;
      case Command::kHistogram:
        cmd_histogram(cfg, buffer, err);
        break;
      case Command::kMetrics:
        cmd_metrics(cfg, buffer, err);
        break;
    }
    if (cfg.out_path.empty()) {
      out << buffer.str();
      out.flush();
    } else {
      std::ofstream file(cfg.out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw DataError(fmt::format("cannot write '{}'", cfg.out_path));
      file << buffer.str();
      if (!file.flush()) throw DataError(fmt::format("write to '{}' failed", cfg.out_path));
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hallucination distinguishability statistics over token-score record files",
               "hallustat"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string metric = "both";
  std::string format = "csv";
  std::string bins = "fd";
  std::string weights_mode = "entropy";
  std::string group_by = "scoring_mode,metric";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("inputs", cfg.inputs, "Input files")->required();
    sub->add_option("--format", format, "Output format: csv or jsonl (summarize also accepts table)")
        ->check(CLI::IsMember({"csv", "jsonl", "table"}));
    sub->add_option("--out", cfg.out_path, "Write output here instead of stdout");
  };
  auto add_metric = [&](CLI::App* sub) {
    sub->add_option("--metric", metric, "logprob, entropy or both")
        ->check(CLI::IsMember({"logprob", "entropy", "both"}));
  };

  struct Sub {
    const char* name;
    Command command;
    const char* help;
  };
  const Sub subs[] = {
      {"analyze", Command::kAnalyze, "KS test and Wasserstein distance per (file, metric)"},
      {"summarize", Command::kSummarize, "Aggregate report records into significance summaries"},
      {"relative", Command::kRelative, "Wasserstein distances relative to a baseline model"},
      {"weights", Command::kWeights, "Per-example loss weights from reference-model scores"},
      {"histogram", Command::kHistogram, "Per-label metric histograms"},
      {"metrics", Command::kMetrics, "Dump per-example metric values"},
  };
  std::map<CLI::App*, Command> commands;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    commands[sub] = s.command;
    add_common(sub);
    switch (s.command) {
      case Command::kAnalyze:
        add_metric(sub);
        sub->add_option("--alpha", cfg.alpha, "Significance level (default 0.01)");
        break;
      case Command::kSummarize:
        sub->add_option("--group-by", group_by,
                        "Comma-separated fields: source, model, dataset, scoring_mode, metric");
        break;
      case Command::kRelative:
        sub->add_option("--baseline", cfg.baseline, "Model whose distance is the unit")
            ->required();
        break;
      case Command::kWeights:
        sub->add_option("--weights-mode", weights_mode, "entropy or logprob")
            ->check(CLI::IsMember({"entropy", "logprob"}));
        sub->add_option("--temperature", cfg.temperature,
                        "Softmax temperature; 1.0 is the plain algorithm");
        break;
      case Command::kHistogram:
        add_metric(sub);
        sub->add_option("--bins", bins, "fd, N, or N:LO:HI");
        break;
      case Command::kMetrics:
        add_metric(sub);
        break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    for (const auto& [sub, command] : commands) {
      if (sub->parsed()) cfg.command = command;
    }
    if (metric == "both") {
      cfg.metrics = {MetricKind::kLogProb, MetricKind::kEntropy};
    } else {
      cfg.metrics = {parse_metric_kind(metric)};
    }
    cfg.format = parse_output_format(format);
    cfg.bins = parse_bin_spec(bins);
    cfg.weights_mode = parse_metric_kind(weights_mode);
    cfg.group_by.clear();
    std::stringstream ss(group_by);
    for (std::string field; std::getline(ss, field, ',');) {
      if (!field.empty()) cfg.group_by.push_back(field);
    }
    cfg.threads = threads_from_env();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return run(cfg, out, err);
}

}  // namespace hallustat::cli
