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

#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "hallustat/error.hpp"

namespace hallustat {
namespace {

// One token per point, so the metric equals the token value.
ExampleCollection collection_from(const std::vector<double>& hall_entropy,
                                  const std::vector<double>& ent_entropy) {
  ExampleCollection c;
  c.source = "synthetic.jsonl";
  c.header = FileHeader{ScoringMode::kCausal, "gpt2", "wow"};
  int id = 0;
  for (double v : hall_entropy) {
    c.points.push_back({fmt::format("h{}", id++), Label::kHallucinated, {{-v, v}}, {}});
  }
  for (double v : ent_entropy) {
    c.points.push_back({fmt::format("e{}", id++), Label::kEntailed, {{-v, v}}, {}});
  }
  return c;
}

DistReport report_with(std::string model, std::string dataset, MetricKind metric, double ks,
                       double w, bool significant) {
  DistReport r;
  r.meta = {"f", std::move(model), std::move(dataset), "masked", metric};
  r.ks.statistic = ks;
  r.ks.p_value = significant ? 0.001 : 0.5;
  r.wasserstein = w;
  r.significant = significant;
  r.n_hall = r.n_ent = 100;
  return r;
}

TEST(Distinguishability, IdenticalGroups) {
  const DistReport r =
      distinguishability(collection_from({0.5, 1.0, 2.0}, {2.0, 0.5, 1.0}), MetricKind::kEntropy);
  EXPECT_EQ(r.ks.statistic, 0.0);
  EXPECT_EQ(r.ks.p_value, 1.0);
  EXPECT_EQ(r.wasserstein, 0.0);
  EXPECT_FALSE(r.significant);
  EXPECT_EQ(r.n_hall, 3u);
  EXPECT_EQ(r.n_ent, 3u);
  EXPECT_EQ(r.meta.model, "gpt2");
  EXPECT_EQ(r.meta.dataset, "wow");
  EXPECT_EQ(r.meta.scoring_mode, "causal");
}

TEST(Distinguishability, DegeneratePointMasses) {
  const DistReport r = distinguishability(
      collection_from(std::vector<double>(500, 1.0), std::vector<double>(500, 0.0)),
      MetricKind::kEntropy, 0.01);
  EXPECT_EQ(r.ks.statistic, 1.0);
  EXPECT_EQ(r.wasserstein, 1.0);
  EXPECT_LT(r.ks.p_value, 1e-80);
  EXPECT_TRUE(r.significant);
  EXPECT_EQ(r.mean_hall, 1.0);
  EXPECT_EQ(r.mean_ent, 0.0);
}

TEST(Distinguishability, ShiftedNormals) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> a(1000), b(1000);
  for (double& v : a) v = z(rng);
  for (double& v : b) v = z(rng) + 1.0;
  MetricSample s;
  s.kind = MetricKind::kLogProb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s.entries.push_back({fmt::format("a{}", i), Label::kEntailed, a[i]});
    s.entries.push_back({fmt::format("b{}", i), Label::kHallucinated, b[i]});
  }
  const DistReport r = distinguishability(s, CellMeta{}, 0.01);
  // sup |Phi(x) - Phi(x - 1)| = 2 Phi(0.5) - 1.
  EXPECT_NEAR(r.ks.statistic, 0.3829249225480262, 0.05);
  EXPECT_NEAR(r.wasserstein, 1.0, 0.1);
  EXPECT_TRUE(r.significant);
  EXPECT_GT(r.mean_hall, r.mean_ent);
}

TEST(Distinguishability, MissingGroupNamesLabel) {
  try {
    distinguishability(collection_from({}, {1.0, 2.0}), MetricKind::kEntropy);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("hallucinated"), std::string::npos);
  }
  try {
    distinguishability(collection_from({1.0}, {}), MetricKind::kEntropy);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("entailed"), std::string::npos);
  }
}

TEST(Distinguishability, AlphaRange) {
  const auto c = collection_from({1.0}, {2.0});
  EXPECT_THROW(distinguishability(c, MetricKind::kEntropy, 0.0), PreconditionError);
  EXPECT_THROW(distinguishability(c, MetricKind::kEntropy, 1.0), PreconditionError);
}

TEST(Distinguishability, SignificanceMatchesAlpha) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> h(40), e(50);
    for (double& v : h) v = u(rng) + 0.1 * (trial % 5);
    for (double& v : e) v = u(rng);
    for (double alpha : {0.001, 0.01, 0.05, 0.5}) {
      const DistReport r = distinguishability(collection_from(h, e), MetricKind::kEntropy, alpha);
      EXPECT_EQ(r.significant, r.ks.p_value < alpha);
    }
  }
}

TEST(CellMeta, FallsBackToPointMetaThenStem) {
  ExampleCollection c;
  c.source = "/data/runs/bert-wow.jsonl";
  c.points.push_back({"a", Label::kEntailed, {{0, 0}}, {{"dataset", "wow"}}});
  const CellMeta m = cell_meta_for(c, MetricKind::kLogProb);
  EXPECT_EQ(m.dataset, "wow");
  EXPECT_EQ(m.model, "bert-wow");
  EXPECT_EQ(m.scoring_mode, "");
}

TEST(Summarize, TableOneEncoderLogProbShape) {
  std::vector<DistReport> reports;
  for (int i = 0; i < 60; ++i) {
    reports.push_back(report_with(fmt::format("m{}", i % 10), fmt::format("d{}", i / 10),
                                  MetricKind::kLogProb, 0.3, 0.1, i < 53));
  }
  const auto rows = summarize(reports, [](const DistReport& r) {
    return fmt::format("{}/{}", r.meta.scoring_mode, to_string(r.meta.metric));
  });
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].group, "masked/logprob");
  EXPECT_EQ(rows[0].significant, 53u);
  EXPECT_EQ(rows[0].total, 60u);
  EXPECT_NEAR(rows[0].sig_ratio(), 0.8833333333333333, 1e-15);
  EXPECT_EQ(format_sig(rows[0]), "88.33% (53 / 60)");
}

TEST(Summarize, SingleReport) {
  const std::vector<DistReport> reports = {
      report_with("m", "d", MetricKind::kEntropy, 0.42, 0.1, true)};
  const auto rows = summarize(reports, [](const DistReport& r) { return r.meta.model; });
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].sig_ratio(), 1.0);
  EXPECT_EQ(rows[0].ks_mean, 0.42);
  EXPECT_EQ(rows[0].ks_std, 0.0);
}

TEST(Summarize, PopulationStd) {
  const std::vector<DistReport> reports = {
      report_with("m", "d1", MetricKind::kEntropy, 0.2, 0.1, true),
      report_with("m", "d2", MetricKind::kEntropy, 0.4, 0.1, false)};
  const auto rows = summarize(reports, [](const DistReport&) { return std::string("all"); });
  EXPECT_NEAR(rows[0].ks_mean, 0.3, 1e-15);
  EXPECT_NEAR(rows[0].ks_std, 0.1, 1e-15);
  EXPECT_EQ(format_sig(rows[0]), "50.00% (1 / 2)");
}

TEST(Summarize, SingletonGroupsPreserveStatisticAndSignificance) {
  std::vector<DistReport> reports;
  for (int i = 0; i < 12; ++i) {
    reports.push_back(report_with(fmt::format("m{:02}", i), "d", MetricKind::kLogProb,
                                  0.05 * i, 0.1, i % 3 == 0));
  }
  const auto rows = summarize(reports, [](const DistReport& r) { return r.meta.model; });
  ASSERT_EQ(rows.size(), reports.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].group, reports[i].meta.model);
    EXPECT_EQ(rows[i].ks_mean, reports[i].ks.statistic);
    EXPECT_EQ(rows[i].significant == 1, reports[i].significant);
  }
}

TEST(Summarize, EmptyInput) {
  EXPECT_THROW(summarize({}, [](const DistReport&) { return std::string(); }), PreconditionError);
}

TEST(RelativeSeries, DividesByBaseline) {
  const std::vector<DistReport> reports = {
      report_with("small", "wow", MetricKind::kEntropy, 0.3, 0.5, true),
      report_with("medium", "wow", MetricKind::kEntropy, 0.3, 1.0, true),
      report_with("large", "wow", MetricKind::kEntropy, 0.3, 0.25, true)};
  const RelativeSeries s = relative_series(reports, 0);
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_EQ(s.baseline, "small");
  EXPECT_EQ(s.entries[0].relative, 1.0);
  EXPECT_EQ(s.entries[1].relative, 2.0);
  EXPECT_EQ(s.entries[2].relative, 0.5);
  EXPECT_EQ(s.entries[2].key, "large");
}

TEST(RelativeSeries, SingleReport) {
  const std::vector<DistReport> reports = {
      report_with("only", "wow", MetricKind::kEntropy, 0.3, 0.7, true)};
  const RelativeSeries s = relative_series(reports, 0);
  ASSERT_EQ(s.entries.size(), 1u);
  EXPECT_EQ(s.entries[0].relative, 1.0);
}

TEST(RelativeSeries, ZeroBaselineIsAnError) {
  const std::vector<DistReport> reports = {
      report_with("small", "wow", MetricKind::kEntropy, 0.0, 0.0, false),
      report_with("big", "wow", MetricKind::kEntropy, 0.3, 1.0, true)};
  EXPECT_THROW(relative_series(reports, 0), PreconditionError);
}

TEST(RelativeSeries, MixedCellsRejected) {
  const std::vector<DistReport> reports = {
      report_with("a", "wow", MetricKind::kEntropy, 0.3, 0.5, true),
      report_with("b", "cmu", MetricKind::kEntropy, 0.3, 0.5, true)};
  EXPECT_THROW(relative_series(reports, 0), PreconditionError);
  EXPECT_THROW(relative_series(reports, 5), PreconditionError);
}

// Wasserstein is linear in scale, so ratios do not move when every metric
// value is multiplied by c > 0.
TEST(RelativeSeries, InvariantUnderUniformScaling) {
  std::mt19937_64 rng(31);
  std::gamma_distribution<double> g(2.0, 1.0);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> models(4);
  for (std::size_t k = 0; k < models.size(); ++k) {
    models[k].first.resize(200);
    models[k].second.resize(250);
    for (double& v : models[k].first) v = g(rng) + 0.2 * static_cast<double>(k);
    for (double& v : models[k].second) v = g(rng);
  }
  auto series_at = [&](double scale) {
    std::vector<DistReport> reports;
    for (const auto& [h, e] : models) {
      auto hs = h;
      auto es = e;
      for (double& v : hs) v *= scale;
      for (double& v : es) v *= scale;
      reports.push_back(distinguishability(collection_from(hs, es), MetricKind::kEntropy));
    }
    return relative_series(reports, 0);
  };
  const RelativeSeries base = series_at(1.0);
  for (double c : {0.25, 3.0, 17.5}) {
    const RelativeSeries scaled = series_at(c);
    for (std::size_t k = 0; k < base.entries.size(); ++k) {
      EXPECT_NEAR(scaled.entries[k].relative, base.entries[k].relative, 1e-12);
    }
  }
}

TEST(Histogram, SingleBinConstantValues) {
  const std::vector<double> v = {1, 1, 1};
  const Histogram h = histogram(v, FixedBins{1});
  EXPECT_EQ(h.frequencies, std::vector<double>{1.0});
  EXPECT_EQ(h.mean, 1.0);
  EXPECT_EQ(h.edges.size(), 2u);
}

TEST(Histogram, RightEdgeBelongsToLastBin) {
  const std::vector<double> v = {0.0, 1.0};
  const Histogram h = histogram(v, FixedRangeBins{2, 0.0, 1.0});
  EXPECT_EQ(h.edges, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(h.frequencies, (std::vector<double>{0.5, 0.5}));
}

TEST(Histogram, UniformDraws) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(1000);
  for (double& x : v) x = u(rng);
  const Histogram h = histogram(v, FixedRangeBins{10, 0.0, 1.0});
  ASSERT_EQ(h.frequencies.size(), 10u);
  // 3 sigma of Binomial(1000, 0.1) / 1000 is about 0.028.
  for (double f : h.frequencies) EXPECT_NEAR(f, 0.1, 0.04);
}

TEST(Histogram, FreedmanDiaconisAndFallback) {
  std::mt19937_64 rng(78);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(1000);
  for (double& x : v) x = z(rng);
  const Histogram fd = histogram(v);
  EXPECT_GT(fd.frequencies.size(), 10u);
  EXPECT_LT(fd.frequencies.size(), 60u);

  // IQR = 0 -> ten equal bins.
  std::vector<double> spiky(100, 2.0);
  spiky.push_back(5.0);
  EXPECT_EQ(histogram(spiky).frequencies.size(), kFallbackBins);
}

TEST(Histogram, FrequenciesSumToOneAndMeanIgnoresBinning) {
  std::mt19937_64 rng(79);
  std::lognormal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + trial * 20);
    for (double& x : v) x = d(rng);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (const BinSpec& spec : {BinSpec{FreedmanDiaconis{}}, BinSpec{FixedBins{7}},
                                BinSpec{FixedRangeBins{13, 0.0, 1e3}}}) {
      const Histogram h = histogram(v, spec);
      EXPECT_NEAR(std::accumulate(h.frequencies.begin(), h.frequencies.end(), 0.0), 1.0, 1e-12);
      EXPECT_EQ(h.mean, mean);
      EXPECT_EQ(h.edges.size(), h.frequencies.size() + 1);
    }
  }
}

TEST(Histogram, Errors) {
  EXPECT_THROW(histogram(std::vector<double>{}), PreconditionError);
  EXPECT_THROW(histogram(std::vector<double>{2.0}, FixedRangeBins{2, 0.0, 1.0}),
               PreconditionError);
}

TEST(BinSpec, Parsing) {
  EXPECT_TRUE(std::holds_alternative<FreedmanDiaconis>(parse_bin_spec("fd")));
  EXPECT_EQ(std::get<FixedBins>(parse_bin_spec("12")).count, 12u);
  const auto r = std::get<FixedRangeBins>(parse_bin_spec("20:-5:0.5"));
  EXPECT_EQ(r.count, 20u);
  EXPECT_EQ(r.lo, -5.0);
  EXPECT_EQ(r.hi, 0.5);
  for (const char* bad : {"0", "x", "10:1", "10:1:1", "10:a:2", "-3", "1e9"}) {
    EXPECT_THROW(parse_bin_spec(bad), UsageError) << bad;
  }
}

}  // namespace
}  // namespace hallustat
