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

#include "hallustat/diststats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <fmt/format.h>

#include "hallustat/error.hpp"

namespace hallustat {

namespace {

constexpr double kSeriesTolerance = 1e-12;
// Below this lambda the theta-function form converges faster.
constexpr double kSeriesSwitch = 1.18;

// Walks the merged support of two sorted samples. For every distinct value x
// (ascending) calls visit(x, count_a(<= x), count_b(<= x)).
template <typename Visit>
void walk_merged(std::span<const double> a, std::span<const double> b, Visit&& visit) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (i == a.size()) {
      x = b[j];
    } else if (j == b.size()) {
      x = a[i];
    } else {
      x = std::min(a[i], b[j]);
    }
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    visit(x, i, j);
  }
}

}  // namespace

Ecdf::Ecdf(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw PreconditionError("empirical CDF needs at least one value");
  for (double v : sorted_) {
    if (!std::isfinite(v)) {
      throw PreconditionError(fmt::format("empirical CDF got non-finite value {}", v));
    }
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double ks_statistic(const Ecdf& a, const Ecdf& b) {
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  double d = 0.0;
  walk_merged(a.sorted_values(), b.sorted_values(),
              [&](double, std::size_t i, std::size_t j) {
                d = std::max(d, std::fabs(static_cast<double>(i) / n -
                                          static_cast<double>(j) / m));
              });
  return d;
}

double kolmogorov_sf(double lambda) {
  if (!(lambda >= 0.0)) {
    throw PreconditionError(fmt::format("kolmogorov_sf needs lambda >= 0 (got {})", lambda));
  }
  if (lambda == 0.0) return 1.0;

  double q;
  if (lambda < kSeriesSwitch) {
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1;; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      sum += term;
      if (term < kSeriesTolerance) break;
    }
    q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  } else {
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1;; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += sign * term;
      sign = -sign;
      if (term < kSeriesTolerance) break;
    }
    q = 2.0 * sum;
  }
  return std::clamp(q, 0.0, 1.0);
}

double ks_pvalue(double statistic, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) {
    throw PreconditionError(fmt::format("ks_pvalue needs n, m >= 1 (got n={}, m={})", n, m));
  }
  if (!(statistic >= 0.0 && statistic <= 1.0)) {
    throw PreconditionError(fmt::format("KS statistic must lie in [0, 1] (got {})", statistic));
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double lambda = std::sqrt(nd * md / (nd + md)) * statistic;
  return std::clamp(kolmogorov_sf(lambda), 0.0, 1.0);
}

KsResult ks_test(const Ecdf& a, const Ecdf& b) {
  KsResult result;
  result.statistic = ks_statistic(a, b);
  result.n = a.size();
  result.m = b.size();
  result.p_value = ks_pvalue(result.statistic, result.n, result.m);
  return result;
}

double wasserstein1(const Ecdf& a, const Ecdf& b) {
  const auto n = static_cast<std::int64_t>(a.size());
  const auto m = static_cast<std::int64_t>(b.size());
  // Accumulate |i*m - j*n| * dx in count units; one division at the end.
  double area = 0.0;
  bool have_prev = false;
  double prev_x = 0.0;
  std::int64_t prev_gap = 0;
  walk_merged(a.sorted_values(), b.sorted_values(),
              [&](double x, std::size_t i, std::size_t j) {
                if (have_prev && prev_gap != 0) {
                  area += static_cast<double>(prev_gap) * (x - prev_x);
                }
                prev_gap = static_cast<std::int64_t>(i) * m - static_cast<std::int64_t>(j) * n;
                if (prev_gap < 0) prev_gap = -prev_gap;
                prev_x = x;
                have_prev = true;
              });
  return area / (static_cast<double>(n) * static_cast<double>(m));
}

}  // namespace hallustat
