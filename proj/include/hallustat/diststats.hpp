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

// One-dimensional two-sample statistics on empirical distributions.

#ifndef HALLUSTAT_DISTSTATS_HPP_
#define HALLUSTAT_DISTSTATS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace hallustat {

/// Empirical CDF of a finite, non-empty sample of finite values.
///
/// F(x) = #{v <= x} / n, so the step function is right-continuous.
class Ecdf {
 public:
  /// Throws PreconditionError if `values` is empty or holds a non-finite value.
  explicit Ecdf(std::vector<double> values);

  double operator()(double x) const;

  std::size_t size() const { return sorted_.size(); }
  std::span<const double> sorted_values() const { return sorted_; }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

 private:
  std::vector<double> sorted_;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;
};

/// sup_x |F_a(x) - F_b(x)|, evaluated on the merged support.
double ks_statistic(const Ecdf& a, const Ecdf& b);

/// Asymptotic Kolmogorov survival function
///
///   Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2),
///
/// truncated once a term drops below 1e-12. Q(0) = 1. For small lambda the
/// equivalent theta-function form
///
///   Q(lambda) = 1 - sqrt(2 pi)/lambda * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 lambda^2))
///
/// is used instead; it converges in a handful of terms where the alternating
/// series would need thousands. Throws PreconditionError for lambda < 0 or NaN.
double kolmogorov_sf(double lambda);

/// Two-sided asymptotic p-value: Q(sqrt(nm/(n+m)) * D), clamped to [0, 1].
double ks_pvalue(double statistic, std::size_t n, std::size_t m);

/// Below this group size the asymptotic p-value is only a rough guide.
inline constexpr std::size_t kAsymptoticMinSize = 30;

KsResult ks_test(const Ecdf& a, const Ecdf& b);

/// Area between the two ECDFs (Wasserstein-1 distance).
double wasserstein1(const Ecdf& a, const Ecdf& b);

}  // namespace hallustat

#endif  // HALLUSTAT_DISTSTATS_HPP_
