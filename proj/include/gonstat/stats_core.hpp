// Copyright 2026 The GonStat Authors
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

#ifndef GONSTAT_STATS_CORE_HPP
#define GONSTAT_STATS_CORE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gonstat/errors.hpp"
#include "gonstat/rng.hpp"

namespace gonstat {

// ---------------------------------------------------------------------------
// Special functions.

// Regularized incomplete beta I_x(a, b) by continued fraction
// (Lentz's method, cf. Numerical Recipes 6.4).
double betainc(double a, double b, double x);

// Inverse of betainc in x for fixed (a, b), by bisection.  Monotone, so the
// root is unique; converges to ~1e-15.
double beta_quantile(double a, double b, double p);

double normal_cdf(double x);

// Kolmogorov survival function Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
double kolmogorov_sf(double x);

// ---------------------------------------------------------------------------
// Exact binomial confidence interval.

struct BinomialCI {
  long k = 0;
  long n = 0;
  double level = 0.95;
  double point = 0.0;
  double lower = 0.0;
  double upper = 1.0;
};

// Clopper-Pearson exact interval.  The lower bound solves
// P(X >= k | p) = (1-level)/2 and the upper solves P(X <= k | p) = (1-level)/2
// for X ~ Binomial(n, p); k = 0 pins lower at 0 and k = n pins upper at 1.
// Throws InvalidCount when n < 1, k is outside [0, n], or level is outside
// (0, 1).
BinomialCI clopper_pearson(long k, long n, double level = 0.95);

// ---------------------------------------------------------------------------
// McNemar test on paired binary outcomes.

struct PairedOutcome {
  long b = 0;             // pairs where only the first method is correct
  long c = 0;             // pairs where only the second method is correct
  long n_concordant = 0;  // pairs where both agree; never affects p
};

// Exact two-tailed binomial p: min(1, 2 P(X <= min(b, c))) with
// X ~ Binomial(b + c, 1/2).  b + c = 0 gives p = 1.  Counts up to b + c = 60
// are summed in exact integer arithmetic.
double mcnemar_exact(const PairedOutcome& pairs);

// Continuity-corrected chi-square variant, (|b-c|-1)^2 / (b+c) on 1 df.
double mcnemar_chi2(const PairedOutcome& pairs);

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov test.

struct KsResult {
  double d = 0.0;
  double p = 1.0;
  long n_x = 0;
  long n_y = 0;
  bool exact = false;
};

// D = sup_t |ECDF_x(t) - ECDF_y(t)| over the pooled sample, ties handled by
// comparing after all equal values are consumed.  The default p is the
// asymptotic Kolmogorov survival value at sqrt(n_e) * D with effective size
// n_e = n_x n_y / (n_x + n_y).  With exact_small set and n_x * n_y <= 400 the
// p is instead the exact permutation tail from lattice-path counting (ties,
// if any, make it an approximation).  Throws EmptySample.
KsResult ks_two_sample(const std::vector<double>& x,
                       const std::vector<double>& y,
                       bool exact_small = false);

// ---------------------------------------------------------------------------
// Percentile bootstrap.

struct BootstrapOptions {
  int n_resamples = 2000;
  double level = 0.95;
  uint64_t seed = 0;
  // A statistic may be undefined on a resample (e.g. one-class); such
  // resamples are redrawn within the same substream up to this budget.
  long max_redraws_per_resample = 10000;
};

struct BootstrapResult {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int n_resamples = 0;
  uint64_t seed = 0;
  long n_redraws = 0;
};

// Linear-interpolation empirical quantile (type 7) on sorted values.
double sorted_quantile(const std::vector<double>& sorted, double q);

// Record-level percentile bootstrap.  `stat` maps a multiset of row indices
// into [0, n_records) to a statistic value, or nullopt when undefined on
// that resample.  The point estimate is the statistic of the identity
// multiset and must be defined.  Resample k draws from PRNG substream k of
// the seed, so any execution order reproduces the same intervals.
// Throws EmptySample when n_records == 0, OneClassOnly-like errors from the
// statistic itself on the identity call, and StatisticUndefined when a
// resample exhausts the redraw budget.
BootstrapResult bootstrap_ci(
    size_t n_records,
    const std::function<std::optional<double>(const std::vector<size_t>&)>&
        stat,
    const BootstrapOptions& options);

}  // namespace gonstat

#endif  // GONSTAT_STATS_CORE_HPP
