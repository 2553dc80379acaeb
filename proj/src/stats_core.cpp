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

#include "gonstat/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gonstat {

namespace {

// Continued fraction for betainc (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double betainc(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
               a * std::log(x) + b * std::log1p(-x);
  double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double beta_quantile(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  // 200 halvings take the bracket width below one ulp of any double in
  // (0, 1); betainc is monotone in x so this cannot misconverge.
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (betainc(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730951);
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x > 8.0) return 0.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * std::exp(-2.0 * j * j * x * x);
    if (j % 2 == 0) term = -term;
    sum += term;
    if (std::fabs(term) < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

BinomialCI clopper_pearson(long k, long n, double level) {
  if (n < 1) throw InvalidCount("clopper_pearson: n must be >= 1");
  if (k < 0 || k > n) {
    throw InvalidCount("clopper_pearson: k outside [0, n]");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidCount("clopper_pearson: level outside (0, 1)");
  }
  double alpha2 = (1.0 - level) / 2.0;
  BinomialCI ci;
  ci.k = k;
  ci.n = n;
  ci.level = level;
  ci.point = static_cast<double>(k) / static_cast<double>(n);
  // P(X >= k | p) = I_p(k, n-k+1) and P(X <= k | p) = 1 - I_p(k+1, n-k),
  // so both bounds are beta quantiles.
  ci.lower = (k == 0) ? 0.0
                      : beta_quantile(static_cast<double>(k),
                                      static_cast<double>(n - k + 1), alpha2);
  ci.upper = (k == n) ? 1.0
                      : beta_quantile(static_cast<double>(k + 1),
                                      static_cast<double>(n - k),
                                      1.0 - alpha2);
  return ci;
}

double mcnemar_exact(const PairedOutcome& pairs) {
  if (pairs.b < 0 || pairs.c < 0 || pairs.n_concordant < 0) {
    throw InvalidCount("mcnemar: negative cell count");
  }
  long n = pairs.b + pairs.c;
  if (n == 0) return 1.0;
  long m = std::min(pairs.b, pairs.c);
  if (n <= 60) {
    // Tail sum of C(n, i) stays below 2^60, so the sum and every C(n, i)
    // are exact in 64-bit integers; the multiplicative recurrence divides
    // evenly at every step.
    unsigned long long binom = 1;
    unsigned long long tail = 1;
    for (long i = 0; i < m; ++i) {
      binom = binom * static_cast<unsigned long long>(n - i) /
              static_cast<unsigned long long>(i + 1);
      tail += binom;
    }
    double p = 2.0 * std::ldexp(static_cast<double>(tail), -static_cast<int>(n));
    return std::min(1.0, p);
  }
  // Large n: accumulate the tail in log space.
  double log_half_n = -static_cast<double>(n) * std::log(2.0);
  double log_tail = -std::numeric_limits<double>::infinity();
  double log_binom = 0.0;
  for (long i = 0; i <= m; ++i) {
    if (i > 0) {
      log_binom += std::log(static_cast<double>(n - i + 1)) -
                   std::log(static_cast<double>(i));
    }
    double term = log_binom + log_half_n;
    double hi = std::max(log_tail, term);
    log_tail = hi + std::log(std::exp(log_tail - hi) + std::exp(term - hi));
  }
  return std::min(1.0, 2.0 * std::exp(log_tail));
}

double mcnemar_chi2(const PairedOutcome& pairs) {
  if (pairs.b < 0 || pairs.c < 0 || pairs.n_concordant < 0) {
    throw InvalidCount("mcnemar: negative cell count");
  }
  long n = pairs.b + pairs.c;
  if (n == 0) return 1.0;
  double num = std::fabs(static_cast<double>(pairs.b - pairs.c)) - 1.0;
  if (num < 0.0) num = 0.0;
  double x2 = num * num / static_cast<double>(n);
  // Chi-square(1) survival via the normal tail.
  return 2.0 * (1.0 - normal_cdf(std::sqrt(x2)));
}

namespace {

// Exact two-sample tail P(D >= d_obs) under the permutation null, by
// counting monotone lattice paths that stay strictly inside the band
// |i/n_x - j/n_y| < d_obs.  Band tests use the integer numerator
// |i n_y - j n_x| so no rounding can flip a boundary case.  Path counts are
// bounded by C(n_x + n_y, n_x), which is exact in a double for every
// n_x n_y <= 400.
double ks_exact_p(long nx, long ny, long long dnum) {
  std::vector<double> col(static_cast<size_t>(ny) + 1, 0.0);
  auto inside = [&](long i, long j) {
    return std::llabs(static_cast<long long>(i) * ny -
                      static_cast<long long>(j) * nx) < dnum;
  };
  col[0] = 1.0;
  for (long j = 1; j <= ny; ++j) {
    col[static_cast<size_t>(j)] = inside(0, j) ? col[static_cast<size_t>(j - 1)] : 0.0;
  }
  for (long i = 1; i <= nx; ++i) {
    std::vector<double> next(static_cast<size_t>(ny) + 1, 0.0);
    next[0] = inside(i, 0) ? col[0] : 0.0;
    for (long j = 1; j <= ny; ++j) {
      // The terminal corner counts even though its deviation is zero only
      // there; every interior point must respect the band.
      bool ok = (i == nx && j == ny) || inside(i, j);
      next[static_cast<size_t>(j)] =
          ok ? col[static_cast<size_t>(j)] + next[static_cast<size_t>(j - 1)]
             : 0.0;
    }
    col.swap(next);
  }
  // C(nx+ny, nx) by the multiplicative formula, exact for these sizes.
  double total = 1.0;
  for (long i = 1; i <= nx; ++i) {
    total = total * static_cast<double>(ny + i) / static_cast<double>(i);
  }
  double p = 1.0 - col[static_cast<size_t>(ny)] / total;
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

KsResult ks_two_sample(const std::vector<double>& x,
                       const std::vector<double>& y, bool exact_small) {
  if (x.empty() || y.empty()) {
    throw EmptySample("ks_two_sample: both samples must be nonempty");
  }
  std::vector<double> sx = x;
  std::vector<double> sy = y;
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  long nx = static_cast<long>(sx.size());
  long ny = static_cast<long>(sy.size());
  // Walk the pooled order; evaluate the ECDF gap only after consuming every
  // copy of a value so ties never produce a phantom deviation.
  long i = 0;
  long j = 0;
  long long dnum = 0;  // max |i*ny - j*nx|
  while (i < nx || j < ny) {
    double v;
    if (i < nx && (j >= ny || sx[static_cast<size_t>(i)] <= sy[static_cast<size_t>(j)])) {
      v = sx[static_cast<size_t>(i)];
    } else {
      v = sy[static_cast<size_t>(j)];
    }
    while (i < nx && sx[static_cast<size_t>(i)] == v) ++i;
    while (j < ny && sy[static_cast<size_t>(j)] == v) ++j;
    dnum = std::max(dnum, std::llabs(static_cast<long long>(i) * ny -
                                     static_cast<long long>(j) * nx));
  }
  KsResult r;
  r.n_x = nx;
  r.n_y = ny;
  r.d = static_cast<double>(dnum) / static_cast<double>(nx * ny);
  if (exact_small && nx * ny <= 400) {
    r.exact = true;
    r.p = (dnum == 0) ? 1.0 : ks_exact_p(nx, ny, dnum);
  } else {
    double ne = static_cast<double>(nx) * static_cast<double>(ny) /
                static_cast<double>(nx + ny);
    r.p = kolmogorov_sf(std::sqrt(ne) * r.d);
  }
  return r;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw EmptySample("sorted_quantile: empty input");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BootstrapResult bootstrap_ci(
    size_t n_records,
    const std::function<std::optional<double>(const std::vector<size_t>&)>&
        stat,
    const BootstrapOptions& options) {
  if (n_records == 0) throw EmptySample("bootstrap_ci: no records");
  if (options.n_resamples < 1) {
    throw InvalidCount("bootstrap_ci: n_resamples must be >= 1");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw InvalidCount("bootstrap_ci: level outside (0, 1)");
  }

  std::vector<size_t> identity(n_records);
  for (size_t i = 0; i < n_records; ++i) identity[i] = i;
  std::optional<double> point = stat(identity);
  if (!point) {
    throw StatisticUndefined("bootstrap_ci: statistic undefined on the data",
                             -1);
  }

  BootstrapResult result;
  result.point = *point;
  result.n_resamples = options.n_resamples;
  result.seed = options.seed;

  std::vector<double> values;
  values.reserve(static_cast<size_t>(options.n_resamples));
  std::vector<size_t> idx(n_records);
  for (int k = 0; k < options.n_resamples; ++k) {
    SplitMix64 g = SplitMix64::substream(options.seed,
                                         static_cast<uint64_t>(k));
    std::optional<double> v;
    for (long attempt = 0;; ++attempt) {
      for (size_t i = 0; i < n_records; ++i) {
        idx[i] = static_cast<size_t>(g.next_below(n_records));
      }
      v = stat(idx);
      if (v) break;
      ++result.n_redraws;
      if (attempt + 1 >= options.max_redraws_per_resample) {
        throw StatisticUndefined(
            "bootstrap_ci: redraw budget exhausted", k);
      }
    }
    values.push_back(*v);
  }
  std::sort(values.begin(), values.end());
  double alpha2 = (1.0 - options.level) / 2.0;
  result.lower = sorted_quantile(values, alpha2);
  result.upper = sorted_quantile(values, 1.0 - alpha2);
  return result;
}

}  // namespace gonstat
