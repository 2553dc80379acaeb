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

#include "gonstat/feature_importance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gonstat/errors.hpp"
#include "gonstat/stats_core.hpp"

namespace gonstat {

void DesignMatrix::validate() const {
  if (rows.size() != outcome.size()) {
    throw LengthMismatch("design rows and outcomes differ in count");
  }
  for (const auto& row : rows) {
    if (row.size() != predictor_names.size()) {
      throw ShapeMismatch("design row width differs from predictor count");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw ParamOutOfRange("non-finite design entry");
      }
    }
  }
  for (int y : outcome) {
    if (y != 0 && y != 1) {
      throw ParamOutOfRange("outcome must be 0 or 1");
    }
  }
}

DesignMatrix build_design(const std::vector<ReferenceStandard>& refs,
                          const std::vector<FeatureId>& included) {
  DesignMatrix d;
  for (FeatureId f : included) {
    d.predictor_names.push_back(std::string(predictor_label(f)));
  }
  for (const ReferenceStandard& r : refs) {
    if (!r.labels.refer.has_value()) {
      d.n_dropped += 1;
      continue;
    }
    std::vector<double> row;
    row.reserve(included.size());
    bool complete = true;
    for (FeatureId f : included) {
      const auto& bit = r.labels.feature[static_cast<size_t>(f)];
      if (!bit.has_value()) {
        complete = false;
        break;
      }
      row.push_back(*bit ? 1.0 : 0.0);
    }
    if (!complete) {
      d.n_dropped += 1;
      continue;
    }
    d.rows.push_back(std::move(row));
    d.outcome.push_back(*r.labels.refer ? 1 : 0);
  }
  return d;
}

namespace {

constexpr double kBetaCap = 15.0;
constexpr double kSeCap = 100.0;
constexpr double kMinWeight = 1e-10;

// Weighted rows after aggregating identical (x, y) patterns.  The map
// orders patterns canonically, which makes every later summation
// independent of input row order.
struct Pattern {
  std::vector<double> x;  // intercept column prepended
  int y = 0;
  double m = 0.0;  // multiplicity
};

std::vector<Pattern> aggregate(const DesignMatrix& d) {
  std::map<std::pair<std::vector<double>, int>, double> counts;
  for (size_t i = 0; i < d.rows.size(); ++i) {
    counts[{d.rows[i], d.outcome[i]}] += 1.0;
  }
  std::vector<Pattern> out;
  out.reserve(counts.size());
  for (const auto& [key, m] : counts) {
    Pattern p;
    p.x.reserve(key.first.size() + 1);
    p.x.push_back(1.0);
    p.x.insert(p.x.end(), key.first.begin(), key.first.end());
    p.y = key.second;
    p.m = m;
    out.push_back(std::move(p));
  }
  return out;
}

// Solves A x = b in place by Gauss-Jordan with partial pivoting and
// returns the inverse in A.  Columns without a usable pivot are
// reported through SingularInformation.
void invert_and_solve(std::vector<std::vector<double>>& a,
                      std::vector<double>& b,
                      std::vector<std::vector<double>>& inv) {
  size_t p = a.size();
  inv.assign(p, std::vector<double>(p, 0.0));
  for (size_t i = 0; i < p; ++i) inv[i][i] = 1.0;

  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::fabs(v));
  }
  double eps = scale * 1e-12;
  std::vector<int> bad;
  for (size_t col = 0; col < p; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < p; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) <= eps) {
      bad.push_back(static_cast<int>(col));
      continue;
    }
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    std::swap(b[pivot], b[col]);
    double d = a[col][col];
    for (size_t j = 0; j < p; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    b[col] /= d;
    for (size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      double f = a[r][col];
      if (f == 0.0) continue;
      for (size_t j = 0; j < p; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
      b[r] -= f * b[col];
    }
  }
  if (!bad.empty()) {
    throw SingularInformation("collinear design columns", bad);
  }
}

double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

}  // namespace

RegressionReport fit_logistic(const DesignMatrix& d, double tol,
                              int max_iter) {
  d.validate();
  size_t k = d.predictor_names.size();
  size_t p = k + 1;
  long n = static_cast<long>(d.rows.size());
  long n_pos = std::accumulate(d.outcome.begin(), d.outcome.end(), 0L);
  if (n_pos == 0 || n_pos == n) {
    throw OneClassOnly("logistic outcome has a single class");
  }
  if (n < static_cast<long>(p) + 1) {
    throw InvalidCount("logistic fit needs more cases than coefficients");
  }

  std::vector<Pattern> pats = aggregate(d);
  std::vector<double> beta(p, 0.0);

  RegressionReport report;
  report.n_used = n;
  report.n_dropped = d.n_dropped;

  std::vector<std::vector<double>> info;
  std::vector<std::vector<double>> inv;
  std::vector<double> rhs;
  auto accumulate_system = [&](bool with_rhs) {
    info.assign(p, std::vector<double>(p, 0.0));
    rhs.assign(p, 0.0);
    for (const Pattern& pat : pats) {
      double eta = 0.0;
      for (size_t j = 0; j < p; ++j) eta += pat.x[j] * beta[j];
      double mu = logistic(eta);
      double w = std::max(mu * (1.0 - mu), kMinWeight);
      double mw = pat.m * w;
      for (size_t r = 0; r < p; ++r) {
        for (size_t c = r; c < p; ++c) {
          info[r][c] += mw * pat.x[r] * pat.x[c];
        }
      }
      if (with_rhs) {
        double z = eta + (static_cast<double>(pat.y) - mu) / w;
        for (size_t r = 0; r < p; ++r) rhs[r] += mw * z * pat.x[r];
      }
    }
    for (size_t r = 0; r < p; ++r) {
      for (size_t c = 0; c < r; ++c) info[r][c] = info[c][r];
    }
  };

  for (int iter = 1; iter <= max_iter; ++iter) {
    accumulate_system(true);
    std::vector<std::vector<double>> a = info;
    std::vector<double> b = rhs;
    invert_and_solve(a, b, inv);
    double delta = 0.0;
    for (size_t j = 0; j < p; ++j) {
      delta = std::max(delta, std::fabs(b[j] - beta[j]));
    }
    beta = std::move(b);
    report.n_iter = iter;
    if (delta < tol) {
      report.converged = true;
      break;
    }
  }

  // Fisher information and Wald errors at the returned coefficients.
  accumulate_system(false);
  {
    std::vector<std::vector<double>> a = info;
    std::vector<double> b(p, 0.0);
    invert_and_solve(a, b, inv);
  }

  double ll = 0.0;
  for (const Pattern& pat : pats) {
    double eta = 0.0;
    for (size_t j = 0; j < p; ++j) eta += pat.x[j] * beta[j];
    double mu = std::clamp(logistic(eta), 1e-15, 1.0 - 1e-15);
    ll += pat.m * (pat.y == 1 ? std::log(mu) : std::log1p(-mu));
  }
  report.log_likelihood = ll;

  auto fill = [&](PredictorStats& s, size_t j, const std::string& name) {
    s.name = name;
    s.beta = beta[j];
    s.var = inv[j][j];
    s.se = std::sqrt(inv[j][j]);
    s.odds_ratio = std::exp(beta[j]);
    s.p = 2.0 * normal_cdf(-std::fabs(beta[j] / s.se));
    s.quasi_separated = std::fabs(beta[j]) > kBetaCap || s.se > kSeCap;
  };
  fill(report.intercept, 0, "intercept");
  report.predictors.resize(k);
  for (size_t j = 0; j < k; ++j) {
    fill(report.predictors[j], j + 1, d.predictor_names[j]);
  }

  // Ranks by descending odds ratio, design order on ties.
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return report.predictors[a].odds_ratio > report.predictors[b].odds_ratio;
  });
  for (size_t pos = 0; pos < k; ++pos) {
    report.predictors[order[pos]].rank = static_cast<int>(pos) + 1;
  }
  return report;
}

std::vector<PredictorStats> rank_features(const RegressionReport& r) {
  std::vector<PredictorStats> out = r.predictors;
  std::stable_sort(out.begin(), out.end(),
                   [](const PredictorStats& a, const PredictorStats& b) {
                     return a.odds_ratio > b.odds_ratio;
                   });
  return out;
}

}  // namespace gonstat
