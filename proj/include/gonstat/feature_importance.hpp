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

#ifndef GONSTAT_FEATURE_IMPORTANCE_HPP
#define GONSTAT_FEATURE_IMPORTANCE_HPP

#include <string>
#include <vector>

#include "gonstat/adjudication.hpp"
#include "gonstat/grade_domain.hpp"

namespace gonstat {

// Binary design for the referable-GON regression.  Rows hold the K
// predictor columns only; the intercept is implicit and always fitted.
struct DesignMatrix {
  std::vector<std::string> predictor_names;   // K column labels
  std::vector<std::vector<double>> rows;      // n rows of K finite values
  std::vector<int> outcome;                   // 0/1 per row
  long n_dropped = 0;  // cases removed listwise for a missing value

  // Throws ShapeMismatch or LengthMismatch on inconsistent shapes,
  // ParamOutOfRange on a non-finite cell or non-binary outcome.
  void validate() const;
};

// Assembles the design from a resolved cohort: one row per image whose
// outcome and every included predictor are defined; everything else is
// dropped listwise into n_dropped.
DesignMatrix build_design(
    const std::vector<ReferenceStandard>& refs,
    const std::vector<FeatureId>& included =
        std::vector<FeatureId>(kAllFeatures.begin(), kAllFeatures.end()));

struct PredictorStats {
  std::string name;
  double beta = 0.0;
  double var = 0.0;         // Fisher-information-inverse diagonal
  double se = 0.0;          // sqrt(var)
  double odds_ratio = 1.0;  // exp(beta)
  double p = 1.0;           // two-sided Wald
  int rank = 0;             // 1..K by descending odds ratio; 0 = unranked
  bool quasi_separated = false;
};

struct RegressionReport {
  PredictorStats intercept;                // never ranked
  std::vector<PredictorStats> predictors;  // design column order
  double log_likelihood = 0.0;
  int n_iter = 0;
  bool converged = false;
  long n_used = 0;
  long n_dropped = 0;
};

// Maximum-likelihood logistic fit by iteratively reweighted least
// squares.  Identical rows are aggregated into weighted patterns in a
// canonical order, so the result is exactly invariant to row order, and
// duplicating every row reproduces beta bit for bit while halving
// squared standard errors.  Convergence is max |coefficient change|
// < tol.  A predictor is flagged quasi-separated when |beta| > 15 or
// se > 100 at termination; the fit still returns.  Throws OneClassOnly
// on a one-class outcome, InvalidCount when rows <= predictors + 1,
// SingularInformation (with offending columns) on collinear predictors.
RegressionReport fit_logistic(const DesignMatrix& d, double tol = 1e-8,
                              int max_iter = 100);

// Predictors sorted by descending odds ratio; ties keep design-column
// (feature declaration) order.  Mirrors the rank fields already set on
// the report.
std::vector<PredictorStats> rank_features(const RegressionReport& r);

}  // namespace gonstat

#endif  // GONSTAT_FEATURE_IMPORTANCE_HPP
