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

#ifndef GONSTAT_REPORT_HPP
#define GONSTAT_REPORT_HPP

#include <string>
#include <vector>

#include "gonstat/agreement.hpp"
#include "gonstat/feature_importance.hpp"
#include "gonstat/roc_metrics.hpp"
#include "gonstat/stats_core.hpp"
#include "json.hpp"

namespace gonstat {

// Report tables round decimals to six significant digits; the JSON
// report keeps full precision (shortest round-trip form). All report
// writers are atomic and byte-stable for identical inputs.

double normal_quantile(double p);

nlohmann::ordered_json binomial_json(const BinomialCI& ci);
nlohmann::ordered_json bootstrap_json(const BootstrapResult& r);

// Columns: grader_id, mode, n, sens, sens_lower, sens_upper, spec,
// spec_lower, spec_upper, p_sens, p_spec.
void write_grader_table(const std::string& path,
                        const std::vector<GraderComparison>& comparisons);

// Columns: predictor, beta, se, odds_ratio, or_lower, or_upper, p,
// rank, quasi_separated. The intercept row is last and unranked; the
// odds-ratio CI is exp(beta +- z*se) at the given level.
void write_odds_ratio_table(const std::string& path,
                            const RegressionReport& report, double level);

// Columns: question, round, alpha, observed_disagreement,
// expected_disagreement, n_items, n_values. One row per question and
// available round.
void write_alpha_table(const std::string& path,
                       const std::vector<QuestionAlpha>& alphas);

// Columns: threshold, fpr, tpr; thresholds descend from inf.
void write_roc_csv(const std::string& path, const RocCurve& curve);

struct GraderDot {
  std::string grader_id;
  double sens = 0.0;
  double spec = 0.0;
};
// Write-only plot: ROC polyline, chance diagonal, one dot per grader.
void write_roc_svg(const std::string& path, const RocCurve& curve,
                   const std::vector<GraderDot>& dots);

}  // namespace gonstat

#endif  // GONSTAT_REPORT_HPP
