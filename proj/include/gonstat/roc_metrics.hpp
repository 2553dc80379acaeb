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

#ifndef GONSTAT_ROC_METRICS_HPP
#define GONSTAT_ROC_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gonstat/adjudication.hpp"
#include "gonstat/stats_core.hpp"

namespace gonstat {

// One scored image.  The decision rule everywhere in this module is
// "flag referable when score >= threshold".
struct ScoredCase {
  std::string image_id;
  double score = 0.0;  // finite, in [0, 1]
  bool label = false;  // referable per the reference standard
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// Threshold sweep over every distinct score, descending.  The leading
// point carries an infinite threshold so the curve starts at (0, 0); the
// final point is always (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Builds the ROC curve.  The AUC accumulates in exact integer arithmetic
// and equals the tie-adjusted rank statistic
// (concordant + ties/2) / (n_pos * n_neg).  Throws OneClassOnly unless
// both labels occur, ParamOutOfRange on a score outside [0, 1].
RocCurve roc(const std::vector<ScoredCase>& cases);

// Percentile-bootstrap CI for roc().auc over image-level resamples.
// One-class resamples are redrawn within their substream; the redraw
// count lands in the result.  Throws OneClassOnly when the full sample
// is degenerate.
BootstrapResult auc_with_ci(const std::vector<ScoredCase>& cases,
                            const BootstrapOptions& options = {});

struct SensSpec {
  BinomialCI sens;
  BinomialCI spec;
};

// Sensitivity and specificity of "score >= threshold" with
// Clopper-Pearson intervals.  Throws OneClassOnly.
SensSpec sens_spec_at(const std::vector<ScoredCase>& cases, double threshold,
                      double level = 0.95);

enum class OperatingKind : uint8_t {
  kHighSensitivity,
  kHighSpecificity,
  kBalanced,
};

std::string_view operating_kind_token(OperatingKind kind);

struct OperatingPoint {
  OperatingKind kind = OperatingKind::kBalanced;
  // False when no realized threshold meets the target; threshold and the
  // tuning rates are NaN in that case and the other points still return.
  bool achieved = true;
  double threshold = 0.0;  // realized at some tuning-set score
  double tuning_sens = 0.0;
  double tuning_spec = 0.0;
};

// Calibrates the three operating points on a tuning set.  Candidate
// thresholds are the distinct tuning scores.  Balanced minimizes
// |sens - spec| (ties: higher sensitivity, then higher specificity);
// HighSensitivity is the largest threshold with sens >= sens_target;
// HighSpecificity is the smallest threshold with spec >= spec_target.
// Returned in enum order.  Throws OneClassOnly.
std::vector<OperatingPoint> select_operating_points(
    const std::vector<ScoredCase>& tuning, double sens_target = 0.90,
    double spec_target = 0.95);

// ---------------------------------------------------------------------------
// Grader-versus-algorithm comparison.

// One grader's read of one case, aligned by position with the scored
// cases.  refer must be present exactly when gradable.
struct GraderAssessment {
  std::optional<bool> refer;
  bool gradable = true;
};

enum class ComparisonMode : uint8_t {
  // Grader-ungradable counts as a referral; every case stays in.
  kUngradableAsRefer,
  // Each grader is scored on the subset they deemed gradable; the
  // thresholded algorithm is re-tallied on that same subset.
  kExcludeUngradablePerGrader,
};

std::string_view comparison_mode_token(ComparisonMode mode);

struct GraderComparison {
  std::string grader_id;
  ComparisonMode mode = ComparisonMode::kUngradableAsRefer;
  long n = 0;  // cases entering this grader's comparison
  BinomialCI sens;
  BinomialCI spec;
  // Discordant-pair tallies behind the two McNemar tests: sensitivity
  // pairs on label-positive cases, specificity pairs on label-negative.
  PairedOutcome sens_pairs;
  PairedOutcome spec_pairs;
  double p_sens = 1.0;
  double p_spec = 1.0;
};

// Compares each grader against the algorithm thresholded at
// op_threshold.  Grader sens/spec carry Clopper-Pearson intervals;
// p-values come from the exact two-tailed McNemar test, paired on
// label-positive cases for sensitivity and label-negative for
// specificity.  Throws AlignmentError when a grader's vector length or
// refer/gradable consistency breaks, OneClassOnly when a grader's
// working subset loses a class.
std::vector<GraderComparison> compare_graders(
    const std::vector<ScoredCase>& cases,
    const std::map<std::string, std::vector<GraderAssessment>>& graders,
    double op_threshold, ComparisonMode mode, double level = 0.95);

// ---------------------------------------------------------------------------
// Feature-level referral breakdown of an adjudicated cohort.

struct LevelReferralRate {
  FeatureId feature = FeatureId::kRimIvsS;
  int level = 1;        // code on the feature's scale
  BinomialCI refer;     // P(refer | this level); k refers among n graded
};

struct ReferralBreakdown {
  // Feature declaration order, levels ascending; levels never seen in
  // the cohort are omitted.
  std::vector<LevelReferralRate> rates;
  // Vertical CDR tenths split by referral status, and their two-sample
  // Kolmogorov-Smirnov comparison (absent when either side is empty).
  std::vector<double> vcdr_refer;
  std::vector<double> vcdr_no_refer;
  std::optional<KsResult> vcdr_ks;
};

// Conditional referral rates per feature level over the non-excluded,
// per-item-graded part of a resolved cohort.  Throws EmptySample when no
// image carries a GON label.
ReferralBreakdown feature_referral_rates(
    const std::vector<ReferenceStandard>& refs, double level = 0.95);

}  // namespace gonstat

#endif  // GONSTAT_ROC_METRICS_HPP
