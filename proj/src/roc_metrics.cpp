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

#include "gonstat/roc_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gonstat/errors.hpp"

namespace gonstat {

namespace {

void check_score(const ScoredCase& c) {
  if (!std::isfinite(c.score) || c.score < 0.0 || c.score > 1.0) {
    throw ParamOutOfRange("score outside [0, 1] for image " + c.image_id);
  }
}

// Cumulative counts at each distinct score, descending.  acc gathers the
// exact integer 2*concordant + tied so auc = acc / (2 * n_pos * n_neg).
struct SweepStep {
  double threshold = 0.0;
  long tp = 0;
  long fp = 0;
};

struct Sweep {
  std::vector<SweepStep> steps;
  long n_pos = 0;
  long n_neg = 0;
  long long acc = 0;
};

Sweep sweep_cases(const std::vector<ScoredCase>& cases) {
  std::vector<std::pair<double, bool>> order;
  order.reserve(cases.size());
  for (const ScoredCase& c : cases) {
    check_score(c);
    order.emplace_back(c.score, c.label);
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  Sweep s;
  long tp = 0;
  long fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    double score = order[i].first;
    long p_here = 0;
    long n_here = 0;
    while (i < order.size() && order[i].first == score) {
      (order[i].second ? p_here : n_here) += 1;
      ++i;
    }
    s.acc += static_cast<long long>(n_here) * (2 * tp + p_here);
    tp += p_here;
    fp += n_here;
    s.steps.push_back({score, tp, fp});
  }
  s.n_pos = tp;
  s.n_neg = fp;
  return s;
}

double auc_from(long long acc, long n_pos, long n_neg) {
  return static_cast<double>(acc) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

RocCurve roc(const std::vector<ScoredCase>& cases) {
  Sweep s = sweep_cases(cases);
  if (s.n_pos == 0 || s.n_neg == 0) {
    throw OneClassOnly("roc needs both a referable and a non-referable case");
  }
  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const SweepStep& step : s.steps) {
    curve.points.push_back(
        {step.threshold,
         static_cast<double>(step.fp) / static_cast<double>(s.n_neg),
         static_cast<double>(step.tp) / static_cast<double>(s.n_pos)});
  }
  curve.auc = auc_from(s.acc, s.n_pos, s.n_neg);
  return curve;
}

BootstrapResult auc_with_ci(const std::vector<ScoredCase>& cases,
                            const BootstrapOptions& options) {
  // Map each case to its distinct-score group, descending, so every
  // resample reduces to per-group counts instead of a fresh sort.
  std::vector<double> scores;
  scores.reserve(cases.size());
  bool any_pos = false;
  bool any_neg = false;
  for (const ScoredCase& c : cases) {
    check_score(c);
    scores.push_back(c.score);
    (c.label ? any_pos : any_neg) = true;
  }
  if (!any_pos || !any_neg) {
    throw OneClassOnly("auc needs both a referable and a non-referable case");
  }
  std::vector<double> distinct = scores;
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  std::vector<size_t> group(cases.size());
  for (size_t i = 0; i < cases.size(); ++i) {
    group[i] = static_cast<size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), scores[i],
                         std::greater<>()) -
        distinct.begin());
  }

  std::vector<long> pos_at(distinct.size());
  std::vector<long> neg_at(distinct.size());
  auto stat =
      [&](const std::vector<size_t>& idx) -> std::optional<double> {
    std::fill(pos_at.begin(), pos_at.end(), 0L);
    std::fill(neg_at.begin(), neg_at.end(), 0L);
    for (size_t i : idx) {
      (cases[i].label ? pos_at[group[i]] : neg_at[group[i]]) += 1;
    }
    long long acc = 0;
    long tp = 0;
    long fp = 0;
    for (size_t g = 0; g < distinct.size(); ++g) {
      acc += static_cast<long long>(neg_at[g]) * (2 * tp + pos_at[g]);
      tp += pos_at[g];
      fp += neg_at[g];
    }
    if (tp == 0 || fp == 0) return std::nullopt;
    return auc_from(acc, tp, fp);
  };
  return bootstrap_ci(cases.size(), stat, options);
}

SensSpec sens_spec_at(const std::vector<ScoredCase>& cases, double threshold,
                      double level) {
  long tp = 0;
  long fn = 0;
  long tn = 0;
  long fp = 0;
  for (const ScoredCase& c : cases) {
    check_score(c);
    bool flagged = c.score >= threshold;
    if (c.label) {
      (flagged ? tp : fn) += 1;
    } else {
      (flagged ? fp : tn) += 1;
    }
  }
  if (tp + fn == 0 || tn + fp == 0) {
    throw OneClassOnly("sensitivity and specificity need both classes");
  }
  SensSpec out;
  out.sens = clopper_pearson(tp, tp + fn, level);
  out.spec = clopper_pearson(tn, tn + fp, level);
  return out;
}

std::string_view operating_kind_token(OperatingKind kind) {
  switch (kind) {
    case OperatingKind::kHighSensitivity:
      return "high_sensitivity";
    case OperatingKind::kHighSpecificity:
      return "high_specificity";
    case OperatingKind::kBalanced:
      return "balanced";
  }
  return "balanced";
}

std::vector<OperatingPoint> select_operating_points(
    const std::vector<ScoredCase>& tuning, double sens_target,
    double spec_target) {
  Sweep s = sweep_cases(tuning);
  if (s.n_pos == 0 || s.n_neg == 0) {
    throw OneClassOnly("operating points need both classes in the tuning set");
  }
  const long P = s.n_pos;
  const long N = s.n_neg;
  auto sens_at = [&](const SweepStep& st) {
    return static_cast<double>(st.tp) / static_cast<double>(P);
  };
  auto spec_at = [&](const SweepStep& st) {
    return static_cast<double>(N - st.fp) / static_cast<double>(N);
  };
  auto make = [&](OperatingKind kind, const SweepStep& st) {
    OperatingPoint p;
    p.kind = kind;
    p.threshold = st.threshold;
    p.tuning_sens = sens_at(st);
    p.tuning_spec = spec_at(st);
    return p;
  };
  auto missed = [&](OperatingKind kind) {
    OperatingPoint p;
    p.kind = kind;
    p.achieved = false;
    p.threshold = std::numeric_limits<double>::quiet_NaN();
    p.tuning_sens = std::numeric_limits<double>::quiet_NaN();
    p.tuning_spec = std::numeric_limits<double>::quiet_NaN();
    return p;
  };

  std::vector<OperatingPoint> out;

  // Sensitivity grows as the sweep descends: take the first qualifying
  // step, which carries the largest threshold.
  {
    const SweepStep* hit = nullptr;
    for (const SweepStep& st : s.steps) {
      if (sens_at(st) >= sens_target) {
        hit = &st;
        break;
      }
    }
    out.push_back(hit ? make(OperatingKind::kHighSensitivity, *hit)
                      : missed(OperatingKind::kHighSensitivity));
  }

  // Specificity shrinks as the sweep descends: take the last qualifying
  // step, which carries the smallest threshold.
  {
    const SweepStep* hit = nullptr;
    for (const SweepStep& st : s.steps) {
      if (spec_at(st) >= spec_target) hit = &st;
    }
    out.push_back(hit ? make(OperatingKind::kHighSpecificity, *hit)
                      : missed(OperatingKind::kHighSpecificity));
  }

  // Balanced point by exact integer comparison:
  // |sens - spec| = |tp*N - (N - fp)*P| / (P*N).
  {
    const SweepStep* best = nullptr;
    long long best_num = 0;
    for (const SweepStep& st : s.steps) {
      long long num = std::llabs(static_cast<long long>(st.tp) * N -
                                 static_cast<long long>(N - st.fp) * P);
      bool better = false;
      if (best == nullptr || num < best_num) {
        better = true;
      } else if (num == best_num) {
        if (st.tp > best->tp) {
          better = true;
        } else if (st.tp == best->tp && st.fp < best->fp) {
          better = true;
        }
      }
      if (better) {
        best = &st;
        best_num = num;
      }
    }
    out.push_back(make(OperatingKind::kBalanced, *best));
  }
  return out;
}

std::string_view comparison_mode_token(ComparisonMode mode) {
  switch (mode) {
    case ComparisonMode::kUngradableAsRefer:
      return "ungradable_as_refer";
    case ComparisonMode::kExcludeUngradablePerGrader:
      return "exclude_ungradable_per_grader";
  }
  return "ungradable_as_refer";
}

std::vector<GraderComparison> compare_graders(
    const std::vector<ScoredCase>& cases,
    const std::map<std::string, std::vector<GraderAssessment>>& graders,
    double op_threshold, ComparisonMode mode, double level) {
  for (const ScoredCase& c : cases) check_score(c);
  std::vector<GraderComparison> out;
  for (const auto& [grader_id, reads] : graders) {
    if (reads.size() != cases.size()) {
      throw AlignmentError("grader " + grader_id + " graded " +
                           std::to_string(reads.size()) + " of " +
                           std::to_string(cases.size()) + " cases");
    }
    GraderComparison cmp;
    cmp.grader_id = grader_id;
    cmp.mode = mode;
    long sens_k = 0;
    long sens_n = 0;
    long spec_k = 0;
    long spec_n = 0;
    for (size_t i = 0; i < cases.size(); ++i) {
      const GraderAssessment& read = reads[i];
      if (read.refer.has_value() != read.gradable) {
        throw AlignmentError("grader " + grader_id +
                             " holds a referral call inconsistent with "
                             "gradability at case " +
                             std::to_string(i));
      }
      bool grader_refer;
      if (read.gradable) {
        grader_refer = *read.refer;
      } else if (mode == ComparisonMode::kUngradableAsRefer) {
        grader_refer = true;
      } else {
        continue;  // this grader never read the image
      }
      bool algo_refer = cases[i].score >= op_threshold;
      cmp.n += 1;
      if (cases[i].label) {
        sens_n += 1;
        sens_k += grader_refer ? 1 : 0;
        bool grader_right = grader_refer;
        bool algo_right = algo_refer;
        if (grader_right && !algo_right) {
          cmp.sens_pairs.b += 1;
        } else if (!grader_right && algo_right) {
          cmp.sens_pairs.c += 1;
        } else {
          cmp.sens_pairs.n_concordant += 1;
        }
      } else {
        spec_n += 1;
        spec_k += grader_refer ? 0 : 1;
        bool grader_right = !grader_refer;
        bool algo_right = !algo_refer;
        if (grader_right && !algo_right) {
          cmp.spec_pairs.b += 1;
        } else if (!grader_right && algo_right) {
          cmp.spec_pairs.c += 1;
        } else {
          cmp.spec_pairs.n_concordant += 1;
        }
      }
    }
    if (sens_n == 0 || spec_n == 0) {
      throw OneClassOnly("grader " + grader_id +
                         " kept no case of one class");
    }
    cmp.sens = clopper_pearson(sens_k, sens_n, level);
    cmp.spec = clopper_pearson(spec_k, spec_n, level);
    cmp.p_sens = mcnemar_exact(cmp.sens_pairs);
    cmp.p_spec = mcnemar_exact(cmp.spec_pairs);
    out.push_back(std::move(cmp));
  }
  return out;
}

ReferralBreakdown feature_referral_rates(
    const std::vector<ReferenceStandard>& refs, double level) {
  ReferralBreakdown out;
  long labeled = 0;
  for (const ReferenceStandard& r : refs) {
    labeled += r.labels.refer.has_value() ? 1 : 0;
  }
  if (labeled == 0) {
    throw EmptySample("no image carries a resolved GON label");
  }

  for (FeatureId f : kAllFeatures) {
    size_t fi = static_cast<size_t>(f);
    int levels = level_count(f);
    std::vector<long> n_at(static_cast<size_t>(levels) + 1, 0);
    std::vector<long> k_at(static_cast<size_t>(levels) + 1, 0);
    for (const ReferenceStandard& r : refs) {
      if (!r.labels.refer.has_value() || !r.feature[fi].has_value()) continue;
      int code = *r.feature[fi];
      n_at[static_cast<size_t>(code)] += 1;
      k_at[static_cast<size_t>(code)] += *r.labels.refer ? 1 : 0;
    }
    for (int code = 1; code <= levels; ++code) {
      if (n_at[static_cast<size_t>(code)] == 0) continue;
      LevelReferralRate rate;
      rate.feature = f;
      rate.level = code;
      rate.refer = clopper_pearson(k_at[static_cast<size_t>(code)],
                                   n_at[static_cast<size_t>(code)], level);
      out.rates.push_back(rate);
    }
  }

  size_t vcdr = static_cast<size_t>(FeatureId::kVerticalCdr);
  for (const ReferenceStandard& r : refs) {
    if (!r.labels.refer.has_value() || !r.feature[vcdr].has_value()) continue;
    double tenths = static_cast<double>(*r.feature[vcdr]) / 10.0;
    (*r.labels.refer ? out.vcdr_refer : out.vcdr_no_refer).push_back(tenths);
  }
  if (!out.vcdr_refer.empty() && !out.vcdr_no_refer.empty()) {
    out.vcdr_ks = ks_two_sample(out.vcdr_refer, out.vcdr_no_refer,
                                /*exact_small=*/true);
  }
  return out;
}

}  // namespace gonstat
