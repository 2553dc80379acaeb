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

#ifndef GONSTAT_AGREEMENT_HPP
#define GONSTAT_AGREEMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "gonstat/grade_domain.hpp"

namespace gonstat {

// Disagreement weight between two ordinal codes:
//   kLinear   |a - b|        (default; one step of the scale costs 1)
//   kSquared  (a - b)^2
//   kNominal  1 when a != b
enum class AlphaMetric : uint8_t { kLinear, kSquared, kNominal };

std::string_view alpha_metric_token(AlphaMetric m);
std::optional<AlphaMetric> parse_alpha_metric(std::string_view token);

// Items x graders; missing cells are grades never collected.
struct ReliabilityMatrix {
  std::vector<std::vector<std::optional<double>>> cells;
};

struct AlphaResult {
  double alpha = 0.0;
  double observed_disagreement = 0.0;
  double expected_disagreement = 0.0;
  long n_items_used = 0;  // items with at least two codes
  long n_values = 0;      // pairable values across those items
};

// Krippendorff's alpha, coincidence-matrix formulation with missing data.
// Items holding fewer than two codes are dropped.  Throws DegenerateData
// when expected disagreement is zero (every pairable grade identical) or no
// item is pairable.
AlphaResult krippendorff_alpha(const ReliabilityMatrix& m,
                               AlphaMetric metric = AlphaMetric::kLinear);

/// Which grades feed the round-2 agreement column:
//   kLatest  each grader's latest grade (round-1 grade carried over when the
//            grader never revised);
//   kStrict  round-2 records only.
enum class Round2Scope : uint8_t { kLatest, kStrict };

struct QuestionAlpha {
  std::string question;
  std::optional<AlphaResult> round1;
  std::optional<AlphaResult> round2;
};

// One alpha per graded question (GON risk, GON gradability, each feature)
// and per round, over a full grade log.  Questions whose alpha is
// degenerate report no value.
std::vector<QuestionAlpha> per_question_alpha(
    const std::vector<GradeRecord>& records,
    AlphaMetric metric = AlphaMetric::kLinear,
    Round2Scope scope = Round2Scope::kLatest);

}  // namespace gonstat

#endif  // GONSTAT_AGREEMENT_HPP
