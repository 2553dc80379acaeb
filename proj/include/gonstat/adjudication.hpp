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

#ifndef GONSTAT_ADJUDICATION_HPP
#define GONSTAT_ADJUDICATION_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gonstat/grade_domain.hpp"

namespace gonstat {

// How an image's reference grades were settled:
//   kConsensusRound1  all three round-1 grades identical on every item;
//   kConsensusRound2  unanimity reached during sequential round-2 review;
//   kMedian           never unanimous; per-item median of the latest grades.
enum class Resolution : uint8_t {
  kConsensusRound1,
  kConsensusRound2,
  kMedian,
};

std::string_view resolution_token(Resolution r);
std::optional<Resolution> parse_resolution(std::string_view token);

struct MedianPolicy {
  // The circumlinear-baring scale is categorical; its configured rank order
  // makes the median total.  With the order disabled, a three-way tie on
  // that item raises NonOrdinalTie.
  bool circumlinear_ordered = true;
};

// Adjudicated grades of one image.  An item whose resolved gradability is
// Ungradable carries no grade; when that item is GON risk the image is
// excluded from referral analyses.
struct ReferenceStandard {
  std::string image_id;
  std::optional<GonRisk> gon;
  std::array<std::optional<int>, kNumFeatures> feature{};
  BinaryLabelSet labels;
  Resolution resolution = Resolution::kConsensusRound1;
  int n_reviews = 0;
  bool excluded = false;  // GON risk itself ungradable
};

// Median of three ordinal codes: the majority value when at least two
// agree, otherwise the middle code.  For three codes these coincide with
// the middle order statistic.
int ordinal_median3(int a, int b, int c);

// Two-round adjudication replay of one image's grade log.
//
// Round 1 must hold exactly one record from each of exactly 3 graders.
// Round-2 records, ordered by seq, are sequential revisions by those same
// graders, at most one each (no grader reviews an image more than twice).
// Consensus -- exact agreement on every item, gradability included -- is
// checked after round 1 and again after each round-2 review; once reached,
// later records are audit-only.  Without consensus, each item resolves by
// majority gradability, then by ordinal_median3 over the graders' latest
// codes; when only two codes survive and they differ, the resolution is the
// floor of their mean (the lower middle).
//
// Throws MalformedLog on structural violations and NonOrdinalTie per
// MedianPolicy.
ReferenceStandard resolve_image(const std::vector<GradeRecord>& log,
                                const MedianPolicy& policy = {});

// Single-round median resolution (tuning-style logs): exactly 3 round-1
// records, no round 2; items resolve directly by majority gradability and
// ordinal_median3.
ReferenceStandard resolve_single_round(const std::vector<GradeRecord>& log,
                                       const MedianPolicy& policy = {});

// Groups a mixed log by image and resolves each; output sorted by image_id.
std::vector<ReferenceStandard> resolve_log(
    const std::vector<GradeRecord>& records, bool single_round = false,
    const MedianPolicy& policy = {});

// Cross-tabulation of two referable-GON reference methods over the same
// images.
struct MethodAgreement {
  // counts[a][b]: images graded level a+1 by the first method and b+1 by
  // the second.
  std::array<std::array<long, 4>, 4> counts{};
  long n = 0;
  long n_label_changes = 0;     // off-diagonal total
  long n_referral_changes = 0;  // pairs crossing the referable boundary
};

// Throws LengthMismatch when the lists differ in size.
MethodAgreement method_agreement(const std::vector<GonRisk>& a,
                                 const std::vector<GonRisk>& b);

}  // namespace gonstat

#endif  // GONSTAT_ADJUDICATION_HPP
