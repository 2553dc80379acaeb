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

#ifndef GONSTAT_GRADE_DOMAIN_HPP
#define GONSTAT_GRADE_DOMAIN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gonstat {

// Glaucomatous optic nerve head (GON) risk, ordered by severity.  Codes are
// the ordinal positions used by median resolution.
enum class GonRisk : uint8_t {
  kNonGlaucomatous = 1,
  kLowRisk = 2,
  kHighRisk = 3,
  kLikely = 4,
};

enum class Gradability : uint8_t { kGradable, kUngradable };

enum class GraderRole : uint8_t {
  kGlaucomaSpecialist,
  kOphthalmologist,
  kOptometrist,
  kUnknown,
};

// Optic nerve head features graded alongside GON risk.  Declaration order is
// the canonical column order of every file schema and the tie-break order of
// ranked reports.
enum class FeatureId : uint8_t {
  kRimIvsS = 0,        // inferior vs superior neuroretinal rim width
  kRimSvsT,            // superior vs temporal rim width
  kNotch,              // rim notch
  kLaminarDot,         // laminar dot sign
  kNasalEmerging,      // vessel trunk emerging nasally
  kNasalDirected,      // vessels directed nasally
  kCircumlinear,       // baring of circumlinear vessels
  kDiscHeme,           // disc hemorrhage
  kBetaPpa,            // beta peripapillary atrophy
  kRnflDefect,         // retinal nerve fiber layer defect
  kVerticalCdr,        // vertical cup-to-disc ratio, tenths
};

inline constexpr int kNumFeatures = 11;

inline constexpr std::array<FeatureId, kNumFeatures> kAllFeatures = {
    FeatureId::kRimIvsS,       FeatureId::kRimSvsT,
    FeatureId::kNotch,         FeatureId::kLaminarDot,
    FeatureId::kNasalEmerging, FeatureId::kNasalDirected,
    FeatureId::kCircumlinear,  FeatureId::kDiscHeme,
    FeatureId::kBetaPpa,       FeatureId::kRnflDefect,
    FeatureId::kVerticalCdr,
};

// Ordinal scale of a feature.  Codes run 1..level_count ascending; the
// Circumlinear scale is categorical but carries a configured rank order
// (none < present-not-bared < possibly < present-and-bared) so that median
// resolution stays total.  VerticalCdr codes are tenths: code k means k/10.
int level_count(FeatureId f);
std::string_view level_token(FeatureId f, int code);
std::optional<int> parse_level(FeatureId f, std::string_view token);

// Column token of a feature in every CSV schema.
std::string_view feature_token(FeatureId f);
std::optional<FeatureId> parse_feature_token(std::string_view token);

// Human-readable label of the binarized predictor, e.g. "vertical_cdr>=0.7".
std::string predictor_label(FeatureId f);

std::string_view gon_token(GonRisk g);
std::optional<GonRisk> parse_gon(std::string_view token);

std::string_view gradability_token(Gradability g);
std::optional<Gradability> parse_gradability(std::string_view token);

std::string_view role_token(GraderRole r);
GraderRole parse_role(std::string_view token);  // unrecognized -> kUnknown

// Referable GON: high-risk or likely.
inline bool binarize_gon(GonRisk g) {
  return static_cast<int>(g) >= static_cast<int>(GonRisk::kHighRisk);
}

// Binary cutoff of a feature grade.  Throws ParamOutOfRange on a code
// outside the scale.
bool binarize_feature(FeatureId f, int code);

// One grader's assessment of one image in one round.  Every item (GON plus
// each feature) carries a gradability flag; a grade value is present iff the
// item was gradable.
struct GradeRecord {
  std::string image_id;
  std::string grader_id;
  GraderRole role = GraderRole::kUnknown;
  int round = 1;  // 1 or 2
  int seq = 1;    // order of review within the round, >= 1
  Gradability gon_gradability = Gradability::kGradable;
  std::optional<GonRisk> gon;
  std::array<Gradability, kNumFeatures> feature_gradability{};
  std::array<std::optional<int>, kNumFeatures> feature{};

  // Throws InvariantViolation unless value-present == gradable for every
  // item and every code is on its scale.
  void validate() const;
};

// Binary view of a resolved (or single) grade set.  Absent entries are
// items excluded as ungradable.
struct BinaryLabelSet {
  std::optional<bool> refer;
  std::array<std::optional<bool>, kNumFeatures> feature{};
};

BinaryLabelSet binarize_labels(
    const std::optional<GonRisk>& gon,
    const std::array<std::optional<int>, kNumFeatures>& features);

}  // namespace gonstat

#endif  // GONSTAT_GRADE_DOMAIN_HPP
