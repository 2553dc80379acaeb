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

#ifndef GONSTAT_SCORE_PIPELINE_HPP
#define GONSTAT_SCORE_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gonstat/grade_domain.hpp"

namespace gonstat {

// ---------------------------------------------------------------------------
// Calendar dates, exact day arithmetic.

struct Date {
  long days = 0;  // civil days since 1970-01-01

  bool operator==(const Date& o) const { return days == o.days; }
  bool operator<(const Date& o) const { return days < o.days; }
};

// Strict zero-padded ISO form YYYY-MM-DD.  Throws SchemaError on any
// malformed or out-of-range field.
Date parse_date(std::string_view token);
std::string date_token(Date d);

// ---------------------------------------------------------------------------
// Raw model outputs.

// Per-image output of one model: the four-way GON risk head plus one
// probability vector per feature head.  An empty feature vector means
// the model carries no head for that feature.
struct ModelOutput {
  std::string image_id;
  std::string model_id;
  std::array<double, 4> gon_probs{};  // non, low, high, likely
  std::array<std::vector<double>, kNumFeatures> feature_probs{};

  // Throws ShapeMismatch when a feature head's length differs from its
  // scale, ParamOutOfRange on a probability outside [0, 1], and
  // InvariantViolation when any present head's sum strays from 1 by
  // more than 1e-6.
  void validate() const;
};

// Elementwise mean over one image's outputs from several models.
// Inputs are first brought into a canonical order, so the result is bit
// for bit independent of input permutation.  Throws EmptySample on an
// empty list, ShapeMismatch when image ids or head shapes disagree.
ModelOutput ensemble_average(const std::vector<ModelOutput>& outputs);

enum class ScoreRule : uint8_t {
  kReferableMass,    // p(high) + p(likely)
  kArgmaxReferable,  // 1 when the modal class is referable, else 0
};

// Continuous referable-GON score of one output.  Argmax ties resolve to
// the lowest class index.
double referable_score(const ModelOutput& m,
                       ScoreRule rule = ScoreRule::kReferableMass);

// Probability mass of the feature's positive codes, or nothing when the
// model has no head for it.
std::optional<double> feature_positive_mass(const ModelOutput& m,
                                            FeatureId feature);

// ---------------------------------------------------------------------------
// Patient-level structures.

enum class Eye : uint8_t { kOD, kOS, kUnknown };
enum class CodeKind : uint8_t { kGlaucomaIcd, kOnhReferral };

std::string_view eye_token(Eye eye);
std::optional<Eye> parse_eye(std::string_view token);
std::string_view code_kind_token(CodeKind kind);
std::optional<CodeKind> parse_code_kind(std::string_view token);

struct Visit {
  Date date;
  Eye eye = Eye::kUnknown;
  std::vector<std::string> images;
};

struct CodeEvent {
  Date date;
  CodeKind kind = CodeKind::kGlaucomaIcd;
};

struct PatientRecord {
  std::string patient_id;
  std::vector<Visit> visits;
  std::vector<CodeEvent> code_events;
};

// Picks the analysis visit.  An ONH-referral event selects the visit on
// its date (earliest such event with a matching visit wins).  Otherwise
// the earliest glaucoma-ICD event selects the visit minimizing the
// absolute day distance among visits dated no earlier than one year
// (365 days) before the code; equidistant candidates resolve to the
// earlier visit.  With no usable event the earliest visit wins.  Throws
// NoVisits.
const Visit& select_visit(const PatientRecord& p);

// When a patient's visits span more than one eye tag, keeps exactly one
// eye, chosen by a seeded coin keyed to the patient id so the draw is
// reproducible and independent of processing order.
PatientRecord restrict_to_one_eye(const PatientRecord& p, uint64_t seed);

struct ImageScore {
  std::string image_id;
  double score = 0.0;
};

// The image with the highest score; ties go to the lexicographically
// smaller image id.  Throws NoImages on an empty list, ParamOutOfRange
// on a score outside [0, 1].
ImageScore patient_level_score(const std::vector<ImageScore>& scores);

}  // namespace gonstat

#endif  // GONSTAT_SCORE_PIPELINE_HPP
