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

#include "gonstat/grade_domain.hpp"

#include <algorithm>

#include "gonstat/errors.hpp"

namespace gonstat {

namespace {

struct Scale {
  int count;
  // Tokens indexed by code-1.
  std::array<std::string_view, 9> tokens;
  // Codes mapping to binary true, terminated by 0.
  std::array<int, 4> positive;
};

// Binary cutoffs: yes-or-possible for the sign features, yes-only for the
// two nasalization questions, present-and-bared only for circumlinear
// baring, the "clearly thinner" pole for the two rim comparisons, and
// >= 0.7 for the vertical cup-to-disc ratio.
const Scale& scale_of(FeatureId f) {
  static const std::array<Scale, kNumFeatures> kScales = {{
      // kRimIvsS: positive when the superior rim is clearly wider (I < S).
      {3, {"i_clearly_greater", "similar", "s_clearly_greater"}, {3, 0}},
      // kRimSvsT: positive when the temporal rim is clearly wider (S < T).
      {3, {"s_clearly_greater", "similar", "t_clearly_greater"}, {3, 0}},
      // kNotch
      {3, {"no", "possible", "yes"}, {2, 3, 0}},
      // kLaminarDot
      {3, {"no", "possible", "yes"}, {2, 3, 0}},
      // kNasalEmerging
      {3, {"no", "borderline", "yes"}, {3, 0}},
      // kNasalDirected
      {3, {"no", "minimal", "yes"}, {3, 0}},
      // kCircumlinear, categorical with configured rank order
      {4,
       {"none_present", "present_not_bared", "possibly", "present_bared"},
       {4, 0}},
      // kDiscHeme
      {3, {"no", "possible", "yes"}, {2, 3, 0}},
      // kBetaPpa
      {3, {"no", "possible", "yes"}, {2, 3, 0}},
      // kRnflDefect
      {3, {"no", "possible", "yes"}, {2, 3, 0}},
      // kVerticalCdr, tenths
      {9,
       {"0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"},
       {7, 8, 9, 0}},
  }};
  return kScales[static_cast<size_t>(f)];
}

constexpr std::array<std::string_view, kNumFeatures> kFeatureTokens = {
    "rim_i_vs_s",     "rim_s_vs_t",  "notch",        "laminar_dot",
    "nasal_emerging", "nasal_directed", "circumlinear", "disc_heme",
    "beta_ppa",       "rnfl_defect", "vertical_cdr",
};

constexpr std::array<std::string_view, 4> kGonTokens = {
    "non_glaucomatous", "low_risk", "high_risk", "likely"};

constexpr std::array<std::string_view, 4> kRoleTokens = {
    "glaucoma_specialist", "ophthalmologist", "optometrist", "unknown"};

}  // namespace

int level_count(FeatureId f) { return scale_of(f).count; }

std::string_view level_token(FeatureId f, int code) {
  const Scale& s = scale_of(f);
  if (code < 1 || code > s.count) {
    throw ParamOutOfRange("grade code " + std::to_string(code) +
                          " outside scale of " +
                          std::string(feature_token(f)));
  }
  return s.tokens[static_cast<size_t>(code - 1)];
}

std::optional<int> parse_level(FeatureId f, std::string_view token) {
  const Scale& s = scale_of(f);
  for (int code = 1; code <= s.count; ++code) {
    if (s.tokens[static_cast<size_t>(code - 1)] == token) return code;
  }
  return std::nullopt;
}

std::string_view feature_token(FeatureId f) {
  return kFeatureTokens[static_cast<size_t>(f)];
}

std::optional<FeatureId> parse_feature_token(std::string_view token) {
  for (FeatureId f : kAllFeatures) {
    if (feature_token(f) == token) return f;
  }
  return std::nullopt;
}

std::string predictor_label(FeatureId f) {
  switch (f) {
    case FeatureId::kRimIvsS:
      return "rim_i_vs_s:i_lt_s";
    case FeatureId::kRimSvsT:
      return "rim_s_vs_t:s_lt_t";
    case FeatureId::kNasalEmerging:
      return "nasal_emerging:yes";
    case FeatureId::kNasalDirected:
      return "nasal_directed:yes";
    case FeatureId::kCircumlinear:
      return "circumlinear:present_bared";
    case FeatureId::kVerticalCdr:
      return "vertical_cdr>=0.7";
    default:
      return std::string(feature_token(f)) + ":yes_or_possible";
  }
}

std::string_view gon_token(GonRisk g) {
  return kGonTokens[static_cast<size_t>(g) - 1];
}

std::optional<GonRisk> parse_gon(std::string_view token) {
  for (int i = 0; i < 4; ++i) {
    if (kGonTokens[static_cast<size_t>(i)] == token) {
      return static_cast<GonRisk>(i + 1);
    }
  }
  return std::nullopt;
}

std::string_view gradability_token(Gradability g) {
  return g == Gradability::kGradable ? "gradable" : "ungradable";
}

std::optional<Gradability> parse_gradability(std::string_view token) {
  if (token == "gradable") return Gradability::kGradable;
  if (token == "ungradable") return Gradability::kUngradable;
  return std::nullopt;
}

std::string_view role_token(GraderRole r) {
  return kRoleTokens[static_cast<size_t>(r)];
}

GraderRole parse_role(std::string_view token) {
  for (int i = 0; i < 4; ++i) {
    if (kRoleTokens[static_cast<size_t>(i)] == token) {
      return static_cast<GraderRole>(i);
    }
  }
  return GraderRole::kUnknown;
}

bool binarize_feature(FeatureId f, int code) {
  const Scale& s = scale_of(f);
  if (code < 1 || code > s.count) {
    throw ParamOutOfRange("grade code " + std::to_string(code) +
                          " outside scale of " +
                          std::string(feature_token(f)));
  }
  for (int p : s.positive) {
    if (p == 0) break;
    if (p == code) return true;
  }
  return false;
}

void GradeRecord::validate() const {
  if (round != 1 && round != 2) {
    throw InvariantViolation("round must be 1 or 2 for image " + image_id);
  }
  if (seq < 1) {
    throw InvariantViolation("seq must be >= 1 for image " + image_id);
  }
  if ((gon_gradability == Gradability::kGradable) != gon.has_value()) {
    throw InvariantViolation("gon grade presence disagrees with gradability "
                             "for image " + image_id);
  }
  for (FeatureId f : kAllFeatures) {
    size_t i = static_cast<size_t>(f);
    bool gradable = feature_gradability[i] == Gradability::kGradable;
    if (gradable != feature[i].has_value()) {
      throw InvariantViolation(
          std::string(feature_token(f)) +
          " grade presence disagrees with gradability for image " + image_id);
    }
    if (feature[i] &&
        (*feature[i] < 1 || *feature[i] > level_count(f))) {
      throw InvariantViolation(std::string(feature_token(f)) +
                               " grade code outside scale for image " +
                               image_id);
    }
  }
}

BinaryLabelSet binarize_labels(
    const std::optional<GonRisk>& gon,
    const std::array<std::optional<int>, kNumFeatures>& features) {
  BinaryLabelSet out;
  if (gon) out.refer = binarize_gon(*gon);
  for (FeatureId f : kAllFeatures) {
    size_t i = static_cast<size_t>(f);
    if (features[i]) out.feature[i] = binarize_feature(f, *features[i]);
  }
  return out;
}

}  // namespace gonstat
