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

#ifndef GONSTAT_SYNTH_COHORT_HPP
#define GONSTAT_SYNTH_COHORT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gonstat/grade_domain.hpp"
#include "gonstat/score_pipeline.hpp"

namespace gonstat {

// One simulated grader: probability of calling a true referable image
// referable (sens), a true non-referable one non-referable (spec), and
// of marking an image entirely ungradable.
struct GraderProfile {
  std::string grader_id;
  GraderRole role = GraderRole::kOphthalmologist;
  double sens = 0.8;
  double spec = 0.8;
  double ungradable_rate = 0.0;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

// Everything the generator needs to fabricate a cohort with known
// latent truth.  Feature grades come from per-image latent codes that
// each grader reports exactly with probability feature_fidelity;
// round-2 reviews adopt the round-1 majority per item with probability
// revision_rate.
struct CohortSpec {
  long n_images = 0;
  double prevalence = 0.1;
  std::vector<GraderProfile> graders;  // at least 3; each image gets 3
  BetaParams refer_scores{8.0, 2.0};
  BetaParams nonrefer_scores{2.0, 8.0};
  std::array<double, kNumFeatures> feature_rate_refer = {
      0.55, 0.50, 0.45, 0.35, 0.30, 0.30, 0.35, 0.25, 0.50, 0.60, 0.65};
  std::array<double, kNumFeatures> feature_rate_nonrefer = {
      0.18, 0.15, 0.06, 0.08, 0.10, 0.10, 0.08, 0.03, 0.22, 0.12, 0.10};
  double feature_fidelity = 0.8;
  double revision_rate = 0.8;
  // Patient grouping for the visit-selection pipeline: images are dealt
  // to patients holding up to images_per_patient each.
  int images_per_patient = 2;
  uint64_t seed = 0;

  // Throws InvalidSpec on any rate outside [0,1], non-positive Beta
  // shape, fewer than 3 graders, duplicate grader ids, or a
  // non-positive image count.
  void validate() const;
};

struct ImageTruth {
  std::string image_id;
  bool refer = false;
  double score = 0.0;  // the latent model score in [0,1]
};

struct SyntheticCohort {
  std::vector<GradeRecord> grade_log;   // two-round adjudication log
  std::vector<ModelOutput> scores;      // one model, referable mass == truth score
  std::vector<ImageTruth> truths;
  std::vector<PatientRecord> patients;
  double analytic_auc = 0.0;            // of the score model
};

// Deterministic for a fixed spec; a single stream seeded by spec.seed
// drives every draw in image order.
SyntheticCohort generate_cohort(const CohortSpec& spec);

// P(S_refer > S_nonrefer) for independent Beta draws, by high-order
// numeric integration (both shape parameters must be >= 0.5).
double beta_auc(const BetaParams& nonrefer, const BetaParams& refer);

}  // namespace gonstat

#endif  // GONSTAT_SYNTH_COHORT_HPP
