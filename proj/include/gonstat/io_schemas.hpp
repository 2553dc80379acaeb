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

#ifndef GONSTAT_IO_SCHEMAS_HPP
#define GONSTAT_IO_SCHEMAS_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gonstat/adjudication.hpp"
#include "gonstat/grade_domain.hpp"
#include "gonstat/score_pipeline.hpp"
#include "gonstat/synth_cohort.hpp"

namespace gonstat {

// Every reader validates the header row and reports failures as
// SchemaError or InvariantViolation carrying the 1-based CSV line.
// Empty cells encode absent values throughout. Writers are atomic
// (temp file + rename) and their output re-ingests losslessly.

// Columns: image_id, grader_id, grader_role, round, seq, gon,
// gon_gradable, then per feature <feature> and <feature>_gradable.
// Grades are written as scale tokens, not numeric codes.
std::vector<std::string> grade_log_header();
void write_grade_log(const std::string& path,
                     const std::vector<GradeRecord>& records);
std::vector<GradeRecord> read_grade_log(const std::string& path);

// Columns: image_id, model_id, p_non, p_low, p_high, p_likely, then
// per feature one probability column per scale level, named
// <feature>_p<code>. A feature head is all-present or all-empty.
std::vector<std::string> score_header();
void write_scores(const std::string& path,
                  const std::vector<ModelOutput>& outputs);
std::vector<ModelOutput> read_scores(const std::string& path);

// The reference CSV stores the adjudicated binary labels, not the
// underlying scale codes; an empty refer cell marks an image whose
// risk question was unresolvable (excluded from analysis).
struct ReferenceRow {
  std::string image_id;
  std::optional<bool> refer;
  Resolution resolution = Resolution::kConsensusRound1;
  int n_reviews = 0;
  std::array<std::optional<bool>, kNumFeatures> feature{};
};
ReferenceRow reference_row(const ReferenceStandard& ref);
// Rebuilds the analysis-facing view: binary labels, resolution and
// review count; the ordinal codes are not recoverable from the file.
ReferenceStandard to_reference_standard(const ReferenceRow& row);
std::vector<std::string> reference_header();
void write_references(const std::string& path,
                      const std::vector<ReferenceRow>& rows);
void write_references(const std::string& path,
                      const std::vector<ReferenceStandard>& refs);
std::vector<ReferenceRow> read_references(const std::string& path);

// Columns: patient_id, visit_date, image_id, eye, code_kind, code_date.
// A row with a visit_date is one visit image (or an imageless visit);
// a row with a code_kind is one coded event. Visit identity within a
// patient is (visit_date, eye), so the writer rejects two visits of a
// patient sharing both (the flat schema could not keep them apart).
std::vector<std::string> patient_header();
void write_patients(const std::string& path,
                    const std::vector<PatientRecord>& patients);
std::vector<PatientRecord> read_patients(const std::string& path);

// Latent truth sidecar, JSON: analytic AUC of the generative score
// model plus every image's true label and score.
struct TruthFile {
  double analytic_auc = 0.0;
  std::vector<ImageTruth> truths;
};
void write_truth(const std::string& path, const TruthFile& truth);
TruthFile read_truth(const std::string& path);

}  // namespace gonstat

#endif  // GONSTAT_IO_SCHEMAS_HPP
