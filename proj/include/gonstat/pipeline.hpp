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

#ifndef GONSTAT_PIPELINE_HPP
#define GONSTAT_PIPELINE_HPP

#include <cstdint>
#include <string>

namespace gonstat {

// One CLI invocation. Paths are only read for the subcommands that
// need them; every output lands in out_dir under a fixed name:
//   simulate           grades.csv scores.csv patients.csv truth.json
//   preprocess         normalized images + the reject log
//   adjudicate         references.csv
//   agreement          alpha.csv
//   metrics            metrics.json roc.csv roc.svg
//   compare-graders    graders.csv graders.svg
//   feature-importance odds_ratios.csv
//   scores             patient_scores.csv
struct RunConfig {
  std::string subcommand;
  std::string grades_path;
  std::string scores_path;
  std::string refs_path;
  std::string patients_path;
  std::string in_dir;
  std::string reject_log;
  std::string out_dir = ".";
  uint64_t seed = 0;
  int bootstrap_n = 2000;
  double ci_level = 0.95;
  double sens_target = 0.90;
  double spec_target = 0.95;
  // compare-graders: ungradable_as_refer | exclude_ungradable_per_grader.
  std::string mode;
  long n_images = 2000;
  double prevalence = 0.1;
  // Negative = keep the default mixed-accuracy panel; a value in [0, 1]
  // overrides every simulated grader uniformly.
  double grader_sens = -1.0;
  double grader_spec = -1.0;
  double ungradable_rate = -1.0;
  // Throws InvalidSpec when a knob is out of range or a needed path is
  // missing for the chosen subcommand.
  void validate() const;
};

void run_pipeline(const RunConfig& cfg);

}  // namespace gonstat

#endif  // GONSTAT_PIPELINE_HPP
