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

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "gonstat/errors.hpp"
#include "gonstat/pipeline.hpp"
#include "gonstat/version.hpp"

namespace {

// Knobs shared by the analysis subcommands.
void add_common_flags(CLI::App* sub, gonstat::RunConfig* cfg) {
  sub->add_option("--seed", cfg->seed, "RNG seed");
  sub->add_option("--bootstrap-n", cfg->bootstrap_n,
                  "bootstrap resample count")
      ->check(CLI::PositiveNumber);
  sub->add_option("--ci-level", cfg->ci_level, "confidence level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  sub->add_option("--sens-target", cfg->sens_target,
                  "high-sensitivity operating target")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--spec-target", cfg->spec_target,
                  "high-specificity operating target")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--out-dir", cfg->out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grader-panel screening statistics toolkit"};
  app.set_version_flag("--version", gonstat::kVersion);
  app.require_subcommand(1);

  gonstat::RunConfig cfg;

  CLI::App* simulate =
      app.add_subcommand("simulate", "generate a synthetic graded cohort");
  add_common_flags(simulate, &cfg);
  simulate->add_option("--n-images", cfg.n_images, "cohort size")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--prevalence", cfg.prevalence,
                       "referable fraction")
      ->check(CLI::Range(0.0, 1.0));
  simulate
      ->add_option("--grader-sens", cfg.grader_sens,
                   "override every grader's sensitivity")
      ->check(CLI::Range(0.0, 1.0));
  simulate
      ->add_option("--grader-spec", cfg.grader_spec,
                   "override every grader's specificity")
      ->check(CLI::Range(0.0, 1.0));
  simulate
      ->add_option("--ungradable-rate", cfg.ungradable_rate,
                   "override every grader's ungradable rate")
      ->check(CLI::Range(0.0, 1.0));

  CLI::App* preprocess = app.add_subcommand(
      "preprocess", "normalize fundus image scale into a new directory");
  add_common_flags(preprocess, &cfg);
  preprocess->add_option("--in", cfg.in_dir, "input image directory")
      ->required();
  preprocess->add_option("--out", cfg.out_dir, "output image directory")
      ->required();
  preprocess
      ->add_option("--reject-log", cfg.reject_log,
                   "CSV listing images that failed detection")
      ->required();

  CLI::App* adjudicate = app.add_subcommand(
      "adjudicate", "resolve a grade log into reference standards");
  add_common_flags(adjudicate, &cfg);
  adjudicate->add_option("--grades", cfg.grades_path, "grade-log CSV")
      ->required();

  CLI::App* agreement = app.add_subcommand(
      "agreement", "per-question inter-grader reliability");
  add_common_flags(agreement, &cfg);
  agreement->add_option("--grades", cfg.grades_path, "grade-log CSV")
      ->required();

  CLI::App* metrics = app.add_subcommand(
      "metrics", "ROC, AUC confidence intervals, operating points");
  add_common_flags(metrics, &cfg);
  metrics->add_option("--scores", cfg.scores_path, "score CSV")->required();
  metrics->add_option("--references", cfg.refs_path, "reference CSV")
      ->required();

  CLI::App* compare = app.add_subcommand(
      "compare-graders", "grader sensitivity/specificity versus the model");
  add_common_flags(compare, &cfg);
  compare->add_option("--grades", cfg.grades_path, "grade-log CSV")
      ->required();
  compare->add_option("--scores", cfg.scores_path, "score CSV")->required();
  compare->add_option("--references", cfg.refs_path, "reference CSV")
      ->required();
  compare
      ->add_option("--mode", cfg.mode, "ungradable handling")
      ->check(CLI::IsMember(
          {"ungradable_as_refer", "exclude_ungradable_per_grader"}));

  CLI::App* features = app.add_subcommand(
      "feature-importance", "multivariable odds ratios for referable risk");
  add_common_flags(features, &cfg);
  features->add_option("--references", cfg.refs_path, "reference CSV")
      ->required();

  CLI::App* scores = app.add_subcommand(
      "scores", "patient-level scores from image scores and visits");
  add_common_flags(scores, &cfg);
  scores->add_option("--scores", cfg.scores_path, "score CSV")->required();
  scores->add_option("--patients", cfg.patients_path, "patient CSV")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    // Anything other than a clean --help/--version exit is a usage error.
    return code == 0 ? 0 : 1;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    gonstat::run_pipeline(cfg);
  } catch (const gonstat::DataError& e) {
    std::fprintf(stderr, "%s: data error: %s\n", cfg.subcommand.c_str(),
                 e.what());
    return 2;
  } catch (const gonstat::NumericError& e) {
    std::fprintf(stderr, "%s: numeric failure: %s\n", cfg.subcommand.c_str(),
                 e.what());
    return 3;
  }
  return 0;
}
