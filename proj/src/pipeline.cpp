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

#include "gonstat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "gonstat/adjudication.hpp"
#include "gonstat/agreement.hpp"
#include "gonstat/csv.hpp"
#include "gonstat/errors.hpp"
#include "gonstat/feature_importance.hpp"
#include "gonstat/fundus_preproc.hpp"
#include "gonstat/io_schemas.hpp"
#include "gonstat/raster.hpp"
#include "gonstat/report.hpp"
#include "gonstat/roc_metrics.hpp"
#include "gonstat/score_pipeline.hpp"
#include "gonstat/synth_cohort.hpp"
#include "gonstat/version.hpp"
#include "json.hpp"

namespace gonstat {

namespace {

namespace fs = std::filesystem;

const std::set<std::string>& subcommands() {
  static const std::set<std::string> kSet = {
      "simulate",        "preprocess",         "adjudicate",
      "agreement",       "metrics",            "compare-graders",
      "feature-importance", "scores"};
  return kSet;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + cfg.out_dir + ": " +
                  ec.message());
  }
}

void require_path(const std::string& path, const std::string& flag) {
  if (path.empty()) {
    throw InvalidSpec("missing required input: " + flag);
  }
}

// Shared config block for every JSON report: the version, the seed,
// every knob, and every fixed analysis decision in effect.
nlohmann::ordered_json meta_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["command"] = cfg.subcommand;
  j["seed"] = cfg.seed;
  nlohmann::ordered_json config;
  config["bootstrap_n"] = cfg.bootstrap_n;
  config["ci_level"] = cfg.ci_level;
  config["sens_target"] = cfg.sens_target;
  config["spec_target"] = cfg.spec_target;
  if (!cfg.mode.empty()) config["mode"] = cfg.mode;
  nlohmann::ordered_json flags;
  flags["threshold_rule"] = "score_ge_threshold";
  flags["score_rule"] = "referable_mass";
  flags["ensemble"] = "mean_per_image";
  flags["bootstrap_method"] = "percentile";
  flags["degenerate_resamples"] = "redraw";
  flags["operating_point_source"] = "evaluation_set";
  flags["mcnemar"] = "exact";
  flags["alpha_metric"] = "linear";
  flags["roc_origin_threshold"] = "inf";
  config["decision_flags"] = std::move(flags);
  j["config"] = std::move(config);
  return j;
}

// Scores files may carry several model rows per image; collapse each
// image's rows to their ensemble mean, keeping first-appearance order.
std::vector<ModelOutput> ensemble_by_image(
    const std::vector<ModelOutput>& outputs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<ModelOutput>> by_image;
  for (const ModelOutput& m : outputs) {
    auto [it, fresh] = by_image.try_emplace(m.image_id);
    if (fresh) order.push_back(m.image_id);
    it->second.push_back(m);
  }
  std::vector<ModelOutput> out;
  out.reserve(order.size());
  for (const std::string& id : order) {
    const std::vector<ModelOutput>& group = by_image[id];
    out.push_back(group.size() == 1 ? group[0] : ensemble_average(group));
  }
  return out;
}

struct JoinedCases {
  std::vector<ScoredCase> cases;
  long n_scored = 0;
  long n_refs = 0;
  long n_unlabeled = 0;  // reference rows whose risk was unresolvable
};

JoinedCases join_cases(const std::vector<ModelOutput>& per_image,
                       const std::vector<ReferenceRow>& refs) {
  std::map<std::string, bool> label;
  long unlabeled = 0;
  for (const ReferenceRow& r : refs) {
    if (r.refer.has_value()) label[r.image_id] = *r.refer;
    else ++unlabeled;
  }
  JoinedCases out;
  out.n_scored = static_cast<long>(per_image.size());
  out.n_refs = static_cast<long>(refs.size());
  out.n_unlabeled = unlabeled;
  for (const ModelOutput& m : per_image) {
    auto it = label.find(m.image_id);
    if (it == label.end()) continue;
    out.cases.push_back({m.image_id, referable_score(m), it->second});
  }
  return out;
}

nlohmann::ordered_json operating_point_json(const OperatingPoint& op,
                                            const std::vector<ScoredCase>& cases,
                                            double level) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(operating_kind_token(op.kind));
  j["achieved"] = op.achieved;
  if (op.achieved) {
    j["threshold"] = op.threshold;
    j["tuning_sens"] = op.tuning_sens;
    j["tuning_spec"] = op.tuning_spec;
    SensSpec observed = sens_spec_at(cases, op.threshold, level);
    j["observed_sens"] = binomial_json(observed.sens);
    j["observed_spec"] = binomial_json(observed.spec);
  } else {
    j["threshold"] = nullptr;
    j["tuning_sens"] = nullptr;
    j["tuning_spec"] = nullptr;
  }
  return j;
}

void run_simulate(const RunConfig& cfg) {
  CohortSpec spec;
  spec.n_images = cfg.n_images;
  spec.prevalence = cfg.prevalence;
  spec.graders = {
      {"grader_1", GraderRole::kGlaucomaSpecialist, 0.85, 0.90, 0.02},
      {"grader_2", GraderRole::kOphthalmologist, 0.80, 0.85, 0.03},
      {"grader_3", GraderRole::kOptometrist, 0.70, 0.80, 0.05},
  };
  spec.seed = cfg.seed;
  for (GraderProfile& g : spec.graders) {
    if (cfg.grader_sens >= 0.0) g.sens = cfg.grader_sens;
    if (cfg.grader_spec >= 0.0) g.spec = cfg.grader_spec;
    if (cfg.ungradable_rate >= 0.0) g.ungradable_rate = cfg.ungradable_rate;
  }
  SyntheticCohort cohort = generate_cohort(spec);
  write_grade_log(out_path(cfg, "grades.csv"), cohort.grade_log);
  write_scores(out_path(cfg, "scores.csv"), cohort.scores);
  write_patients(out_path(cfg, "patients.csv"), cohort.patients);
  write_truth(out_path(cfg, "truth.json"),
              {cohort.analytic_auc, cohort.truths});
  std::printf("simulate: %ld images, %zu grade records, %zu patients\n",
              cfg.n_images, cohort.grade_log.size(), cohort.patients.size());
}

void run_preprocess(const RunConfig& cfg) {
  std::error_code ec;
  if (!fs::is_directory(cfg.in_dir, ec)) {
    throw IoError("input directory not found: " + cfg.in_dir);
  }
  std::vector<std::string> names;
  for (const fs::directory_entry& e : fs::directory_iterator(cfg.in_dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    if (ext == ".png" || ext == ".ppm") {
      names.push_back(e.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());

  std::vector<std::vector<std::string>> rejects;
  long normalized = 0;
  for (const std::string& name : names) {
    std::string in_file = (fs::path(cfg.in_dir) / name).string();
    try {
      RasterImage img = read_raster(in_file);
      FundusMask mask = detect_mask(img);
      RasterImage out = normalize_scale(img, mask);
      write_raster((fs::path(cfg.out_dir) / name).string(), out);
      ++normalized;
    } catch (const MaskNotFound& e) {
      rejects.push_back({name, e.what()});
    } catch (const DataError& e) {
      rejects.push_back({name, e.what()});
    }
  }
  write_csv(cfg.reject_log, {"file", "reason"}, rejects);
  std::printf("preprocess: %ld normalized, %zu rejected\n", normalized,
              rejects.size());
}

void run_adjudicate(const RunConfig& cfg) {
  std::vector<GradeRecord> records = read_grade_log(cfg.grades_path);
  std::vector<ReferenceStandard> refs = resolve_log(records);
  write_references(out_path(cfg, "references.csv"), refs);
  long excluded = 0;
  for (const ReferenceStandard& r : refs) excluded += r.excluded ? 1 : 0;
  std::printf("adjudicate: %zu images resolved, %ld excluded\n", refs.size(),
              excluded);
}

void run_agreement(const RunConfig& cfg) {
  std::vector<GradeRecord> records = read_grade_log(cfg.grades_path);
  std::vector<QuestionAlpha> alphas = per_question_alpha(records);
  write_alpha_table(out_path(cfg, "alpha.csv"), alphas);
  std::printf("agreement: %zu questions\n", alphas.size());
}

void run_metrics(const RunConfig& cfg) {
  std::vector<ModelOutput> per_image =
      ensemble_by_image(read_scores(cfg.scores_path));
  std::vector<ReferenceRow> refs = read_references(cfg.refs_path);
  JoinedCases joined = join_cases(per_image, refs);
  if (joined.cases.empty()) {
    throw EmptySample("no scored image matches a labeled reference");
  }

  RocCurve curve = roc(joined.cases);
  BootstrapOptions opts;
  opts.n_resamples = cfg.bootstrap_n;
  opts.level = cfg.ci_level;
  opts.seed = cfg.seed;
  BootstrapResult auc = auc_with_ci(joined.cases, opts);
  std::vector<OperatingPoint> ops =
      select_operating_points(joined.cases, cfg.sens_target, cfg.spec_target);

  std::vector<double> pos;
  std::vector<double> neg;
  for (const ScoredCase& c : joined.cases) {
    (c.label ? pos : neg).push_back(c.score);
  }
  KsResult ks = ks_two_sample(pos, neg);

  write_roc_csv(out_path(cfg, "roc.csv"), curve);
  write_roc_svg(out_path(cfg, "roc.svg"), curve, {});

  nlohmann::ordered_json j = meta_json(cfg);
  j["inputs"] = {{"scores", cfg.scores_path}, {"references", cfg.refs_path}};
  nlohmann::ordered_json counts;
  counts["scored_images"] = joined.n_scored;
  counts["reference_images"] = joined.n_refs;
  counts["unlabeled_references"] = joined.n_unlabeled;
  counts["joined"] = static_cast<long>(joined.cases.size());
  counts["positives"] = static_cast<long>(pos.size());
  counts["negatives"] = static_cast<long>(neg.size());
  j["n"] = std::move(counts);
  j["auc"] = bootstrap_json(auc);
  nlohmann::ordered_json op_list = nlohmann::ordered_json::array();
  for (const OperatingPoint& op : ops) {
    op_list.push_back(operating_point_json(op, joined.cases, cfg.ci_level));
  }
  j["operating_points"] = std::move(op_list);
  nlohmann::ordered_json sep;
  sep["ks_d"] = ks.d;
  sep["ks_p"] = ks.p;
  sep["n_refer"] = ks.n_x;
  sep["n_no_refer"] = ks.n_y;
  j["score_separation"] = std::move(sep);
  j["outputs"] = {{"roc_csv", "roc.csv"}, {"roc_svg", "roc.svg"}};
  write_text_atomic(out_path(cfg, "metrics.json"), j.dump(2) + "\n");
  std::printf("metrics: auc %.6f [%0.6f, %0.6f] over %zu cases\n", auc.point,
              auc.lower, auc.upper, joined.cases.size());
}

ComparisonMode parse_mode_flag(const std::string& mode) {
  if (mode.empty() || mode == "ungradable_as_refer") {
    return ComparisonMode::kUngradableAsRefer;
  }
  if (mode == "exclude_ungradable_per_grader") {
    return ComparisonMode::kExcludeUngradablePerGrader;
  }
  throw InvalidSpec("unknown comparison mode '" + mode + "'");
}

void run_compare_graders(const RunConfig& cfg) {
  ComparisonMode mode = parse_mode_flag(cfg.mode);
  std::vector<GradeRecord> records = read_grade_log(cfg.grades_path);
  std::vector<ModelOutput> per_image =
      ensemble_by_image(read_scores(cfg.scores_path));
  std::vector<ReferenceRow> refs = read_references(cfg.refs_path);
  JoinedCases joined = join_cases(per_image, refs);
  if (joined.cases.empty()) {
    throw EmptySample("no scored image matches a labeled reference");
  }

  std::vector<OperatingPoint> ops =
      select_operating_points(joined.cases, cfg.sens_target, cfg.spec_target);
  double threshold = 0.0;
  for (const OperatingPoint& op : ops) {
    if (op.kind == OperatingKind::kBalanced) threshold = op.threshold;
  }

  // First-round assessments per grader and image.
  std::map<std::string, std::map<std::string, GraderAssessment>> by_grader;
  for (const GradeRecord& r : records) {
    if (r.round != 1) continue;
    GraderAssessment a;
    a.gradable = r.gon_gradability == Gradability::kGradable;
    if (r.gon.has_value()) a.refer = binarize_gon(*r.gon);
    by_grader[r.grader_id][r.image_id] = a;
  }

  // Each grader is compared on the cases they actually reviewed, so a
  // rotating panel never counts an unseen image as ungradable.
  std::vector<GraderComparison> table;
  std::vector<GraderDot> dots;
  for (const auto& [grader_id, assessments] : by_grader) {
    std::vector<ScoredCase> subset;
    std::vector<GraderAssessment> aligned;
    for (const ScoredCase& c : joined.cases) {
      auto it = assessments.find(c.image_id);
      if (it == assessments.end()) continue;
      subset.push_back(c);
      aligned.push_back(it->second);
    }
    if (subset.empty()) continue;
    std::map<std::string, std::vector<GraderAssessment>> one;
    one[grader_id] = std::move(aligned);
    std::vector<GraderComparison> rows =
        compare_graders(subset, one, threshold, mode, cfg.ci_level);
    for (GraderComparison& row : rows) {
      dots.push_back({row.grader_id, row.sens.point, row.spec.point});
      table.push_back(std::move(row));
    }
  }

  write_grader_table(out_path(cfg, "graders.csv"), table);
  write_roc_svg(out_path(cfg, "graders.svg"), roc(joined.cases), dots);
  std::printf("compare-graders: %zu graders at threshold %.6f\n",
              table.size(), threshold);
}

void run_feature_importance(const RunConfig& cfg) {
  std::vector<ReferenceRow> rows = read_references(cfg.refs_path);
  std::vector<ReferenceStandard> refs;
  refs.reserve(rows.size());
  for (const ReferenceRow& r : rows) refs.push_back(to_reference_standard(r));
  DesignMatrix d = build_design(refs);
  RegressionReport report = fit_logistic(d);
  write_odds_ratio_table(out_path(cfg, "odds_ratios.csv"), report,
                         cfg.ci_level);
  std::printf(
      "feature-importance: %ld cases (%ld dropped), %s in %d iterations\n",
      report.n_used, report.n_dropped,
      report.converged ? "converged" : "not converged", report.n_iter);
}

void run_scores(const RunConfig& cfg) {
  std::vector<ModelOutput> per_image =
      ensemble_by_image(read_scores(cfg.scores_path));
  std::map<std::string, double> score_of;
  for (const ModelOutput& m : per_image) {
    score_of[m.image_id] = referable_score(m);
  }
  std::vector<PatientRecord> patients = read_patients(cfg.patients_path);

  std::vector<std::vector<std::string>> rows;
  long skipped = 0;
  for (const PatientRecord& p : patients) {
    PatientRecord one_eye = restrict_to_one_eye(p, cfg.seed);
    const Visit& visit = select_visit(one_eye);
    std::vector<ImageScore> scored;
    for (const std::string& img : visit.images) {
      auto it = score_of.find(img);
      if (it != score_of.end()) scored.push_back({img, it->second});
    }
    if (scored.empty()) {
      ++skipped;
      continue;
    }
    ImageScore best = patient_level_score(scored);
    rows.push_back({p.patient_id, date_token(visit.date),
                    std::string(eye_token(visit.eye)), best.image_id,
                    format_full(best.score)});
  }
  write_csv(out_path(cfg, "patient_scores.csv"),
            {"patient_id", "visit_date", "eye", "image_id", "score"}, rows);
  std::printf("scores: %zu patients scored, %ld without scored images\n",
              rows.size(), skipped);
}

}  // namespace

void RunConfig::validate() const {
  if (subcommands().count(subcommand) == 0) {
    throw InvalidSpec("unknown subcommand '" + subcommand + "'");
  }
  if (bootstrap_n < 1) throw InvalidSpec("bootstrap_n must be >= 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw InvalidSpec("ci_level must be inside (0, 1)");
  }
  if (!(sens_target >= 0.0 && sens_target <= 1.0)) {
    throw InvalidSpec("sens_target must be in [0, 1]");
  }
  if (!(spec_target >= 0.0 && spec_target <= 1.0)) {
    throw InvalidSpec("spec_target must be in [0, 1]");
  }
  if (n_images < 1) throw InvalidSpec("n_images must be >= 1");
  if (!(prevalence >= 0.0 && prevalence <= 1.0)) {
    throw InvalidSpec("prevalence must be in [0, 1]");
  }
  for (double rate : {grader_sens, grader_spec, ungradable_rate}) {
    if (rate > 1.0) {
      throw InvalidSpec("grader rate overrides must be in [0, 1]");
    }
  }
  if (out_dir.empty()) throw InvalidSpec("output directory must be set");

  if (subcommand == "preprocess") {
    require_path(in_dir, "--in");
    require_path(reject_log, "--reject-log");
  }
  if (subcommand == "adjudicate" || subcommand == "agreement" ||
      subcommand == "compare-graders") {
    require_path(grades_path, "--grades");
  }
  if (subcommand == "metrics" || subcommand == "compare-graders" ||
      subcommand == "scores") {
    require_path(scores_path, "--scores");
  }
  if (subcommand == "metrics" || subcommand == "compare-graders" ||
      subcommand == "feature-importance") {
    require_path(refs_path, "--references");
  }
  if (subcommand == "scores") {
    require_path(patients_path, "--patients");
  }
  if (!mode.empty() && subcommand == "compare-graders") {
    parse_mode_flag(mode);
  }
}

void run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  ensure_out_dir(cfg);
  if (cfg.subcommand == "simulate") run_simulate(cfg);
  else if (cfg.subcommand == "preprocess") run_preprocess(cfg);
  else if (cfg.subcommand == "adjudicate") run_adjudicate(cfg);
  else if (cfg.subcommand == "agreement") run_agreement(cfg);
  else if (cfg.subcommand == "metrics") run_metrics(cfg);
  else if (cfg.subcommand == "compare-graders") run_compare_graders(cfg);
  else if (cfg.subcommand == "feature-importance") run_feature_importance(cfg);
  else if (cfg.subcommand == "scores") run_scores(cfg);
}

}  // namespace gonstat
