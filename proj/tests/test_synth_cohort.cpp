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

#include "gonstat/synth_cohort.hpp"

#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "gonstat/adjudication.hpp"
#include "gonstat/errors.hpp"
#include "gonstat/rng.hpp"
#include "gonstat/score_pipeline.hpp"

using namespace gonstat;

namespace {

CohortSpec small_spec() {
  CohortSpec spec;
  spec.n_images = 60;
  spec.prevalence = 0.3;
  spec.graders = {{"g1", GraderRole::kGlaucomaSpecialist, 0.9, 0.9, 0.05},
                  {"g2", GraderRole::kOphthalmologist, 0.8, 0.85, 0.0},
                  {"g3", GraderRole::kOptometrist, 0.7, 0.8, 0.1}};
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_CASE("cohort spec validation") {
  CohortSpec spec = small_spec();
  CHECK_NOTHROW(spec.validate());

  CohortSpec bad = spec;
  bad.n_images = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.prevalence = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.graders.pop_back();
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.graders[2].grader_id = "g1";
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.graders[0].sens = -0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.refer_scores.alpha = 0.3;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.feature_fidelity = 1.2;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  bad = spec;
  bad.images_per_patient = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
}

TEST_CASE("prevalence boundaries pin the truths") {
  CohortSpec spec = small_spec();
  spec.prevalence = 0.0;
  for (const ImageTruth& t : generate_cohort(spec).truths) {
    CHECK_FALSE(t.refer);
  }
  spec.prevalence = 1.0;
  for (const ImageTruth& t : generate_cohort(spec).truths) {
    CHECK(t.refer);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  CohortSpec spec = small_spec();
  SyntheticCohort a = generate_cohort(spec);
  SyntheticCohort b = generate_cohort(spec);

  REQUIRE(a.grade_log.size() == b.grade_log.size());
  for (size_t i = 0; i < a.grade_log.size(); ++i) {
    CHECK(a.grade_log[i].image_id == b.grade_log[i].image_id);
    CHECK(a.grade_log[i].grader_id == b.grade_log[i].grader_id);
    CHECK(a.grade_log[i].round == b.grade_log[i].round);
    CHECK(a.grade_log[i].seq == b.grade_log[i].seq);
    CHECK(a.grade_log[i].gon == b.grade_log[i].gon);
    CHECK(a.grade_log[i].feature == b.grade_log[i].feature);
  }
  REQUIRE(a.truths.size() == b.truths.size());
  for (size_t i = 0; i < a.truths.size(); ++i) {
    CHECK(a.truths[i].refer == b.truths[i].refer);
    CHECK(a.truths[i].score == b.truths[i].score);
  }
  REQUIRE(a.scores.size() == b.scores.size());
  for (size_t i = 0; i < a.scores.size(); ++i) {
    CHECK(a.scores[i].gon_probs == b.scores[i].gon_probs);
  }
  CHECK(a.analytic_auc == b.analytic_auc);
  REQUIRE(a.patients.size() == b.patients.size());

  spec.seed = 12;
  SyntheticCohort c = generate_cohort(spec);
  bool any_differs = false;
  for (size_t i = 0; i < a.truths.size() && !any_differs; ++i) {
    any_differs = a.truths[i].score != c.truths[i].score;
  }
  CHECK(any_differs);
}

TEST_CASE("structural validity of the grade log") {
  CohortSpec spec = small_spec();
  spec.n_images = 120;
  SyntheticCohort cohort = generate_cohort(spec);

  for (const GradeRecord& r : cohort.grade_log) CHECK_NOTHROW(r.validate());

  std::map<std::string, std::vector<const GradeRecord*>> by_image;
  for (const GradeRecord& r : cohort.grade_log) {
    by_image[r.image_id].push_back(&r);
  }
  CHECK(by_image.size() == 120);
  for (const auto& [image, records] : by_image) {
    int n_round1 = 0;
    int n_round2 = 0;
    std::set<std::string> graders1;
    std::set<std::string> graders2;
    for (const GradeRecord* r : records) {
      if (r->round == 1) {
        ++n_round1;
        graders1.insert(r->grader_id);
      } else {
        ++n_round2;
        graders2.insert(r->grader_id);
      }
    }
    CHECK(n_round1 == 3);
    CHECK(graders1.size() == 3);
    // Round 2 is all-or-nothing: every grader re-reviews or none does.
    CHECK((n_round2 == 0 || n_round2 == 3));
    if (n_round2 == 3) CHECK(graders2 == graders1);
  }

  // The whole log replays through adjudication.
  std::vector<ReferenceStandard> refs = resolve_log(cohort.grade_log);
  CHECK(refs.size() == 120);
}

TEST_CASE("perfect graders reproduce the truth") {
  CohortSpec spec = small_spec();
  spec.n_images = 150;
  spec.prevalence = 0.4;
  for (GraderProfile& g : spec.graders) {
    g.sens = 1.0;
    g.spec = 1.0;
    g.ungradable_rate = 0.0;
  }
  SyntheticCohort cohort = generate_cohort(spec);
  std::map<std::string, bool> truth;
  for (const ImageTruth& t : cohort.truths) truth[t.image_id] = t.refer;

  for (const GradeRecord& r : cohort.grade_log) {
    REQUIRE(r.gon.has_value());
    CHECK(binarize_gon(*r.gon) == truth.at(r.image_id));
  }

  // And so does the adjudicated reference.
  for (const ReferenceStandard& ref : resolve_log(cohort.grade_log)) {
    REQUIRE(ref.labels.refer.has_value());
    CHECK(*ref.labels.refer == truth.at(ref.image_id));
  }
}

TEST_CASE("model outputs carry the latent score") {
  SyntheticCohort cohort = generate_cohort(small_spec());
  REQUIRE(cohort.scores.size() == cohort.truths.size());
  for (size_t i = 0; i < cohort.scores.size(); ++i) {
    CHECK_NOTHROW(cohort.scores[i].validate());
    CHECK(cohort.scores[i].image_id == cohort.truths[i].image_id);
    CHECK(referable_score(cohort.scores[i]) == cohort.truths[i].score);
  }
}

TEST_CASE("empirical grader profiles converge to the spec") {
  CohortSpec spec;
  spec.n_images = 4000;
  spec.prevalence = 0.5;
  spec.graders = {{"g1", GraderRole::kOphthalmologist, 0.75, 0.85, 0.0},
                  {"g2", GraderRole::kOphthalmologist, 0.60, 0.95, 0.2},
                  {"g3", GraderRole::kOphthalmologist, 0.90, 0.70, 0.0}};
  spec.seed = 404;
  SyntheticCohort cohort = generate_cohort(spec);
  std::map<std::string, bool> truth;
  for (const ImageTruth& t : cohort.truths) truth[t.image_id] = t.refer;

  for (const GraderProfile& g : spec.graders) {
    long sens_k = 0;
    long sens_n = 0;
    long spec_k = 0;
    long spec_n = 0;
    long miss_k = 0;
    long all_n = 0;
    for (const GradeRecord& r : cohort.grade_log) {
      if (r.round != 1 || r.grader_id != g.grader_id) continue;
      ++all_n;
      if (!r.gon.has_value()) {
        ++miss_k;
        continue;
      }
      if (truth.at(r.image_id)) {
        ++sens_n;
        if (binarize_gon(*r.gon)) ++sens_k;
      } else {
        ++spec_n;
        if (!binarize_gon(*r.gon)) ++spec_k;
      }
    }
    double sens_hat = static_cast<double>(sens_k) / sens_n;
    double sens_se = std::sqrt(g.sens * (1.0 - g.sens) / sens_n);
    CHECK(std::fabs(sens_hat - g.sens) <= 3.0 * sens_se);

    double spec_hat = static_cast<double>(spec_k) / spec_n;
    double spec_se = std::sqrt(g.spec * (1.0 - g.spec) / spec_n);
    CHECK(std::fabs(spec_hat - g.spec) <= 3.0 * spec_se);

    double miss_hat = static_cast<double>(miss_k) / all_n;
    double miss_se = std::sqrt(
        std::max(g.ungradable_rate * (1.0 - g.ungradable_rate), 0.25 / all_n) /
        all_n);
    CHECK(std::fabs(miss_hat - g.ungradable_rate) <= 3.0 * miss_se);
  }
}

TEST_CASE("panels larger than three rotate through the graders") {
  CohortSpec spec = small_spec();
  spec.n_images = 200;
  spec.graders.push_back({"g4", GraderRole::kOphthalmologist, 0.8, 0.8, 0.0});
  spec.graders.push_back({"g5", GraderRole::kOptometrist, 0.7, 0.75, 0.0});
  SyntheticCohort cohort = generate_cohort(spec);

  std::map<std::string, std::set<std::string>> round1;
  std::set<std::string> seen;
  for (const GradeRecord& r : cohort.grade_log) {
    if (r.round != 1) continue;
    round1[r.image_id].insert(r.grader_id);
    seen.insert(r.grader_id);
  }
  for (const auto& [image, graders] : round1) CHECK(graders.size() == 3);
  CHECK(seen.size() == 5);
}

TEST_CASE("patient grouping covers every image exactly once") {
  CohortSpec spec = small_spec();
  spec.n_images = 101;
  spec.images_per_patient = 3;
  SyntheticCohort cohort = generate_cohort(spec);

  std::set<std::string> ids;
  std::multiset<std::string> images;
  for (const PatientRecord& p : cohort.patients) {
    CHECK(ids.insert(p.patient_id).second);
    CHECK(p.visits.size() <= 3);
    CHECK_FALSE(p.visits.empty());
    for (const Visit& v : p.visits) {
      for (const std::string& img : v.images) images.insert(img);
    }
    CHECK_NOTHROW(select_visit(p));
    CHECK_NOTHROW(restrict_to_one_eye(p, 9));
  }
  CHECK(images.size() == 101);
  std::set<std::string> unique_images(images.begin(), images.end());
  CHECK(unique_images.size() == 101);
}

TEST_CASE("analytic AUC of Beta score models") {
  SUBCASE("identical distributions are chance level") {
    CHECK(beta_auc({3.0, 5.0}, {3.0, 5.0}) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(beta_auc({1.0, 1.0}, {1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("uniform vs Beta(2,1) has a closed form") {
    // P(X > Y), X ~ Beta(2,1), Y uniform: integral of 2 s^2 = 2/3.
    CHECK(beta_auc({1.0, 1.0}, {2.0, 1.0}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  }
  SUBCASE("swapping the classes mirrors the value") {
    double forward = beta_auc({2.0, 8.0}, {8.0, 2.0});
    double backward = beta_auc({8.0, 2.0}, {2.0, 8.0});
    CHECK(forward + backward == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(forward > 0.95);
  }
  SUBCASE("matches a large Monte Carlo sample") {
    double analytic = beta_auc({2.0, 8.0}, {8.0, 2.0});
    SplitMix64 rng(77u);
    long wins = 0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
      double pos = sample_beta(rng, 8.0, 2.0);
      double neg = sample_beta(rng, 2.0, 8.0);
      if (pos > neg) ++wins;
    }
    double empirical = static_cast<double>(wins) / n;
    CHECK(std::fabs(empirical - analytic) < 0.005);
  }
  SUBCASE("shape parameters below one half are rejected") {
    CHECK_THROWS_AS(beta_auc({0.3, 1.0}, {1.0, 1.0}), InvalidSpec);
  }
}

TEST_CASE("empirical cohort AUC brackets the analytic value") {
  CohortSpec spec = small_spec();
  spec.n_images = 2000;
  spec.prevalence = 0.5;
  spec.seed = 31;
  SyntheticCohort cohort = generate_cohort(spec);

  // Direct pairwise AUC of the latent scores.
  long wins = 0;
  long ties = 0;
  long pairs = 0;
  for (const ImageTruth& pos : cohort.truths) {
    if (!pos.refer) continue;
    for (const ImageTruth& neg : cohort.truths) {
      if (neg.refer) continue;
      ++pairs;
      if (pos.score > neg.score) ++wins;
      else if (pos.score == neg.score) ++ties;
    }
  }
  double empirical = (wins + 0.5 * ties) / pairs;
  CHECK(std::fabs(empirical - cohort.analytic_auc) < 0.02);
}
