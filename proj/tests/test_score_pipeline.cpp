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

#include "gonstat/score_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "gonstat/errors.hpp"
#include "gonstat/rng.hpp"

using namespace gonstat;

namespace {

ModelOutput output_for(const std::string& image, const std::string& model,
                       std::array<double, 4> gon) {
  ModelOutput m;
  m.image_id = image;
  m.model_id = model;
  m.gon_probs = gon;
  return m;
}

// A random stochastic vector built from dyadic fractions (multiples of
// 1/1024) so small ensembles average without rounding.
template <size_t N>
std::array<double, N> dyadic_simplex(SplitMix64& rng) {
  std::array<uint64_t, N> cut{};
  uint64_t total = 1024;
  uint64_t used = 0;
  for (size_t i = 0; i + 1 < N; ++i) {
    cut[i] = rng.next_below(total - used + 1);
    used += cut[i];
  }
  cut[N - 1] = total - used;
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) {
    out[i] = static_cast<double>(cut[i]) / 1024.0;
  }
  return out;
}

}  // namespace

TEST_CASE("date parsing and formatting round-trip") {
  CHECK(parse_date("1970-01-01").days == 0);
  CHECK(parse_date("1970-01-02").days == 1);
  CHECK(parse_date("1969-12-31").days == -1);
  CHECK(parse_date("2020-02-29").days - parse_date("2020-02-28").days == 1);
  CHECK(parse_date("2021-03-01").days - parse_date("2021-02-28").days == 1);
  for (const char* token :
       {"2020-01-01", "1999-12-31", "2024-02-29", "2026-08-16"}) {
    CHECK(date_token(parse_date(token)) == token);
  }
  CHECK(date_token(Date{parse_date("2020-12-31").days + 1}) == "2021-01-01");

  CHECK_THROWS_AS(parse_date("2020-13-01"), SchemaError);
  CHECK_THROWS_AS(parse_date("2021-02-29"), SchemaError);
  CHECK_THROWS_AS(parse_date("2020-00-10"), SchemaError);
  CHECK_THROWS_AS(parse_date("2020-1-01"), SchemaError);
  CHECK_THROWS_AS(parse_date("20-01-0100"), SchemaError);
  CHECK_THROWS_AS(parse_date("2020/01/01"), SchemaError);
  CHECK_THROWS_AS(parse_date(""), SchemaError);
}

TEST_CASE("model output validation") {
  ModelOutput good = output_for("i1", "m1", {0.5, 0.25, 0.125, 0.125});
  CHECK_NOTHROW(good.validate());

  ModelOutput off = good;
  off.gon_probs = {0.5, 0.25, 0.125, 0.125 + 3e-6};
  CHECK_THROWS_AS(off.validate(), InvariantViolation);
  try {
    off.validate();
  } catch (const InvariantViolation& e) {
    std::string what = e.what();
    CHECK(what.find("i1") != std::string::npos);
    CHECK(what.find("gon") != std::string::npos);
  }

  ModelOutput neg = good;
  neg.gon_probs = {-0.1, 0.5, 0.3, 0.3};
  CHECK_THROWS_AS(neg.validate(), ParamOutOfRange);

  ModelOutput wide = good;
  wide.feature_probs[static_cast<size_t>(FeatureId::kNotch)] = {0.5, 0.5};
  CHECK_THROWS_AS(wide.validate(), ShapeMismatch);
  wide.feature_probs[static_cast<size_t>(FeatureId::kNotch)] = {0.5, 0.25,
                                                                0.25};
  CHECK_NOTHROW(wide.validate());

  ModelOutput drift = good;
  drift.feature_probs[static_cast<size_t>(FeatureId::kBetaPpa)] = {0.5, 0.25,
                                                                   0.2501};
  CHECK_THROWS_AS(drift.validate(), InvariantViolation);
}

TEST_CASE("ensemble averaging") {
  SUBCASE("mean of identical outputs is the output") {
    std::vector<ModelOutput> outs(
        10, output_for("i1", "m", {0.5, 0.25, 0.125, 0.125}));
    for (int i = 0; i < 10; ++i) outs[static_cast<size_t>(i)].model_id =
        "m" + std::to_string(i);
    ModelOutput mean = ensemble_average(outs);
    CHECK(mean.gon_probs == outs[0].gon_probs);
    CHECK(mean.image_id == "i1");
    CHECK(mean.model_id == "ensemble");
  }
  SUBCASE("two-model mean is elementwise") {
    std::vector<ModelOutput> outs = {
        output_for("i1", "a", {0.6, 0.2, 0.1, 0.1}),
        output_for("i1", "b", {0.2, 0.2, 0.3, 0.3})};
    ModelOutput mean = ensemble_average(outs);
    CHECK(mean.gon_probs == std::array<double, 4>{0.4, 0.2, 0.2, 0.2});
  }
  SUBCASE("mean of random stochastic vectors sums to one") {
    SplitMix64 rng(21u);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ModelOutput> outs;
      for (int k = 0; k < 10; ++k) {
        ModelOutput m = output_for("img", "m" + std::to_string(k), {});
        for (size_t i = 0; i < 4; ++i) m.gon_probs[i] = rng.next_double();
        double s =
            m.gon_probs[0] + m.gon_probs[1] + m.gon_probs[2] + m.gon_probs[3];
        for (size_t i = 0; i < 4; ++i) m.gon_probs[i] /= s;
        outs.push_back(m);
      }
      ModelOutput mean = ensemble_average(outs);
      double s =
          mean.gon_probs[0] + mean.gon_probs[1] + mean.gon_probs[2] +
          mean.gon_probs[3];
      CHECK(std::fabs(s - 1.0) < 1e-9);
    }
  }
  SUBCASE("permutation of inputs changes nothing, bit for bit") {
    SplitMix64 rng(22u);
    std::vector<ModelOutput> outs;
    for (int k = 0; k < 7; ++k) {
      ModelOutput m =
          output_for("img", "m" + std::to_string(k), dyadic_simplex<4>(rng));
      m.feature_probs[static_cast<size_t>(FeatureId::kNotch)] = {0.25, 0.25,
                                                                 0.5};
      outs.push_back(m);
    }
    ModelOutput base = ensemble_average(outs);
    std::reverse(outs.begin(), outs.end());
    ModelOutput flipped = ensemble_average(outs);
    CHECK(base.gon_probs == flipped.gon_probs);
    CHECK(base.feature_probs == flipped.feature_probs);
  }
  SUBCASE("feature heads average too") {
    ModelOutput a = output_for("i", "a", {0.25, 0.25, 0.25, 0.25});
    ModelOutput b = output_for("i", "b", {0.25, 0.25, 0.25, 0.25});
    a.feature_probs[static_cast<size_t>(FeatureId::kDiscHeme)] = {1.0, 0.0,
                                                                  0.0};
    b.feature_probs[static_cast<size_t>(FeatureId::kDiscHeme)] = {0.0, 0.5,
                                                                  0.5};
    ModelOutput mean = ensemble_average({a, b});
    CHECK(mean.feature_probs[static_cast<size_t>(FeatureId::kDiscHeme)] ==
          std::vector<double>{0.5, 0.25, 0.25});
  }
  SUBCASE("input inconsistencies are rejected") {
    CHECK_THROWS_AS(ensemble_average({}), EmptySample);
    std::vector<ModelOutput> mixed = {
        output_for("i1", "a", {1.0, 0.0, 0.0, 0.0}),
        output_for("i2", "b", {1.0, 0.0, 0.0, 0.0})};
    CHECK_THROWS_AS(ensemble_average(mixed), ShapeMismatch);
    std::vector<ModelOutput> heads = {
        output_for("i1", "a", {1.0, 0.0, 0.0, 0.0}),
        output_for("i1", "b", {1.0, 0.0, 0.0, 0.0})};
    heads[0].feature_probs[static_cast<size_t>(FeatureId::kNotch)] = {
        1.0, 0.0, 0.0};
    CHECK_THROWS_AS(ensemble_average(heads), ShapeMismatch);
  }
}

TEST_CASE("referable score") {
  CHECK(referable_score(output_for("i", "m", {1, 0, 0, 0})) == 0.0);
  CHECK(referable_score(output_for("i", "m", {0, 0, 0, 1})) == 1.0);
  CHECK(referable_score(output_for("i", "m", {0.5, 0.2, 0.2, 0.1})) ==
        0.2 + 0.1);
  CHECK(referable_score(output_for("i", "m", {0.25, 0.25, 0.25, 0.25})) ==
        0.5);

  SUBCASE("argmax rule") {
    CHECK(referable_score(output_for("i", "m", {0.1, 0.2, 0.4, 0.3}),
                          ScoreRule::kArgmaxReferable) == 1.0);
    CHECK(referable_score(output_for("i", "m", {0.6, 0.2, 0.1, 0.1}),
                          ScoreRule::kArgmaxReferable) == 0.0);
    // Tie resolves to the lowest class, here non-referable.
    CHECK(referable_score(output_for("i", "m", {0.4, 0.0, 0.4, 0.2}),
                          ScoreRule::kArgmaxReferable) == 0.0);
    CHECK(referable_score(output_for("i", "m", {0.1, 0.1, 0.4, 0.4}),
                          ScoreRule::kArgmaxReferable) == 1.0);
  }
}

TEST_CASE("score of an ensemble is the mean of scores") {
  SplitMix64 rng(33u);
  for (int trial = 0; trial < 30; ++trial) {
    // Dyadic probabilities and a power-of-two count make the identity
    // exact in floating point.
    std::vector<ModelOutput> outs;
    double score_sum = 0.0;
    for (int k = 0; k < 8; ++k) {
      ModelOutput m =
          output_for("img", "m" + std::to_string(k), dyadic_simplex<4>(rng));
      outs.push_back(m);
      score_sum += referable_score(m);
    }
    CHECK(referable_score(ensemble_average(outs)) == score_sum / 8.0);
  }
}

TEST_CASE("feature positive mass follows the binary partition") {
  ModelOutput m = output_for("i", "m", {0.25, 0.25, 0.25, 0.25});
  CHECK_FALSE(feature_positive_mass(m, FeatureId::kNotch).has_value());

  // Notch: positive when possible or yes.
  m.feature_probs[static_cast<size_t>(FeatureId::kNotch)] = {0.2, 0.3, 0.5};
  CHECK(*feature_positive_mass(m, FeatureId::kNotch) == 0.3 + 0.5);
  // Nasal emerging: positive only on yes.
  m.feature_probs[static_cast<size_t>(FeatureId::kNasalEmerging)] = {
      0.2, 0.3, 0.5};
  CHECK(*feature_positive_mass(m, FeatureId::kNasalEmerging) == 0.5);
  // Vertical CDR: tenths of 0.7 and up.
  m.feature_probs[static_cast<size_t>(FeatureId::kVerticalCdr)] = {
      0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.1};
  CHECK(*feature_positive_mass(m, FeatureId::kVerticalCdr) ==
        0.1 + 0.2 + 0.1);
  // Circumlinear vessel: positive only when present and bared.
  m.feature_probs[static_cast<size_t>(FeatureId::kCircumlinear)] = {
      0.25, 0.25, 0.25, 0.25};
  CHECK(*feature_positive_mass(m, FeatureId::kCircumlinear) == 0.25);
}

TEST_CASE("token round-trips for eyes and code kinds") {
  for (Eye e : {Eye::kOD, Eye::kOS, Eye::kUnknown}) {
    auto parsed = parse_eye(eye_token(e));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == e);
  }
  for (CodeKind k : {CodeKind::kGlaucomaIcd, CodeKind::kOnhReferral}) {
    auto parsed = parse_code_kind(code_kind_token(k));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == k);
  }
  CHECK_FALSE(parse_eye("left").has_value());
  CHECK_FALSE(parse_code_kind("icd").has_value());
}

namespace {

Visit visit_on(const std::string& token, Eye eye = Eye::kOD) {
  Visit v;
  v.date = parse_date(token);
  v.eye = eye;
  v.images = {"img_" + token};
  return v;
}

}  // namespace

TEST_CASE("analysis visit selection") {
  SUBCASE("single visit") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2020-05-01")};
    CHECK(select_visit(p).date == parse_date("2020-05-01"));
  }
  SUBCASE("visit nearest the ICD code wins") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2020-03-31"), visit_on("2020-10-27")};
    p.code_events = {{parse_date("2020-04-10"), CodeKind::kGlaucomaIcd}};
    CHECK(select_visit(p).date == parse_date("2020-03-31"));
  }
  SUBCASE("ONH referral outranks ICD proximity") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2020-01-01"), visit_on("2020-06-01"),
                visit_on("2020-12-01")};
    p.code_events = {{parse_date("2020-01-02"), CodeKind::kGlaucomaIcd},
                     {parse_date("2020-06-01"), CodeKind::kOnhReferral}};
    CHECK(select_visit(p).date == parse_date("2020-06-01"));
  }
  SUBCASE("visits more than a year before the code are out of window") {
    PatientRecord p;
    p.patient_id = "p1";
    // 2019-04-01 is 375 days before the code: excluded even though it is
    // the nearest visit by raw distance.
    p.visits = {visit_on("2019-04-01"), visit_on("2021-06-01")};
    p.code_events = {{parse_date("2020-04-10"), CodeKind::kGlaucomaIcd}};
    CHECK(select_visit(p).date == parse_date("2021-06-01"));
  }
  SUBCASE("no visit in the window falls back to the earliest visit") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2015-06-01"), visit_on("2014-02-01")};
    p.code_events = {{parse_date("2020-04-10"), CodeKind::kGlaucomaIcd}};
    CHECK(select_visit(p).date == parse_date("2014-02-01"));
  }
  SUBCASE("equidistant visits resolve to the earlier one") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2020-04-20"), visit_on("2020-04-10")};
    p.code_events = {{parse_date("2020-04-15"), CodeKind::kGlaucomaIcd}};
    CHECK(select_visit(p).date == parse_date("2020-04-10"));
  }
  SUBCASE("a referral event with no matching visit falls through") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2020-03-31"), visit_on("2020-10-27")};
    p.code_events = {{parse_date("2020-07-01"), CodeKind::kOnhReferral},
                     {parse_date("2020-04-10"), CodeKind::kGlaucomaIcd}};
    CHECK(select_visit(p).date == parse_date("2020-03-31"));
  }
  SUBCASE("no events picks the earliest visit") {
    PatientRecord p;
    p.patient_id = "p1";
    p.visits = {visit_on("2020-05-01"), visit_on("2019-05-01"),
                visit_on("2021-05-01")};
    CHECK(select_visit(p).date == parse_date("2019-05-01"));
  }
  SUBCASE("no visits at all") {
    PatientRecord p;
    p.patient_id = "p1";
    CHECK_THROWS_AS(select_visit(p), NoVisits);
  }
}

TEST_CASE("one eye per patient") {
  PatientRecord p;
  p.patient_id = "p42";
  p.visits = {visit_on("2020-01-01", Eye::kOD),
              visit_on("2020-02-01", Eye::kOS),
              visit_on("2020-03-01", Eye::kOD)};

  PatientRecord kept = restrict_to_one_eye(p, 7);
  std::set<Eye> eyes;
  for (const Visit& v : kept.visits) eyes.insert(v.eye);
  CHECK(eyes.size() == 1);
  CHECK_FALSE(kept.visits.empty());

  // Deterministic for a fixed seed and patient.
  PatientRecord again = restrict_to_one_eye(p, 7);
  CHECK(again.visits.size() == kept.visits.size());
  CHECK(again.visits[0].date == kept.visits[0].date);

  // Single-eye patients pass through untouched.
  PatientRecord one;
  one.patient_id = "p9";
  one.visits = {visit_on("2020-01-01", Eye::kOS),
                visit_on("2020-04-01", Eye::kOS)};
  CHECK(restrict_to_one_eye(one, 7).visits.size() == 2);

  // Some seed flips the choice, so the coin is real.
  bool flipped = false;
  for (uint64_t seed = 0; seed < 64 && !flipped; ++seed) {
    PatientRecord alt = restrict_to_one_eye(p, seed);
    flipped = alt.visits[0].eye != kept.visits[0].eye;
  }
  CHECK(flipped);
}

TEST_CASE("patient-level score takes the highest-scored image") {
  CHECK(patient_level_score({{"a", 0.2}, {"b", 0.7}}).image_id == "b");
  CHECK(patient_level_score({{"only", 0.4}}).image_id == "only");

  // Ties go to the smaller image id.
  ImageScore tie = patient_level_score({{"zeta", 0.5}, {"alpha", 0.5}});
  CHECK(tie.image_id == "alpha");

  SplitMix64 rng(5u);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ImageScore> scores;
    int n = 1 + static_cast<int>(rng.next_below(8));
    for (int i = 0; i < n; ++i) {
      scores.push_back({"i" + std::to_string(i), rng.next_double()});
    }
    ImageScore best = patient_level_score(scores);
    for (const ImageScore& s : scores) CHECK(best.score >= s.score);
  }

  CHECK_THROWS_AS(patient_level_score({}), NoImages);
  CHECK_THROWS_AS(patient_level_score({{"a", 1.5}}), ParamOutOfRange);
  CHECK_THROWS_AS(patient_level_score({{"a", std::nan("")}}),
                  ParamOutOfRange);
}
