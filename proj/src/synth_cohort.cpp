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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gonstat/errors.hpp"
#include "gonstat/rng.hpp"
#include "gonstat/stats_core.hpp"

namespace gonstat {

namespace {

void check_rate(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw InvalidSpec(std::string(name) + " must lie in [0, 1], got " +
                      std::to_string(v));
  }
}

std::string image_name(long i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "img_%06ld", i);
  return buf;
}

// Latent per-image feature code given the binary positivity draw.
int latent_code(SplitMix64& rng, FeatureId f, bool positive) {
  switch (f) {
    case FeatureId::kRimIvsS:
    case FeatureId::kRimSvsT:
      return positive ? 3 : 1 + static_cast<int>(rng.next_below(2));
    case FeatureId::kNasalEmerging:
    case FeatureId::kNasalDirected:
      return positive ? 3 : 1 + static_cast<int>(rng.next_below(2));
    case FeatureId::kCircumlinear:
      return positive ? 4 : 1 + static_cast<int>(rng.next_below(3));
    case FeatureId::kVerticalCdr:
      return positive ? 7 + static_cast<int>(rng.next_below(3))
                      : 1 + static_cast<int>(rng.next_below(6));
    default:  // the yes/possible/no sign features
      return positive ? 2 + static_cast<int>(rng.next_below(2)) : 1;
  }
}

// Reported code: the latent one with probability fidelity, else uniform
// over the other codes of the scale.
int reported_code(SplitMix64& rng, FeatureId f, int latent, double fidelity) {
  if (rng.next_double() < fidelity) return latent;
  int count = level_count(f);
  int alt = 1 + static_cast<int>(rng.next_below(
                    static_cast<uint64_t>(count - 1)));
  if (alt >= latent) ++alt;
  return alt;
}

// Majority value among three codes, or fallback when all differ.
int majority3(int a, int b, int c, int fallback) {
  if (a == b || a == c) return a;
  if (b == c) return b;
  return fallback;
}

bool records_identical(const GradeRecord& a, const GradeRecord& b) {
  if (a.gon_gradability != b.gon_gradability || a.gon != b.gon) return false;
  return a.feature_gradability == b.feature_gradability &&
         a.feature == b.feature;
}

}  // namespace

void CohortSpec::validate() const {
  if (n_images <= 0) {
    throw InvalidSpec("cohort needs a positive image count, got " +
                      std::to_string(n_images));
  }
  check_rate(prevalence, "prevalence");
  if (graders.size() < 3) {
    throw InvalidSpec("cohort needs at least 3 grader profiles, got " +
                      std::to_string(graders.size()));
  }
  for (size_t i = 0; i < graders.size(); ++i) {
    const GraderProfile& g = graders[i];
    if (g.grader_id.empty()) {
      throw InvalidSpec("grader profile " + std::to_string(i) +
                        " has an empty id");
    }
    for (size_t j = i + 1; j < graders.size(); ++j) {
      if (graders[j].grader_id == g.grader_id) {
        throw InvalidSpec("duplicate grader id " + g.grader_id);
      }
    }
    check_rate(g.sens, "grader sens");
    check_rate(g.spec, "grader spec");
    check_rate(g.ungradable_rate, "grader ungradable rate");
  }
  for (const BetaParams& b : {refer_scores, nonrefer_scores}) {
    if (!std::isfinite(b.alpha) || !std::isfinite(b.beta) || b.alpha < 0.5 ||
        b.beta < 0.5) {
      throw InvalidSpec("Beta shape parameters must be >= 0.5");
    }
  }
  for (double r : feature_rate_refer) check_rate(r, "feature rate");
  for (double r : feature_rate_nonrefer) check_rate(r, "feature rate");
  check_rate(feature_fidelity, "feature fidelity");
  check_rate(revision_rate, "revision rate");
  if (images_per_patient < 1) {
    throw InvalidSpec("images_per_patient must be >= 1");
  }
}

double beta_auc(const BetaParams& nonrefer, const BetaParams& refer) {
  for (const BetaParams& b : {nonrefer, refer}) {
    if (!std::isfinite(b.alpha) || !std::isfinite(b.beta) || b.alpha < 0.5 ||
        b.beta < 0.5) {
      throw InvalidSpec("Beta shape parameters must be >= 0.5");
    }
  }
  // P(S+ > S-) = integral of F-(s) f+(s) ds on [0,1].  The substitution
  // s = sin^2 t removes the endpoint singularities that shapes in
  // [0.5, 1) would otherwise put at 0 and 1.
  const double log_beta = std::lgamma(refer.alpha) + std::lgamma(refer.beta) -
                          std::lgamma(refer.alpha + refer.beta);
  auto integrand = [&](double t) {
    double st = std::sin(t);
    double ct = std::cos(t);
    double s = st * st;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    double log_pdf = (refer.alpha - 1.0) * std::log(s) +
                     (refer.beta - 1.0) * std::log1p(-s) - log_beta;
    return betainc(nonrefer.alpha, nonrefer.beta, s) * std::exp(log_pdf) *
           2.0 * st * ct;
  };
  // Composite Simpson over [0, pi/2].
  const int n = 4096;
  const double h = (3.141592653589793 / 2.0) / n;
  double acc = integrand(0.0) + integrand(n * h);
  for (int i = 1; i < n; ++i) {
    acc += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

SyntheticCohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  SyntheticCohort out;
  out.analytic_auc = beta_auc(spec.nonrefer_scores, spec.refer_scores);
  out.truths.reserve(static_cast<size_t>(spec.n_images));
  out.scores.reserve(static_cast<size_t>(spec.n_images));

  std::vector<size_t> grader_order(spec.graders.size());
  for (size_t i = 0; i < grader_order.size(); ++i) grader_order[i] = i;

  PatientRecord patient;
  int patient_fill = 0;
  long patient_count = 0;
  const Date base_date = parse_date("2020-01-06");

  auto flush_patient = [&]() {
    if (!patient.visits.empty()) out.patients.push_back(patient);
    patient = PatientRecord{};
    patient_fill = 0;
  };

  for (long i = 0; i < spec.n_images; ++i) {
    const std::string id = image_name(i);

    // Latent truth.
    bool refer = rng.next_double() < spec.prevalence;
    double score = sample_beta(
        rng, refer ? spec.refer_scores.alpha : spec.nonrefer_scores.alpha,
        refer ? spec.refer_scores.beta : spec.nonrefer_scores.beta);
    out.truths.push_back({id, refer, score});

    ModelOutput m;
    m.image_id = id;
    m.model_id = "model_0";
    m.gon_probs = {(1.0 - score) * 0.75, (1.0 - score) * 0.25, score * 0.5,
                   score * 0.5};
    out.scores.push_back(std::move(m));

    // Latent feature codes.
    std::array<int, kNumFeatures> latent{};
    for (FeatureId f : kAllFeatures) {
      size_t fi = static_cast<size_t>(f);
      bool positive = rng.next_double() < (refer
                                               ? spec.feature_rate_refer[fi]
                                               : spec.feature_rate_nonrefer[fi]);
      latent[fi] = latent_code(rng, f, positive);
    }

    // Three graders per image: the full panel when it has exactly 3,
    // otherwise the first 3 of a seeded partial shuffle.
    if (spec.graders.size() > 3) {
      for (size_t k = 0; k < 3; ++k) {
        size_t j = k + static_cast<size_t>(
                           rng.next_below(grader_order.size() - k));
        std::swap(grader_order[k], grader_order[j]);
      }
    }

    // Round 1.
    std::vector<GradeRecord> round1;
    for (int k = 0; k < 3; ++k) {
      const GraderProfile& g = spec.graders[grader_order[
          static_cast<size_t>(k)]];
      GradeRecord r;
      r.image_id = id;
      r.grader_id = g.grader_id;
      r.role = g.role;
      r.round = 1;
      r.seq = k + 1;
      if (rng.next_double() < g.ungradable_rate) {
        r.gon_gradability = Gradability::kUngradable;
        r.feature_gradability.fill(Gradability::kUngradable);
      } else {
        bool correct = rng.next_double() < (refer ? g.sens : g.spec);
        bool graded_refer = refer == correct;
        r.gon = graded_refer
                    ? (rng.next_bool() ? GonRisk::kHighRisk : GonRisk::kLikely)
                    : (rng.next_bool() ? GonRisk::kNonGlaucomatous
                                       : GonRisk::kLowRisk);
        for (FeatureId f : kAllFeatures) {
          size_t fi = static_cast<size_t>(f);
          r.feature[fi] =
              reported_code(rng, f, latent[fi], spec.feature_fidelity);
        }
      }
      round1.push_back(r);
    }

    bool consensus = records_identical(round1[0], round1[1]) &&
                     records_identical(round1[0], round1[2]);

    // Round 2: without round-1 consensus every grader re-reviews,
    // drifting item-by-item toward the round-1 majority.
    std::vector<GradeRecord> round2;
    if (!consensus) {
      for (int k = 0; k < 3; ++k) {
        const GradeRecord& own = round1[static_cast<size_t>(k)];
        GradeRecord r = own;
        r.round = 2;
        r.seq = k + 1;

        // 0 encodes ungradable for the majority vote.
        auto gon_of = [&](int g) {
          const auto& rec = round1[static_cast<size_t>(g)];
          return rec.gon ? static_cast<int>(*rec.gon) : 0;
        };
        int own_gon = gon_of(k);
        int maj_gon = majority3(gon_of(0), gon_of(1), gon_of(2), own_gon);
        int new_gon =
            rng.next_double() < spec.revision_rate ? maj_gon : own_gon;
        if (new_gon == 0) {
          r.gon_gradability = Gradability::kUngradable;
          r.gon.reset();
        } else {
          r.gon_gradability = Gradability::kGradable;
          r.gon = static_cast<GonRisk>(new_gon);
        }

        for (FeatureId f : kAllFeatures) {
          size_t fi = static_cast<size_t>(f);
          auto code_of = [&](int g) {
            const auto& rec = round1[static_cast<size_t>(g)];
            return rec.feature[fi] ? *rec.feature[fi] : 0;
          };
          int own_code = code_of(k);
          int maj = majority3(code_of(0), code_of(1), code_of(2), own_code);
          int code =
              rng.next_double() < spec.revision_rate ? maj : own_code;
          if (code == 0) {
            r.feature_gradability[fi] = Gradability::kUngradable;
            r.feature[fi].reset();
          } else {
            r.feature_gradability[fi] = Gradability::kGradable;
            r.feature[fi] = code;
          }
        }
        round2.push_back(std::move(r));
      }
    }
    for (GradeRecord& r : round1) out.grade_log.push_back(std::move(r));
    for (GradeRecord& r : round2) out.grade_log.push_back(std::move(r));

    // Patient plumbing: deal images into patients, one visit each.
    if (patient.visits.empty()) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "pat_%06ld", patient_count++);
      patient.patient_id = buf;
    }
    Visit v;
    v.date = Date{base_date.days +
                  static_cast<long>(rng.next_below(3650))};
    v.eye = rng.next_bool() ? Eye::kOD : Eye::kOS;
    v.images = {id};
    patient.visits.push_back(std::move(v));
    if (rng.next_double() < 0.3) {
      CodeEvent e;
      e.kind = rng.next_double() < 0.25 ? CodeKind::kOnhReferral
                                        : CodeKind::kGlaucomaIcd;
      e.date = e.kind == CodeKind::kOnhReferral
                   ? patient.visits.back().date
                   : Date{patient.visits.back().date.days +
                          static_cast<long>(rng.next_below(300))};
      patient.code_events.push_back(e);
    }
    if (++patient_fill >= spec.images_per_patient) flush_patient();
  }
  flush_patient();
  return out;
}

}  // namespace gonstat
