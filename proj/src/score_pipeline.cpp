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
#include <cstdio>
#include <numeric>
#include <set>

#include "gonstat/errors.hpp"
#include "gonstat/rng.hpp"

namespace gonstat {

namespace {

constexpr double kSumTolerance = 1e-6;
constexpr long kIcdWindowDays = 365;

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return !s.empty();
}

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30,
                                  31, 31, 30, 31, 30, 31};
  if (m == 2) {
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[m - 1];
}

long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const long doe = static_cast<long>(yoe) * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const long doe = z - era * 146097;
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yoe + era * 400 + (m <= 2 ? 1 : 0));
}

}  // namespace

Date parse_date(std::string_view token) {
  if (token.size() != 10 || token[4] != '-' || token[7] != '-' ||
      !all_digits(token.substr(0, 4)) || !all_digits(token.substr(5, 2)) ||
      !all_digits(token.substr(8, 2))) {
    throw SchemaError("date must be YYYY-MM-DD, got '" + std::string(token) +
                      "'");
  }
  int y = std::stoi(std::string(token.substr(0, 4)));
  int m = std::stoi(std::string(token.substr(5, 2)));
  int d = std::stoi(std::string(token.substr(8, 2)));
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
    throw SchemaError("date out of range: '" + std::string(token) + "'");
  }
  return Date{days_from_civil(y, m, d)};
}

std::string date_token(Date date) {
  int y = 0;
  int m = 0;
  int d = 0;
  civil_from_days(date.days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

void ModelOutput::validate() const {
  auto check_head = [&](const double* p, size_t len,
                        const std::string& head) {
    double sum = 0.0;
    for (size_t i = 0; i < len; ++i) {
      if (!std::isfinite(p[i]) || p[i] < 0.0 || p[i] > 1.0) {
        throw ParamOutOfRange("probability outside [0, 1] in head " + head +
                              " of image " + image_id + " (model " +
                              model_id + ")");
      }
      sum += p[i];
    }
    if (std::fabs(sum - 1.0) > kSumTolerance) {
      throw InvariantViolation("head " + head + " of image " + image_id +
                               " (model " + model_id + ") sums to " +
                               std::to_string(sum) + ", expected 1");
    }
  };
  check_head(gon_probs.data(), gon_probs.size(), "gon");
  for (FeatureId f : kAllFeatures) {
    const auto& head = feature_probs[static_cast<size_t>(f)];
    if (head.empty()) continue;
    if (head.size() != static_cast<size_t>(level_count(f))) {
      throw ShapeMismatch("head " + std::string(feature_token(f)) +
                          " of image " + image_id + " holds " +
                          std::to_string(head.size()) + " classes, scale has " +
                          std::to_string(level_count(f)));
    }
    check_head(head.data(), head.size(), std::string(feature_token(f)));
  }
}

ModelOutput ensemble_average(const std::vector<ModelOutput>& outputs) {
  if (outputs.empty()) {
    throw EmptySample("ensemble of zero outputs");
  }
  for (const ModelOutput& m : outputs) {
    m.validate();
    if (m.image_id != outputs.front().image_id) {
      throw ShapeMismatch("ensemble mixes images " +
                          outputs.front().image_id + " and " + m.image_id);
    }
    for (FeatureId f : kAllFeatures) {
      size_t fi = static_cast<size_t>(f);
      if (m.feature_probs[fi].size() !=
          outputs.front().feature_probs[fi].size()) {
        throw ShapeMismatch("ensemble head shapes disagree on " +
                            std::string(feature_token(f)) + " for image " +
                            m.image_id);
      }
    }
  }

  // Canonical summation order: sort by model id, then by content, so
  // any permutation of the inputs sums identically.
  std::vector<const ModelOutput*> order;
  order.reserve(outputs.size());
  for (const ModelOutput& m : outputs) order.push_back(&m);
  std::sort(order.begin(), order.end(),
            [](const ModelOutput* a, const ModelOutput* b) {
              if (a->model_id != b->model_id) {
                return a->model_id < b->model_id;
              }
              if (a->gon_probs != b->gon_probs) {
                return a->gon_probs < b->gon_probs;
              }
              return a->feature_probs < b->feature_probs;
            });

  ModelOutput mean;
  mean.image_id = outputs.front().image_id;
  mean.model_id = "ensemble";
  double n = static_cast<double>(outputs.size());
  for (const ModelOutput* m : order) {
    for (size_t i = 0; i < 4; ++i) mean.gon_probs[i] += m->gon_probs[i];
  }
  for (size_t i = 0; i < 4; ++i) mean.gon_probs[i] /= n;
  for (FeatureId f : kAllFeatures) {
    size_t fi = static_cast<size_t>(f);
    size_t len = outputs.front().feature_probs[fi].size();
    if (len == 0) continue;
    mean.feature_probs[fi].assign(len, 0.0);
    for (const ModelOutput* m : order) {
      for (size_t i = 0; i < len; ++i) {
        mean.feature_probs[fi][i] += m->feature_probs[fi][i];
      }
    }
    for (size_t i = 0; i < len; ++i) mean.feature_probs[fi][i] /= n;
  }
  return mean;
}

double referable_score(const ModelOutput& m, ScoreRule rule) {
  if (rule == ScoreRule::kArgmaxReferable) {
    size_t best = 0;
    for (size_t i = 1; i < 4; ++i) {
      if (m.gon_probs[i] > m.gon_probs[best]) best = i;
    }
    return best >= 2 ? 1.0 : 0.0;
  }
  return m.gon_probs[2] + m.gon_probs[3];
}

std::optional<double> feature_positive_mass(const ModelOutput& m,
                                            FeatureId feature) {
  const auto& head = m.feature_probs[static_cast<size_t>(feature)];
  if (head.empty()) return std::nullopt;
  double mass = 0.0;
  for (size_t i = 0; i < head.size(); ++i) {
    if (binarize_feature(feature, static_cast<int>(i) + 1)) mass += head[i];
  }
  return mass;
}

std::string_view eye_token(Eye eye) {
  switch (eye) {
    case Eye::kOD:
      return "od";
    case Eye::kOS:
      return "os";
    case Eye::kUnknown:
      return "unknown";
  }
  return "unknown";
}

std::optional<Eye> parse_eye(std::string_view token) {
  if (token == "od") return Eye::kOD;
  if (token == "os") return Eye::kOS;
  if (token == "unknown") return Eye::kUnknown;
  return std::nullopt;
}

std::string_view code_kind_token(CodeKind kind) {
  switch (kind) {
    case CodeKind::kGlaucomaIcd:
      return "glaucoma_icd";
    case CodeKind::kOnhReferral:
      return "onh_referral";
  }
  return "glaucoma_icd";
}

std::optional<CodeKind> parse_code_kind(std::string_view token) {
  if (token == "glaucoma_icd") return CodeKind::kGlaucomaIcd;
  if (token == "onh_referral") return CodeKind::kOnhReferral;
  return std::nullopt;
}

const Visit& select_visit(const PatientRecord& p) {
  if (p.visits.empty()) {
    throw NoVisits("patient " + p.patient_id + " has no visits");
  }

  std::vector<const CodeEvent*> events;
  for (const CodeEvent& e : p.code_events) events.push_back(&e);
  std::stable_sort(events.begin(), events.end(),
                   [](const CodeEvent* a, const CodeEvent* b) {
                     return a->date < b->date;
                   });

  // An ONH-referral visit is used directly.
  for (const CodeEvent* e : events) {
    if (e->kind != CodeKind::kOnhReferral) continue;
    for (const Visit& v : p.visits) {
      if (v.date == e->date) return v;
    }
  }

  // Otherwise the visit nearest the first ICD code, no more than one
  // year older than the code; equidistant pairs take the earlier visit.
  for (const CodeEvent* e : events) {
    if (e->kind != CodeKind::kGlaucomaIcd) continue;
    const Visit* best = nullptr;
    for (const Visit& v : p.visits) {
      if (v.date.days < e->date.days - kIcdWindowDays) continue;
      if (best == nullptr) {
        best = &v;
        continue;
      }
      long dist = std::labs(v.date.days - e->date.days);
      long best_dist = std::labs(best->date.days - e->date.days);
      if (dist < best_dist ||
          (dist == best_dist && v.date.days < best->date.days)) {
        best = &v;
      }
    }
    if (best != nullptr) return *best;
    break;  // a later ICD code never outranks the first
  }

  const Visit* earliest = &p.visits.front();
  for (const Visit& v : p.visits) {
    if (v.date.days < earliest->date.days) earliest = &v;
  }
  return *earliest;
}

PatientRecord restrict_to_one_eye(const PatientRecord& p, uint64_t seed) {
  std::set<Eye> eyes;
  for (const Visit& v : p.visits) eyes.insert(v.eye);
  if (eyes.size() <= 1) return p;

  // Seeded coin keyed to the patient id: stable across runs and input
  // order.
  uint64_t key = seed;
  for (unsigned char c : p.patient_id) {
    key = SplitMix64::mix(key ^ c);
  }
  std::vector<Eye> choices(eyes.begin(), eyes.end());
  SplitMix64 rng(key);
  Eye keep = choices[static_cast<size_t>(
      rng.next_below(static_cast<uint64_t>(choices.size())))];

  PatientRecord out;
  out.patient_id = p.patient_id;
  out.code_events = p.code_events;
  for (const Visit& v : p.visits) {
    if (v.eye == keep) out.visits.push_back(v);
  }
  return out;
}

ImageScore patient_level_score(const std::vector<ImageScore>& scores) {
  if (scores.empty()) {
    throw NoImages("patient-level aggregation over zero images");
  }
  const ImageScore* best = nullptr;
  for (const ImageScore& s : scores) {
    if (!std::isfinite(s.score) || s.score < 0.0 || s.score > 1.0) {
      throw ParamOutOfRange("score outside [0, 1] for image " + s.image_id);
    }
    if (best == nullptr || s.score > best->score ||
        (s.score == best->score && s.image_id < best->image_id)) {
      best = &s;
    }
  }
  return *best;
}

}  // namespace gonstat
