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

#include "gonstat/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gonstat/errors.hpp"

namespace gonstat {

namespace {

double delta(double a, double b, AlphaMetric metric) {
  switch (metric) {
    case AlphaMetric::kLinear:
      return std::fabs(a - b);
    case AlphaMetric::kSquared:
      return (a - b) * (a - b);
    case AlphaMetric::kNominal:
      return a == b ? 0.0 : 1.0;
  }
  return 0.0;
}

}  // namespace

std::string_view alpha_metric_token(AlphaMetric m) {
  switch (m) {
    case AlphaMetric::kLinear:
      return "linear";
    case AlphaMetric::kSquared:
      return "squared";
    case AlphaMetric::kNominal:
      return "nominal";
  }
  return "linear";
}

std::optional<AlphaMetric> parse_alpha_metric(std::string_view token) {
  if (token == "linear") return AlphaMetric::kLinear;
  if (token == "squared") return AlphaMetric::kSquared;
  if (token == "nominal") return AlphaMetric::kNominal;
  return std::nullopt;
}

AlphaResult krippendorff_alpha(const ReliabilityMatrix& m, AlphaMetric metric) {
  // Distinct value universe over pairable items.
  std::set<double> universe;
  long n_items_used = 0;
  long n = 0;
  for (const auto& row : m.cells) {
    int present = 0;
    for (const auto& cell : row) present += cell.has_value() ? 1 : 0;
    if (present < 2) continue;
    ++n_items_used;
    n += present;
    for (const auto& cell : row) {
      if (cell) universe.insert(*cell);
    }
  }
  if (n_items_used == 0) {
    throw DegenerateData("alpha: no item carries two or more grades");
  }
  std::vector<double> values(universe.begin(), universe.end());
  std::map<double, size_t> index;
  for (size_t i = 0; i < values.size(); ++i) index[values[i]] = i;
  size_t v = values.size();

  // Coincidence matrix: each ordered within-item pair contributes
  // 1/(m_u - 1), so every item carries total weight m_u.
  std::vector<std::vector<double>> o(v, std::vector<double>(v, 0.0));
  for (const auto& row : m.cells) {
    std::vector<double> present;
    for (const auto& cell : row) {
      if (cell) present.push_back(*cell);
    }
    if (present.size() < 2) continue;
    std::vector<size_t> codes;
    for (double p : present) codes.push_back(index.at(p));
    double w = 1.0 / static_cast<double>(codes.size() - 1);
    for (size_t i = 0; i < codes.size(); ++i) {
      for (size_t j = 0; j < codes.size(); ++j) {
        if (i != j) o[codes[i]][codes[j]] += w;
      }
    }
  }

  std::vector<double> marg(v, 0.0);
  for (size_t c = 0; c < v; ++c) {
    for (size_t k = 0; k < v; ++k) marg[c] += o[c][k];
  }

  double d_obs = 0.0;
  double d_exp = 0.0;
  for (size_t c = 0; c < v; ++c) {
    for (size_t k = 0; k < v; ++k) {
      double d = delta(values[c], values[k], metric);
      d_obs += o[c][k] * d;
      d_exp += marg[c] * marg[k] * d;
    }
  }
  double nn = static_cast<double>(n);
  d_obs /= nn;
  d_exp /= nn * (nn - 1.0);

  AlphaResult result;
  result.n_items_used = n_items_used;
  result.n_values = n;
  result.observed_disagreement = d_obs;
  result.expected_disagreement = d_exp;
  if (d_exp == 0.0) {
    throw DegenerateData("alpha: expected disagreement is zero");
  }
  result.alpha = 1.0 - d_obs / d_exp;
  return result;
}

namespace {

constexpr int kNumQuestions = kNumFeatures + 2;  // gon, gon gradability, features

std::string question_name(int q) {
  if (q == 0) return "gon";
  if (q == 1) return "gon_gradability";
  return std::string(feature_token(static_cast<FeatureId>(q - 2)));
}

std::optional<double> question_value(const GradeRecord& r, int q) {
  if (q == 0) {
    if (!r.gon) return std::nullopt;
    return static_cast<double>(static_cast<int>(*r.gon));
  }
  if (q == 1) {
    return r.gon_gradability == Gradability::kGradable ? 1.0 : 0.0;
  }
  const auto& code = r.feature[static_cast<size_t>(q - 2)];
  if (!code) return std::nullopt;
  return static_cast<double>(*code);
}

}  // namespace

std::vector<QuestionAlpha> per_question_alpha(
    const std::vector<GradeRecord>& records, AlphaMetric metric,
    Round2Scope scope) {
  // Stable item and grader axes shared by every question.
  std::map<std::string, std::map<std::string, const GradeRecord*>> round1;
  std::map<std::string, std::map<std::string, const GradeRecord*>> round2;
  std::set<std::string> graders;
  for (const GradeRecord& r : records) {
    r.validate();
    graders.insert(r.grader_id);
    auto& slot = (r.round == 1 ? round1 : round2)[r.image_id][r.grader_id];
    // Within a round keep the latest review by seq.
    if (slot == nullptr || slot->seq < r.seq) slot = &r;
  }

  std::vector<std::string> grader_order(graders.begin(), graders.end());
  std::vector<QuestionAlpha> out;
  for (int q = 0; q < kNumQuestions; ++q) {
    QuestionAlpha qa;
    qa.question = question_name(q);

    ReliabilityMatrix m1;
    for (const auto& [image, per_grader] : round1) {
      std::vector<std::optional<double>> row;
      for (const auto& grader : grader_order) {
        auto it = per_grader.find(grader);
        row.push_back(it == per_grader.end()
                          ? std::nullopt
                          : question_value(*it->second, q));
      }
      m1.cells.push_back(std::move(row));
    }
    try {
      qa.round1 = krippendorff_alpha(m1, metric);
    } catch (const DegenerateData&) {
      qa.round1 = std::nullopt;
    }

    // Round 2: latest grade per grader, or strictly round-2 records.
    bool any_round2 = !round2.empty();
    if (any_round2) {
      ReliabilityMatrix m2;
      for (const auto& [image, per_grader_r1] : round1) {
        auto r2_it = round2.find(image);
        std::vector<std::optional<double>> row;
        for (const auto& grader : grader_order) {
          const GradeRecord* rec = nullptr;
          if (r2_it != round2.end()) {
            auto it = r2_it->second.find(grader);
            if (it != r2_it->second.end()) rec = it->second;
          }
          if (rec == nullptr && scope == Round2Scope::kLatest) {
            auto it = per_grader_r1.find(grader);
            if (it != per_grader_r1.end()) rec = it->second;
          }
          row.push_back(rec ? question_value(*rec, q) : std::nullopt);
        }
        m2.cells.push_back(std::move(row));
      }
      try {
        qa.round2 = krippendorff_alpha(m2, metric);
      } catch (const DegenerateData&) {
        qa.round2 = std::nullopt;
      }
    }
    out.push_back(std::move(qa));
  }
  return out;
}

}  // namespace gonstat
