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

#include "gonstat/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "gonstat/csv.hpp"
#include "gonstat/errors.hpp"

namespace gonstat {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParamOutOfRange("normal quantile needs p in (0,1)");
  }
  // Bisection against the forward CDF: 120 halvings of [-40, 40] land
  // well below double resolution around any attainable quantile.
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 120; ++i) {
    double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

nlohmann::ordered_json binomial_json(const BinomialCI& ci) {
  nlohmann::ordered_json j;
  j["k"] = ci.k;
  j["n"] = ci.n;
  j["level"] = ci.level;
  j["point"] = ci.point;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  return j;
}

nlohmann::ordered_json bootstrap_json(const BootstrapResult& r) {
  nlohmann::ordered_json j;
  j["point"] = r.point;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["n_resamples"] = r.n_resamples;
  j["seed"] = r.seed;
  j["n_redraws"] = r.n_redraws;
  return j;
}

void write_grader_table(const std::string& path,
                        const std::vector<GraderComparison>& comparisons) {
  std::vector<std::string> header = {
      "grader_id", "mode",       "n",          "sens",   "sens_lower",
      "sens_upper", "spec",      "spec_lower", "spec_upper",
      "p_sens",     "p_spec"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(comparisons.size());
  for (const GraderComparison& c : comparisons) {
    rows.push_back({c.grader_id, std::string(comparison_mode_token(c.mode)),
                    std::to_string(c.n), format_sig6(c.sens.point),
                    format_sig6(c.sens.lower), format_sig6(c.sens.upper),
                    format_sig6(c.spec.point), format_sig6(c.spec.lower),
                    format_sig6(c.spec.upper), format_sig6(c.p_sens),
                    format_sig6(c.p_spec)});
  }
  write_csv(path, header, rows);
}

void write_odds_ratio_table(const std::string& path,
                            const RegressionReport& report, double level) {
  double z = normal_quantile(0.5 + level / 2.0);
  std::vector<std::string> header = {"predictor", "beta", "se",
                                     "odds_ratio", "or_lower", "or_upper",
                                     "p", "rank", "quasi_separated"};
  std::vector<std::vector<std::string>> rows;
  auto push = [&](const PredictorStats& s) {
    rows.push_back({s.name, format_sig6(s.beta), format_sig6(s.se),
                    format_sig6(s.odds_ratio),
                    format_sig6(std::exp(s.beta - z * s.se)),
                    format_sig6(std::exp(s.beta + z * s.se)),
                    format_sig6(s.p),
                    s.rank > 0 ? std::to_string(s.rank) : "",
                    s.quasi_separated ? "1" : "0"});
  };
  for (const PredictorStats& s : report.predictors) push(s);
  push(report.intercept);
  write_csv(path, header, rows);
}

void write_alpha_table(const std::string& path,
                       const std::vector<QuestionAlpha>& alphas) {
  std::vector<std::string> header = {"question",
                                     "round",
                                     "alpha",
                                     "observed_disagreement",
                                     "expected_disagreement",
                                     "n_items",
                                     "n_values"};
  std::vector<std::vector<std::string>> rows;
  auto push = [&](const std::string& q, int round, const AlphaResult& a) {
    rows.push_back({q, std::to_string(round), format_sig6(a.alpha),
                    format_sig6(a.observed_disagreement),
                    format_sig6(a.expected_disagreement),
                    std::to_string(a.n_items_used),
                    std::to_string(a.n_values)});
  };
  for (const QuestionAlpha& qa : alphas) {
    if (qa.round1.has_value()) push(qa.question, 1, *qa.round1);
    if (qa.round2.has_value()) push(qa.question, 2, *qa.round2);
  }
  write_csv(path, header, rows);
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
  std::vector<std::string> header = {"threshold", "fpr", "tpr"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(curve.points.size());
  for (const RocPoint& p : curve.points) {
    rows.push_back(
        {format_sig6(p.threshold), format_sig6(p.fpr), format_sig6(p.tpr)});
  }
  write_csv(path, header, rows);
}

namespace {

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_roc_svg(const std::string& path, const RocCurve& curve,
                   const std::vector<GraderDot>& dots) {
  const double size = 520.0;
  const double margin = 60.0;
  const double span = size - 2.0 * margin;
  auto px = [&](double fpr) { return margin + fpr * span; };
  auto py = [&](double tpr) { return size - margin - tpr * span; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" "
         "height=\"520\" viewBox=\"0 0 520 520\">\n";
  svg << "  <rect width=\"520\" height=\"520\" fill=\"white\"/>\n";
  // Grid and axes.
  for (int i = 0; i <= 5; ++i) {
    double t = i / 5.0;
    svg << "  <line x1=\"" << coord(px(t)) << "\" y1=\"" << coord(py(0))
        << "\" x2=\"" << coord(px(t)) << "\" y2=\"" << coord(py(1))
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "  <line x1=\"" << coord(px(0)) << "\" y1=\"" << coord(py(t))
        << "\" x2=\"" << coord(px(1)) << "\" y2=\"" << coord(py(t))
        << "\" stroke=\"#dddddd\"/>\n";
    char label[16];
    std::snprintf(label, sizeof label, "%.1f", t);
    svg << "  <text x=\"" << coord(px(t)) << "\" y=\"" << coord(py(0) + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << label
        << "</text>\n";
    svg << "  <text x=\"" << coord(px(0) - 10) << "\" y=\""
        << coord(py(t) + 4) << "\" font-size=\"12\" text-anchor=\"end\">"
        << label << "</text>\n";
  }
  svg << "  <line x1=\"" << coord(px(0)) << "\" y1=\"" << coord(py(0))
      << "\" x2=\"" << coord(px(1)) << "\" y2=\"" << coord(py(1))
      << "\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n";
  // ROC polyline.
  svg << "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" "
         "points=\"";
  for (size_t i = 0; i < curve.points.size(); ++i) {
    if (i) svg << ' ';
    svg << coord(px(curve.points[i].fpr)) << ','
        << coord(py(curve.points[i].tpr));
  }
  svg << "\"/>\n";
  // Grader dots at (1 - spec, sens).
  for (const GraderDot& d : dots) {
    svg << "  <circle cx=\"" << coord(px(1.0 - d.spec)) << "\" cy=\""
        << coord(py(d.sens)) << "\" r=\"4\" fill=\"#c03a2b\"/>\n";
    svg << "  <text x=\"" << coord(px(1.0 - d.spec) + 7) << "\" y=\""
        << coord(py(d.sens) + 4) << "\" font-size=\"11\">" << d.grader_id
        << "</text>\n";
  }
  char auc_label[64];
  std::snprintf(auc_label, sizeof auc_label, "AUC = %.3f", curve.auc);
  svg << "  <text x=\"" << coord(px(0.55)) << "\" y=\"" << coord(py(0.08))
      << "\" font-size=\"14\">" << auc_label << "</text>\n";
  svg << "  <text x=\"" << coord(size / 2.0) << "\" y=\""
      << coord(size - 15.0)
      << "\" font-size=\"13\" text-anchor=\"middle\">false positive "
         "rate</text>\n";
  svg << "  <text x=\"18\" y=\"" << coord(size / 2.0)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "18 "
      << coord(size / 2.0) << ")\">true positive rate</text>\n";
  svg << "</svg>\n";
  write_text_atomic(path, svg.str());
}

}  // namespace gonstat
