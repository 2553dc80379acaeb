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

#include "gonstat/io_schemas.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "gonstat/csv.hpp"
#include "gonstat/errors.hpp"
#include "json.hpp"

namespace gonstat {

namespace {

void check_header(const std::vector<CsvRow>& rows,
                  const std::vector<std::string>& expected,
                  const std::string& path) {
  if (rows.empty()) throw SchemaError("missing header row in " + path, 1);
  if (rows[0].fields != expected) {
    std::string want;
    for (size_t i = 0; i < expected.size(); ++i) {
      if (i) want += ",";
      want += expected[i];
    }
    throw SchemaError("header mismatch in " + path + "; expected: " + want, 1);
  }
}

void check_width(const CsvRow& row, size_t expected) {
  if (row.fields.size() != expected) {
    throw SchemaError("expected " + std::to_string(expected) +
                          " fields, got " + std::to_string(row.fields.size()),
                      row.line);
  }
}

std::string bool_cell(const std::optional<bool>& b) {
  if (!b.has_value()) return "";
  return *b ? "1" : "0";
}

std::optional<bool> parse_bool_cell(const std::string& cell, long line) {
  if (cell.empty()) return std::nullopt;
  if (cell == "1") return true;
  if (cell == "0") return false;
  throw SchemaError("binary cell must be 1, 0 or empty, got '" + cell + "'",
                    line);
}

}  // namespace

std::vector<std::string> grade_log_header() {
  std::vector<std::string> h = {"image_id", "grader_id", "grader_role",
                                "round",    "seq",       "gon",
                                "gon_gradable"};
  for (FeatureId f : kAllFeatures) {
    h.emplace_back(feature_token(f));
    h.emplace_back(std::string(feature_token(f)) + "_gradable");
  }
  return h;
}

void write_grade_log(const std::string& path,
                     const std::vector<GradeRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const GradeRecord& r : records) {
    r.validate();
    std::vector<std::string> row = {
        r.image_id,
        r.grader_id,
        std::string(role_token(r.role)),
        std::to_string(r.round),
        std::to_string(r.seq),
        r.gon.has_value() ? std::string(gon_token(*r.gon)) : "",
        std::string(gradability_token(r.gon_gradability)),
    };
    for (size_t i = 0; i < kNumFeatures; ++i) {
      FeatureId f = kAllFeatures[i];
      row.push_back(r.feature[i].has_value()
                        ? std::string(level_token(f, *r.feature[i]))
                        : "");
      row.emplace_back(gradability_token(r.feature_gradability[i]));
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, grade_log_header(), rows);
}

std::vector<GradeRecord> read_grade_log(const std::string& path) {
  std::vector<CsvRow> rows = read_csv(path);
  std::vector<std::string> header = grade_log_header();
  check_header(rows, header, path);
  std::vector<GradeRecord> records;
  records.reserve(rows.size() > 0 ? rows.size() - 1 : 0);
  for (size_t ri = 1; ri < rows.size(); ++ri) {
    const CsvRow& row = rows[ri];
    check_width(row, header.size());
    GradeRecord r;
    r.image_id = row.fields[0];
    r.grader_id = row.fields[1];
    if (r.image_id.empty()) throw SchemaError("empty image_id", row.line);
    if (r.grader_id.empty()) throw SchemaError("empty grader_id", row.line);
    r.role = parse_role(row.fields[2]);
    r.round = static_cast<int>(parse_long_cell(row.fields[3], row.line));
    r.seq = static_cast<int>(parse_long_cell(row.fields[4], row.line));
    if (!row.fields[5].empty()) {
      std::optional<GonRisk> g = parse_gon(row.fields[5]);
      if (!g.has_value()) {
        throw SchemaError("unknown risk grade '" + row.fields[5] + "'",
                          row.line);
      }
      r.gon = g;
    }
    std::optional<Gradability> gg = parse_gradability(row.fields[6]);
    if (!gg.has_value()) {
      throw SchemaError("unknown gradability '" + row.fields[6] + "'",
                        row.line);
    }
    r.gon_gradability = *gg;
    for (size_t i = 0; i < kNumFeatures; ++i) {
      FeatureId f = kAllFeatures[i];
      const std::string& value = row.fields[7 + 2 * i];
      const std::string& grad = row.fields[8 + 2 * i];
      if (!value.empty()) {
        std::optional<int> code = parse_level(f, value);
        if (!code.has_value()) {
          throw SchemaError("unknown " + std::string(feature_token(f)) +
                                " grade '" + value + "'",
                            row.line);
        }
        r.feature[i] = code;
      }
      std::optional<Gradability> fg = parse_gradability(grad);
      if (!fg.has_value()) {
        throw SchemaError("unknown gradability '" + grad + "'", row.line);
      }
      r.feature_gradability[i] = *fg;
    }
    try {
      r.validate();
    } catch (const InvariantViolation& e) {
      throw InvariantViolation(e.what(), row.line);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<std::string> score_header() {
  std::vector<std::string> h = {"image_id", "model_id", "p_non",
                                "p_low",    "p_high",   "p_likely"};
  for (FeatureId f : kAllFeatures) {
    for (int code = 1; code <= level_count(f); ++code) {
      h.push_back(std::string(feature_token(f)) + "_p" + std::to_string(code));
    }
  }
  return h;
}

void write_scores(const std::string& path,
                  const std::vector<ModelOutput>& outputs) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(outputs.size());
  for (const ModelOutput& m : outputs) {
    m.validate();
    std::vector<std::string> row = {m.image_id, m.model_id};
    for (double p : m.gon_probs) row.push_back(format_full(p));
    for (size_t i = 0; i < kNumFeatures; ++i) {
      int levels = level_count(kAllFeatures[i]);
      const std::vector<double>& head = m.feature_probs[i];
      for (int c = 0; c < levels; ++c) {
        row.push_back(head.empty() ? "" : format_full(head[c]));
      }
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, score_header(), rows);
}

std::vector<ModelOutput> read_scores(const std::string& path) {
  std::vector<CsvRow> rows = read_csv(path);
  std::vector<std::string> header = score_header();
  check_header(rows, header, path);
  std::vector<ModelOutput> outputs;
  outputs.reserve(rows.size() > 0 ? rows.size() - 1 : 0);
  for (size_t ri = 1; ri < rows.size(); ++ri) {
    const CsvRow& row = rows[ri];
    check_width(row, header.size());
    ModelOutput m;
    m.image_id = row.fields[0];
    m.model_id = row.fields[1];
    if (m.image_id.empty()) throw SchemaError("empty image_id", row.line);
    for (int k = 0; k < 4; ++k) {
      m.gon_probs[static_cast<size_t>(k)] =
          parse_double_cell(row.fields[static_cast<size_t>(2 + k)], row.line);
    }
    size_t col = 6;
    for (size_t i = 0; i < kNumFeatures; ++i) {
      int levels = level_count(kAllFeatures[i]);
      int present = 0;
      for (int c = 0; c < levels; ++c) {
        if (!row.fields[col + static_cast<size_t>(c)].empty()) ++present;
      }
      if (present == levels) {
        std::vector<double> head(static_cast<size_t>(levels));
        for (int c = 0; c < levels; ++c) {
          head[static_cast<size_t>(c)] =
              parse_double_cell(row.fields[col + static_cast<size_t>(c)],
                                row.line);
        }
        m.feature_probs[i] = std::move(head);
      } else if (present != 0) {
        throw SchemaError("probability head for " +
                              std::string(feature_token(kAllFeatures[i])) +
                              " is partially filled",
                          row.line);
      }
      col += static_cast<size_t>(levels);
    }
    try {
      m.validate();
    } catch (const DataError& e) {
      throw InvariantViolation(e.what(), row.line);
    }
    outputs.push_back(std::move(m));
  }
  return outputs;
}

ReferenceRow reference_row(const ReferenceStandard& ref) {
  ReferenceRow row;
  row.image_id = ref.image_id;
  row.refer = ref.labels.refer;
  row.resolution = ref.resolution;
  row.n_reviews = ref.n_reviews;
  row.feature = ref.labels.feature;
  return row;
}

ReferenceStandard to_reference_standard(const ReferenceRow& row) {
  ReferenceStandard ref;
  ref.image_id = row.image_id;
  ref.labels.refer = row.refer;
  ref.labels.feature = row.feature;
  ref.resolution = row.resolution;
  ref.n_reviews = row.n_reviews;
  ref.excluded = !row.refer.has_value();
  return ref;
}

std::vector<std::string> reference_header() {
  std::vector<std::string> h = {"image_id", "refer", "resolution",
                                "n_reviews"};
  for (FeatureId f : kAllFeatures) h.emplace_back(feature_token(f));
  return h;
}

void write_references(const std::string& path,
                      const std::vector<ReferenceRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const ReferenceRow& r : rows) {
    std::vector<std::string> row = {r.image_id, bool_cell(r.refer),
                                    std::string(resolution_token(r.resolution)),
                                    std::to_string(r.n_reviews)};
    for (size_t i = 0; i < kNumFeatures; ++i) {
      row.push_back(bool_cell(r.feature[i]));
    }
    out.push_back(std::move(row));
  }
  write_csv(path, reference_header(), out);
}

void write_references(const std::string& path,
                      const std::vector<ReferenceStandard>& refs) {
  std::vector<ReferenceRow> rows;
  rows.reserve(refs.size());
  for (const ReferenceStandard& r : refs) rows.push_back(reference_row(r));
  write_references(path, rows);
}

std::vector<ReferenceRow> read_references(const std::string& path) {
  std::vector<CsvRow> rows = read_csv(path);
  std::vector<std::string> header = reference_header();
  check_header(rows, header, path);
  std::vector<ReferenceRow> out;
  out.reserve(rows.size() > 0 ? rows.size() - 1 : 0);
  for (size_t ri = 1; ri < rows.size(); ++ri) {
    const CsvRow& row = rows[ri];
    check_width(row, header.size());
    ReferenceRow r;
    r.image_id = row.fields[0];
    if (r.image_id.empty()) throw SchemaError("empty image_id", row.line);
    r.refer = parse_bool_cell(row.fields[1], row.line);
    std::optional<Resolution> res = parse_resolution(row.fields[2]);
    if (!res.has_value()) {
      throw SchemaError("unknown resolution '" + row.fields[2] + "'",
                        row.line);
    }
    r.resolution = *res;
    r.n_reviews = static_cast<int>(parse_long_cell(row.fields[3], row.line));
    for (size_t i = 0; i < kNumFeatures; ++i) {
      r.feature[i] = parse_bool_cell(row.fields[4 + i], row.line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> patient_header() {
  return {"patient_id", "visit_date", "image_id",
          "eye",        "code_kind",  "code_date"};
}

void write_patients(const std::string& path,
                    const std::vector<PatientRecord>& patients) {
  std::vector<std::vector<std::string>> rows;
  for (const PatientRecord& p : patients) {
    if (p.patient_id.empty()) {
      throw InvariantViolation("patient with empty patient_id");
    }
    std::set<std::pair<long, int>> seen;
    for (const Visit& v : p.visits) {
      if (!seen.insert({v.date.days, static_cast<int>(v.eye)}).second) {
        throw InvariantViolation(
            "patient " + p.patient_id +
            " has two visits with the same date and eye; the flat schema "
            "cannot represent them separately");
      }
      std::string date = date_token(v.date);
      std::string eye(eye_token(v.eye));
      if (v.images.empty()) {
        rows.push_back({p.patient_id, date, "", eye, "", ""});
      } else {
        for (const std::string& img : v.images) {
          rows.push_back({p.patient_id, date, img, eye, "", ""});
        }
      }
    }
    for (const CodeEvent& e : p.code_events) {
      rows.push_back({p.patient_id, "", "", "",
                      std::string(code_kind_token(e.kind)),
                      date_token(e.date)});
    }
  }
  write_csv(path, patient_header(), rows);
}

std::vector<PatientRecord> read_patients(const std::string& path) {
  std::vector<CsvRow> rows = read_csv(path);
  std::vector<std::string> header = patient_header();
  check_header(rows, header, path);

  std::vector<PatientRecord> patients;
  std::map<std::string, size_t> index;
  // Visit key is (date, eye) per patient; values index into visits.
  std::map<std::string, std::map<std::pair<long, int>, size_t>> visit_index;

  for (size_t ri = 1; ri < rows.size(); ++ri) {
    const CsvRow& row = rows[ri];
    check_width(row, header.size());
    const std::string& pid = row.fields[0];
    if (pid.empty()) throw SchemaError("empty patient_id", row.line);
    auto [it, fresh] = index.try_emplace(pid, patients.size());
    if (fresh) {
      PatientRecord p;
      p.patient_id = pid;
      patients.push_back(std::move(p));
    }
    PatientRecord& p = patients[it->second];

    const std::string& visit_date = row.fields[1];
    const std::string& image_id = row.fields[2];
    const std::string& eye_cell = row.fields[3];
    const std::string& code_kind = row.fields[4];
    const std::string& code_date = row.fields[5];

    if (!visit_date.empty()) {
      if (!code_kind.empty() || !code_date.empty()) {
        throw SchemaError("visit row carries code columns", row.line);
      }
      Date date;
      try {
        date = parse_date(visit_date);
      } catch (const SchemaError& e) {
        throw SchemaError(e.what(), row.line);
      }
      std::optional<Eye> eye = parse_eye(eye_cell);
      if (!eye.has_value()) {
        throw SchemaError("unknown eye '" + eye_cell + "'", row.line);
      }
      std::pair<long, int> key{date.days, static_cast<int>(*eye)};
      auto& vmap = visit_index[pid];
      auto vit = vmap.find(key);
      if (vit == vmap.end()) {
        vmap.emplace(key, p.visits.size());
        Visit v;
        v.date = date;
        v.eye = *eye;
        if (!image_id.empty()) v.images.push_back(image_id);
        p.visits.push_back(std::move(v));
      } else {
        if (image_id.empty()) {
          throw SchemaError("imageless row repeats an existing visit",
                            row.line);
        }
        p.visits[vit->second].images.push_back(image_id);
      }
    } else {
      if (code_kind.empty() || code_date.empty()) {
        throw SchemaError("row is neither a visit nor a coded event",
                          row.line);
      }
      if (!image_id.empty() || !eye_cell.empty()) {
        throw SchemaError("code row carries visit columns", row.line);
      }
      CodeEvent e;
      std::optional<CodeKind> kind = parse_code_kind(code_kind);
      if (!kind.has_value()) {
        throw SchemaError("unknown code kind '" + code_kind + "'", row.line);
      }
      e.kind = *kind;
      try {
        e.date = parse_date(code_date);
      } catch (const SchemaError& err) {
        throw SchemaError(err.what(), row.line);
      }
      p.code_events.push_back(e);
    }
  }
  return patients;
}

void write_truth(const std::string& path, const TruthFile& truth) {
  nlohmann::ordered_json j;
  j["analytic_auc"] = truth.analytic_auc;
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (const ImageTruth& t : truth.truths) {
    nlohmann::ordered_json img;
    img["image_id"] = t.image_id;
    img["refer"] = t.refer;
    img["score"] = t.score;
    images.push_back(std::move(img));
  }
  j["images"] = std::move(images);
  write_text_atomic(path, j.dump(2) + "\n");
}

TruthFile read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed truth file: ") + e.what());
  }
  TruthFile t;
  try {
    t.analytic_auc = j.at("analytic_auc").get<double>();
    for (const nlohmann::json& img : j.at("images")) {
      ImageTruth it;
      it.image_id = img.at("image_id").get<std::string>();
      it.refer = img.at("refer").get<bool>();
      it.score = img.at("score").get<double>();
      t.truths.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("truth file missing field: ") + e.what());
  }
  return t;
}

}  // namespace gonstat
