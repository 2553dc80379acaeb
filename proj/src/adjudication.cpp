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

#include "gonstat/adjudication.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gonstat/errors.hpp"

namespace gonstat {

namespace {

// Items are indexed 0 = GON risk, 1..kNumFeatures = features.
constexpr int kNumItems = kNumFeatures + 1;

std::optional<int> item_code(const GradeRecord& r, int item) {
  if (item == 0) {
    if (!r.gon) return std::nullopt;
    return static_cast<int>(*r.gon);
  }
  return r.feature[static_cast<size_t>(item - 1)];
}

bool same_on_every_item(const GradeRecord& a, const GradeRecord& b) {
  for (int item = 0; item < kNumItems; ++item) {
    if (item_code(a, item) != item_code(b, item)) return false;
  }
  return true;
}

bool is_circumlinear(int item) {
  return item == 1 + static_cast<int>(FeatureId::kCircumlinear);
}

// Resolves one item from the three latest grades.  nullopt means the item's
// majority gradability was Ungradable.
std::optional<int> resolve_item(int item,
                                const std::array<const GradeRecord*, 3>& latest,
                                const MedianPolicy& policy,
                                const std::string& image_id) {
  std::vector<int> codes;
  for (const GradeRecord* r : latest) {
    if (auto c = item_code(*r, item)) codes.push_back(*c);
  }
  if (codes.size() <= 1) return std::nullopt;
  bool ordered = policy.circumlinear_ordered || !is_circumlinear(item);
  if (codes.size() == 3) {
    if (!ordered && codes[0] != codes[1] && codes[1] != codes[2] &&
        codes[0] != codes[2]) {
      throw NonOrdinalTie(
          "three distinct circumlinear grades with rank order disabled, "
          "image " + image_id);
    }
    return ordinal_median3(codes[0], codes[1], codes[2]);
  }
  // Two codes: majority of the present pair, else the lower middle.
  if (codes[0] == codes[1]) return codes[0];
  if (!ordered) {
    throw NonOrdinalTie(
        "two distinct circumlinear grades with rank order disabled, image " +
        image_id);
  }
  return (codes[0] + codes[1]) / 2;
}

struct SplitLog {
  std::array<const GradeRecord*, 3> round1{};  // slot order: sorted grader_id
  std::vector<const GradeRecord*> round2;      // ordered by seq
  std::array<std::string, 3> graders;
};

SplitLog split_and_check(const std::vector<GradeRecord>& log,
                         bool allow_round2) {
  if (log.empty()) throw MalformedLog("empty grade log");
  const std::string& image = log.front().image_id;
  std::map<std::string, int> records_per_grader;
  std::map<std::string, const GradeRecord*> round1;
  std::vector<const GradeRecord*> round2;
  std::set<int> seq_r1, seq_r2;
  for (const GradeRecord& r : log) {
    r.validate();
    if (r.image_id != image) {
      throw MalformedLog("mixed image ids in one log: " + image + " vs " +
                         r.image_id);
    }
    ++records_per_grader[r.grader_id];
    if (r.round == 1) {
      if (!round1.emplace(r.grader_id, &r).second) {
        throw MalformedLog("grader " + r.grader_id +
                           " has two round-1 records for image " + image);
      }
      if (!seq_r1.insert(r.seq).second) {
        throw MalformedLog("duplicate round-1 seq for image " + image);
      }
    } else {
      if (!allow_round2) {
        throw MalformedLog("round-2 record in a single-round log, image " +
                           image);
      }
      if (!seq_r2.insert(r.seq).second) {
        throw MalformedLog("duplicate round-2 seq for image " + image);
      }
      round2.push_back(&r);
    }
  }
  if (round1.size() != 3) {
    throw MalformedLog("image " + image + " has round-1 grades from " +
                       std::to_string(round1.size()) +
                       " graders; the protocol requires exactly 3");
  }
  for (const auto& [grader, count] : records_per_grader) {
    if (round1.find(grader) == round1.end()) {
      throw MalformedLog("round-2 grader " + grader +
                         " missing from round 1, image " + image);
    }
    if (count > 2) {
      throw MalformedLog("grader " + grader + " reviewed image " + image +
                         " more than twice");
    }
  }
  std::sort(round2.begin(), round2.end(),
            [](const GradeRecord* a, const GradeRecord* b) {
              return a->seq < b->seq;
            });
  SplitLog out;
  int slot = 0;
  for (const auto& [grader, rec] : round1) {
    out.graders[static_cast<size_t>(slot)] = grader;
    out.round1[static_cast<size_t>(slot)] = rec;
    ++slot;
  }
  out.round2 = std::move(round2);
  return out;
}

ReferenceStandard finish(const std::string& image_id, Resolution resolution,
                         int n_reviews,
                         const std::array<const GradeRecord*, 3>& latest,
                         const MedianPolicy& policy) {
  ReferenceStandard ref;
  ref.image_id = image_id;
  ref.resolution = resolution;
  ref.n_reviews = n_reviews;
  for (int item = 0; item < kNumItems; ++item) {
    std::optional<int> code = resolve_item(item, latest, policy, image_id);
    if (item == 0) {
      if (code) ref.gon = static_cast<GonRisk>(*code);
    } else {
      ref.feature[static_cast<size_t>(item - 1)] = code;
    }
  }
  ref.excluded = !ref.gon.has_value();
  ref.labels = binarize_labels(ref.gon, ref.feature);
  return ref;
}

}  // namespace

std::string_view resolution_token(Resolution r) {
  switch (r) {
    case Resolution::kConsensusRound1:
      return "consensus_r1";
    case Resolution::kConsensusRound2:
      return "consensus_r2";
    case Resolution::kMedian:
      return "median";
  }
  return "median";
}

std::optional<Resolution> parse_resolution(std::string_view token) {
  if (token == "consensus_r1") return Resolution::kConsensusRound1;
  if (token == "consensus_r2") return Resolution::kConsensusRound2;
  if (token == "median") return Resolution::kMedian;
  return std::nullopt;
}

int ordinal_median3(int a, int b, int c) {
  int lo = std::min(a, std::min(b, c));
  int hi = std::max(a, std::max(b, c));
  return a + b + c - lo - hi;
}

ReferenceStandard resolve_image(const std::vector<GradeRecord>& log,
                                const MedianPolicy& policy) {
  SplitLog split = split_and_check(log, /*allow_round2=*/true);
  std::array<const GradeRecord*, 3> latest = split.round1;

  auto unanimous = [&latest]() {
    return same_on_every_item(*latest[0], *latest[1]) &&
           same_on_every_item(*latest[0], *latest[2]);
  };

  if (unanimous()) {
    // Round-2 records, if any, are audit-only once consensus exists.
    return finish(log.front().image_id, Resolution::kConsensusRound1, 3,
                  latest, policy);
  }
  int n_reviews = 3;
  for (const GradeRecord* rec : split.round2) {
    for (size_t slot = 0; slot < 3; ++slot) {
      if (split.graders[slot] == rec->grader_id) {
        latest[slot] = rec;
        break;
      }
    }
    ++n_reviews;
    if (unanimous()) {
      return finish(log.front().image_id, Resolution::kConsensusRound2,
                    n_reviews, latest, policy);
    }
  }
  return finish(log.front().image_id, Resolution::kMedian, n_reviews, latest,
                policy);
}

ReferenceStandard resolve_single_round(const std::vector<GradeRecord>& log,
                                       const MedianPolicy& policy) {
  SplitLog split = split_and_check(log, /*allow_round2=*/false);
  std::array<const GradeRecord*, 3> latest = split.round1;
  bool unanimous = same_on_every_item(*latest[0], *latest[1]) &&
                   same_on_every_item(*latest[0], *latest[2]);
  return finish(log.front().image_id,
                unanimous ? Resolution::kConsensusRound1 : Resolution::kMedian,
                3, latest, policy);
}

std::vector<ReferenceStandard> resolve_log(
    const std::vector<GradeRecord>& records, bool single_round,
    const MedianPolicy& policy) {
  std::map<std::string, std::vector<GradeRecord>> by_image;
  for (const GradeRecord& r : records) {
    by_image[r.image_id].push_back(r);
  }
  std::vector<ReferenceStandard> out;
  out.reserve(by_image.size());
  for (const auto& [image, log] : by_image) {
    out.push_back(single_round ? resolve_single_round(log, policy)
                               : resolve_image(log, policy));
  }
  return out;
}

MethodAgreement method_agreement(const std::vector<GonRisk>& a,
                                 const std::vector<GonRisk>& b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("method_agreement: lists of " +
                         std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " grades");
  }
  MethodAgreement m;
  m.n = static_cast<long>(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    int ai = static_cast<int>(a[i]) - 1;
    int bi = static_cast<int>(b[i]) - 1;
    ++m.counts[static_cast<size_t>(ai)][static_cast<size_t>(bi)];
    if (ai != bi) ++m.n_label_changes;
    if (binarize_gon(a[i]) != binarize_gon(b[i])) ++m.n_referral_changes;
  }
  return m;
}

}  // namespace gonstat
